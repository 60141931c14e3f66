#include "gpd/rollout/provenance_io.hpp"

#include <fstream>
#include <sstream>

#include "gpd/scene/error.hpp"

namespace gpd::rollout {

Provenance provenance_of(const RolloutResult& r, const world::SceneLayout& layout) {
  Provenance p;
  p.mode = r.mode;
  p.layout.n_map = layout.n_map;  // the file carries no context length
  p.layout.n_agent = layout.n_agent;
  for (const auto& f : r.scenario.frames) p.t_index.push_back(f.t_index);
  p.flags = r.provenance;
  return p;
}

namespace {

char flag(Source s) { return s == Source::GroundTruth ? 'G' : 'P'; }

std::string field(const std::string& token, const std::string& key, std::size_t line) {
  if (token.rfind(key + "=", 0) != 0) throw ParseError("expected " + key + "=", line);
  return token.substr(key.size() + 1);
}

std::size_t to_count(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto v = std::stoul(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

}  // namespace

void write_provenance(std::ostream& out, const Provenance& p) {
  const auto& L = p.layout;
  out << "GPD-PROVENANCE v1 mode=" << to_string(p.mode) << " n_map=" << L.n_map << " n_agent=" << L.n_agent
      << " frames=" << p.flags.size() << '\n';
  for (std::size_t f = 0; f < p.flags.size(); ++f) {
    const auto& fl = p.flags[f];
    if (fl.size() != L.tokens_per_frame()) throw ConfigError("provenance row does not match the layout");
    out << p.t_index[f] << '\t';
    for (std::size_t k = 0; k < L.n_map; ++k) out << flag(fl[k]);
    out << '\t' << flag(fl[L.n_map]) << '\t';
    for (std::size_t k = L.n_map + 1; k < fl.size(); ++k) out << flag(fl[k]);
    if (L.n_agent == 1) out << '-';
    out << '\n';
  }
  out << "end\n";
}

Provenance read_provenance(std::istream& in) {
  Provenance p;
  std::string line;
  std::size_t no = 1;
  if (!std::getline(in, line)) throw ParseError("empty provenance file", no);
  std::istringstream head(line);
  std::string magic, version, mode, nm, na, fr;
  head >> magic >> version >> mode >> nm >> na >> fr;
  if (magic != "GPD-PROVENANCE" || version != "v1") throw ParseError("not a v1 provenance file", no);
  p.mode = parse_task_mode(field(mode, "mode", no));
  p.layout.n_map = to_count(field(nm, "n_map", no), no);
  p.layout.n_agent = to_count(field(na, "n_agent", no), no);
  const std::size_t frames = to_count(field(fr, "frames", no), no);
  auto parse_flags = [&no](const std::string& s, std::vector<Source>& out) {
    for (char c : s) {
      if (c == 'G') out.push_back(Source::GroundTruth);
      else if (c == 'P') out.push_back(Source::Predicted);
      else throw ParseError(std::string("bad provenance flag '") + c + "'", no);
    }
  };
  for (std::size_t f = 0; f < frames; ++f) {
    ++no;
    if (!std::getline(in, line)) throw ParseError("truncated provenance file", no);
    std::istringstream row(line);
    std::string t, m, e, a;
    if (!std::getline(row, t, '\t') || !std::getline(row, m, '\t') || !std::getline(row, e, '\t') || !std::getline(row, a)) {
      throw ParseError("expected 4 tab-separated fields", no);
    }
    try {
      p.t_index.push_back(std::stoll(t));
    } catch (const std::exception&) {
      throw ParseError("bad frame index '" + t + "'", no);
    }
    std::vector<Source> fl;
    parse_flags(m, fl);
    parse_flags(e, fl);
    if (a != "-") parse_flags(a, fl);
    if (fl.size() != p.layout.tokens_per_frame()) throw ParseError("row has " + std::to_string(fl.size()) + " flags", no);
    p.flags.push_back(std::move(fl));
  }
  ++no;
  if (!std::getline(in, line) || line != "end") throw ParseError("missing end marker", no);
  return p;
}

void save_provenance(const Provenance& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_provenance(out, p);
}

Provenance load_provenance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return read_provenance(in);
}

}  // namespace gpd::rollout
