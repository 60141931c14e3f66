#include "gpd/scene/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "gpd/scene/error.hpp"

namespace gpd::scene {

namespace {

constexpr std::string_view kMagic = "GPD-SCENARIO";
constexpr std::string_view kVersion = "v1";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::int64_t parse_int(std::string_view token) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw std::invalid_argument("bad integer '" + std::string(token) + "'");
  }
  return v;
}

void write_agent(std::ostream& out, const AgentState& a) {
  out << a.id << ',' << format_double(a.pose.x) << ',' << format_double(a.pose.y) << ','
      << format_double(a.pose.heading) << ',' << format_double(a.length) << ',' << format_double(a.width) << ','
      << (a.visible ? 1 : 0);
}

AgentState parse_agent(std::string_view tok) {
  const auto f = split(tok, ',');
  if (f.size() != 7) throw std::invalid_argument("agent tuple needs 7 fields, got " + std::to_string(f.size()));
  AgentState a;
  a.id = parse_int(f[0]);
  a.pose = {parse_double(f[1]), parse_double(f[2]), parse_double(f[3])};
  a.length = parse_double(f[4]);
  a.width = parse_double(f[5]);
  const auto vis = parse_int(f[6]);
  if (vis != 0 && vis != 1) throw std::invalid_argument("visibility flag must be 0 or 1");
  a.visible = vis == 1;
  return a;
}

void write_map(std::ostream& out, const MapLines& map) {
  if (map.empty()) {
    out << '-';
    return;
  }
  for (std::size_t l = 0; l < map.size(); ++l) {
    if (l > 0) out << ';';
    for (std::size_t i = 0; i < map[l].size(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(map[l][i].x) << ',' << format_double(map[l][i].y);
    }
  }
}

MapLines parse_map(std::string_view tok) {
  MapLines map;
  if (tok == "-") return map;
  for (auto line : split(tok, ';')) {
    std::vector<Vec2> pts;
    for (auto p : split(line, ' ')) {
      const auto xy = split(p, ',');
      if (xy.size() != 2) throw std::invalid_argument("map point needs 2 coordinates");
      pts.push_back({parse_double(xy[0]), parse_double(xy[1])});
    }
    map.emplace_back(std::move(pts));
  }
  return map;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw std::invalid_argument("bad number '" + std::string(token) + "'");
  }
  return v;
}

void write_scenario(std::ostream& out, const Scenario& s) {
  validate(s);
  const std::size_t n = s.agent_count();
  out << kMagic << ' ' << kVersion << " dt=" << format_double(s.dt) << " agents=" << n << '\n';
  out << "roster";
  if (n == 0) out << " -";
  if (!s.frames.empty()) {
    for (const auto& a : s.frames.front().agents) out << ' ' << a.id;
  }
  out << '\n';
  const MapLines* prev = nullptr;
  for (const auto& fr : s.frames) {
    out << fr.t_index << '\t';
    write_agent(out, fr.ego);
    out << '\t';
    if (fr.agents.empty()) out << '-';
    for (std::size_t i = 0; i < fr.agents.size(); ++i) {
      if (i > 0) out << ' ';
      write_agent(out, fr.agents[i]);
    }
    out << '\t';
    if (prev != nullptr && *prev == fr.map) {
      out << '=';
    } else {
      write_map(out, fr.map);
    }
    out << '\n';
    prev = &fr.map;
  }
  out << "end frames=" << s.frames.size() << '\n';
}

Scenario read_scenario(std::istream& in) {
  Scenario s;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };

  if (!next()) throw ParseError("empty scenario file", 1);
  std::size_t n_agents = 0;
  try {
    const auto head = split(line, ' ');
    if (head.size() != 4 || head[0] != kMagic) throw std::invalid_argument("missing GPD-SCENARIO header");
    if (head[1] != kVersion) throw std::invalid_argument("unsupported version " + std::string(head[1]));
    if (head[2].substr(0, 3) != "dt=") throw std::invalid_argument("expected dt=");
    if (head[3].substr(0, 7) != "agents=") throw std::invalid_argument("expected agents=");
    s.dt = parse_double(head[2].substr(3));
    n_agents = static_cast<std::size_t>(parse_int(head[3].substr(7)));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), lineno);
  }

  if (!next()) throw ParseError("missing roster line", lineno + 1);
  std::vector<std::int64_t> roster;
  try {
    const auto f = split(line, ' ');
    if (f.empty() || f[0] != "roster") throw std::invalid_argument("expected roster line");
    if (!(f.size() == 2 && f[1] == "-")) {
      for (std::size_t i = 1; i < f.size(); ++i) roster.push_back(parse_int(f[i]));
    }
    if (roster.size() != n_agents) throw std::invalid_argument("roster size disagrees with header");
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), lineno);
  }

  bool ended = false;
  while (next()) {
    try {
      if (line.rfind("end ", 0) == 0) {
        const auto count = line.substr(4);
        if (count.rfind("frames=", 0) != 0) throw std::invalid_argument("bad end record");
        if (static_cast<std::size_t>(parse_int(std::string_view(count).substr(7))) != s.frames.size()) {
          throw std::invalid_argument("frame count mismatch in end record");
        }
        ended = true;
        break;
      }
      const auto f = split(line, '\t');
      if (f.size() != 4) throw std::invalid_argument("frame record needs 4 tab-separated fields");
      SceneFrame fr;
      fr.t_index = parse_int(f[0]);
      fr.ego = parse_agent(f[1]);
      if (f[2] != "-") {
        for (auto tok : split(f[2], ' ')) fr.agents.push_back(parse_agent(tok));
      }
      if (fr.agents.size() != n_agents) throw std::invalid_argument("agent count disagrees with header");
      for (std::size_t i = 0; i < n_agents; ++i) {
        if (fr.agents[i].id != roster[i]) throw std::invalid_argument("agent id disagrees with roster");
      }
      if (f[3] == "=") {
        if (s.frames.empty()) throw std::invalid_argument("'=' map on first frame");
        fr.map = s.frames.back().map;
      } else {
        fr.map = parse_map(f[3]);
      }
      s.frames.push_back(std::move(fr));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!ended) throw ParseError("truncated scenario: missing end record", lineno + 1);
  try {
    validate(s);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), lineno);
  }
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_scenario(out, s);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return read_scenario(in);
}

}  // namespace gpd::scene
