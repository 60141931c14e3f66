#include "gpd/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gpd/cli/render.hpp"
#include "gpd/codec/trainer.hpp"
#include "gpd/raster/raster.hpp"
#include "gpd/rollout/evaluate.hpp"
#include "gpd/rollout/provenance_io.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/geometry.hpp"
#include "gpd/scene/scenario_io.hpp"
#include "gpd/synth/scenario_gen.hpp"
#include "gpd/world/trainer.hpp"

namespace fs = std::filesystem;

namespace gpd::cli {

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", no);
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<fs::path> scenario_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".scenario") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no .scenario files in " + dir.string());
  return out;
}

fs::path output_root() {
  const char* env = std::getenv("GPD_OUT_ROOT");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
}

namespace {

std::vector<scene::Scenario> load_all(const fs::path& dir) {
  std::vector<scene::Scenario> out;
  for (const auto& f : scenario_files(dir)) out.push_back(scene::load_scenario(f));
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(scene::parse_double(item));
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Fills options left unset on the command line from the config file.
void apply_config(CLI::App& sub, const std::map<std::string, std::string>& cfg) {
  for (const auto& [key, value] : cfg) {
    if (key == "help" || key == "config" || !sub.get_option_no_throw("--" + key)) {
      throw ConfigError("config key '" + key + "' is not an option of " + sub.get_name());
    }
  }
  for (auto* opt : sub.get_options()) {
    if (opt->count() > 0 || opt->get_lnames().empty()) continue;
    const auto it = cfg.find(opt->get_lnames().front());
    if (it == cfg.end()) continue;
    opt->add_result(it->second);
    opt->run_callback();
  }
}

/// Resolved options as key=value, loadable again through --config.
void echo_config(const CLI::App& sub, const fs::path& path, const std::map<std::string, std::string>& resolved = {}) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# gpd " << sub.get_name() << '\n';
  for (const auto* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (const auto it = resolved.find(name); it != resolved.end()) {
      value = it->second;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = opt->get_default_str();
    }
    out << name << '=' << value << '\n';
  }
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

fs::path default_out(const std::string& set, const std::string& fallback) {
  return set.empty() ? output_root() / fallback : fs::path(set);
}

// ---------------------------------------------------------------- gen-data

struct GenArgs {
  std::string kind = "straight";
  int agents = 4;
  int frames = 100;
  std::uint64_t seed = 0;
  int count = 1;
  int lanes = 2;
  double lane_width = 3.5;
  double radius = 50.0;
  double speed = 10.0;
  std::string out;
};

int cmd_gen_data(const GenArgs& a, const CLI::App& sub, std::ostream& out) {
  if (a.count < 1) throw ConfigError("--count must be >= 1");
  const std::vector<synth::RoadKind> all{synth::RoadKind::Straight, synth::RoadKind::Arc,
                                         synth::RoadKind::TIntersection, synth::RoadKind::Crossroads};
  std::vector<synth::GenConfig> cfgs;
  for (int i = 0; i < a.count; ++i) {
    synth::GenConfig g;
    g.road.kind = a.kind == "mixed" ? all[static_cast<std::size_t>(i) % all.size()] : synth::parse_road_kind(a.kind);
    g.road.lane_count = a.lanes;
    g.road.lane_width = a.lane_width;
    g.road.arc_radius = a.radius;
    g.n_agents = a.agents;
    g.horizon_frames = a.frames;
    g.seed = a.seed + static_cast<std::uint64_t>(i);
    g.idm.desired_speed = a.speed;
    synth::validate(g);
    cfgs.push_back(g);
  }
  // Generate everything before writing so a failure leaves no partial output.
  std::vector<scene::Scenario> scenarios;
  for (const auto& g : cfgs) scenarios.push_back(synth::gen_scenario(g));
  const fs::path dir = default_out(a.out, "data");
  fs::create_directories(dir);
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    char name[96];
    std::snprintf(name, sizeof name, "%s_%06llu.scenario", synth::to_string(cfgs[i].road.kind).c_str(),
                  static_cast<unsigned long long>(cfgs[i].seed));
    scene::save_scenario(scenarios[i], dir / name);
  }
  echo_config(sub, dir / "gen-data.config", {{"out", dir.string()}});
  out << "wrote " << scenarios.size() << " scenario(s) to " << dir.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------- train-codec

struct CodecArgs {
  std::string data;
  std::string out;
  std::string log;
  std::int64_t steps = 5000;
  std::uint64_t seed = 0;
  int grid = 4;
  std::size_t batch = 4;
  double lr = 5e-4;
  double codebook_lr = 1.5e-3;
  double weight_decay = 1e-4;
  std::int64_t warmup = 100;
  std::size_t frame_stride = 10;
  std::size_t queries = 16;
  std::size_t points = 12;
  std::size_t codebook_size = 128;
  std::int64_t checkpoint_every = 500;
  std::int64_t dead_code_steps = 500;
  bool resume = false;
};

void log_line(std::ofstream& log, const std::string& line) {
  log << line << '\n';
  log.flush();
}

int cmd_train_codec(const CodecArgs& a, const CLI::App& sub, std::ostream& out) {
  if (a.grid != 4 && a.grid != 8) throw ConfigError("--grid must be 4 or 8");
  if (a.frame_stride == 0) throw ConfigError("--frame-stride must be >= 1");
  codec::CodecConfig cfg;
  cfg.grid = a.grid;
  cfg.queries = a.queries;
  cfg.points = a.points;
  cfg.codebook_size = a.codebook_size;
  codec::validate(cfg);
  codec::CodecTrainConfig tc;
  tc.steps = a.steps;
  tc.batch = a.batch;
  tc.lr = a.lr;
  tc.codebook_lr = a.codebook_lr;
  tc.weight_decay = a.weight_decay;
  tc.warmup = a.warmup;
  tc.seed = a.seed;
  tc.dead_code_steps = a.dead_code_steps;

  std::vector<codec::CodecSample> data;
  for (const auto& s : load_all(a.data)) {
    for (std::size_t f = 0; f < s.frames.size(); f += a.frame_stride) data.push_back(codec::make_codec_sample(s.frames[f], cfg));
  }
  const fs::path ckpt_path = default_out(a.out, "codec.ckpt");
  const fs::path log_path = a.log.empty() ? fs::path(ckpt_path.string() + ".log") : fs::path(a.log);
  ensure_parent(ckpt_path);
  ensure_parent(log_path);

  codec::CodecModel<float> model(cfg, a.seed);
  codec::CodecTrainer trainer(model, std::move(data), tc);
  if (a.resume && fs::exists(ckpt_path)) trainer.restore(nn::load_checkpoint(ckpt_path));
  echo_config(sub, ckpt_path.string() + ".config", {{"out", ckpt_path.string()}, {"log", log_path.string()}});
  std::ofstream log(log_path, a.resume ? std::ios::app : std::ios::trunc);
  auto save = [&] {
    auto ck = trainer.checkpoint();
    ck.header["train.seed"] = std::to_string(a.seed);
    nn::save_checkpoint(ck, ckpt_path);
  };
  try {
    while (trainer.steps_done() < a.steps) {
      const auto st = trainer.step();
      std::ostringstream line;
      line << "step=" << st.step << " total=" << scene::format_double(st.total)
           << " position=" << scene::format_double(st.position) << " visibility=" << scene::format_double(st.visibility)
           << " codebook=" << scene::format_double(st.codebook) << " commitment=" << scene::format_double(st.commitment)
           << " codes_used=" << st.codes_used;
      log_line(log, line.str());
      if (a.checkpoint_every > 0 && st.step % a.checkpoint_every == 0) save();
    }
  } catch (const NumericalError&) {
    save();
    throw;
  }
  save();
  out << "codec trained for " << trainer.steps_done() << " steps -> " << ckpt_path.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------- train-world

struct WorldArgs {
  std::string data;
  std::string codec;
  std::string out;
  std::string log;
  std::int64_t steps = 5000;
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden = 0;
  std::size_t agent_slots = 9;
  std::size_t t_max = 50;
  std::size_t window = 0;
  std::size_t batch = 1;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  std::int64_t warmup = 100;
  double pose_noise = 0.0;
  std::int64_t checkpoint_every = 500;
  bool resume = false;
};

int cmd_train_world(const WorldArgs& a, const CLI::App& sub, std::ostream& out) {
  if (a.codec.empty() || !fs::exists(a.codec)) throw ConfigError("codec checkpoint not found: '" + a.codec + "'");
  const auto codec = codec::load_codec(a.codec);
  world::WorldConfig wc;
  wc.layout.n_map = codec->config().cells();
  wc.layout.n_agent = a.agent_slots;
  wc.layout.t_max = a.t_max;
  wc.dim = a.dim;
  wc.layers = a.layers;
  wc.heads = a.heads;
  wc.hidden = a.hidden == 0 ? 4 * a.dim : a.hidden;
  wc.codebook_size = codec->config().codebook_size;
  wc.code_dim = codec->config().latent_dim;
  wc.agent.half_extent = codec->config().raster.region_half_extent;
  world::validate(wc);
  world::WorldTrainConfig tc;
  tc.steps = a.steps;
  tc.batch = a.batch;
  tc.window = a.window;
  tc.lr = a.lr;
  tc.weight_decay = a.weight_decay;
  tc.warmup = a.warmup;
  tc.seed = a.seed;
  tc.pose_noise = a.pose_noise;

  std::vector<world::TokenizedScenario> data;
  for (const auto& s : load_all(a.data)) data.push_back(world::tokenize_scenario(s, *codec, wc.layout));
  const fs::path ckpt_path = default_out(a.out, "world.ckpt");
  const fs::path log_path = a.log.empty() ? fs::path(ckpt_path.string() + ".log") : fs::path(a.log);
  ensure_parent(ckpt_path);
  ensure_parent(log_path);

  const std::string hash = world::codec_hash(*codec);
  world::WorldModel<float> model(wc, codec->codebook().value, a.seed);
  world::WorldTrainer trainer(model, std::move(data), tc);
  if (a.resume && fs::exists(ckpt_path)) {
    const auto ck = nn::load_checkpoint(ckpt_path);
    if (ck.require("codec_hash") != hash) {
      throw ConfigError("codec mismatch: checkpoint expects codec " + ck.require("codec_hash") + ", got " + hash);
    }
    trainer.restore(ck);
  }
  echo_config(sub, ckpt_path.string() + ".config", {{"out", ckpt_path.string()}, {"log", log_path.string()}});
  std::ofstream log(log_path, a.resume ? std::ios::app : std::ios::trunc);
  auto save = [&] { nn::save_checkpoint(trainer.checkpoint(hash), ckpt_path); };
  try {
    while (trainer.steps_done() < a.steps) {
      const auto st = trainer.step();
      std::ostringstream line;
      line << "step=" << st.step << " total=" << scene::format_double(st.total)
           << " map_ce=" << scene::format_double(st.map_ce) << " agent_l1=" << scene::format_double(st.agent_l1)
           << " position_l1=" << scene::format_double(st.position_l1)
           << " visibility=" << scene::format_double(st.visibility)
           << " map_accuracy=" << scene::format_double(st.map_accuracy);
      log_line(log, line.str());
      if (a.checkpoint_every > 0 && st.step % a.checkpoint_every == 0) save();
    }
  } catch (const NumericalError&) {
    save();
    throw;
  }
  save();
  out << "world model trained for " << trainer.steps_done() << " steps -> " << ckpt_path.string() << '\n';
  return kOk;
}

// ----------------------------------------------------------------- rollout

struct RolloutArgs {
  std::string world;
  std::string codec;
  std::string scenario;
  std::string mode = "sg";
  std::string gt_slots = "all";
  std::size_t context = 20;
  std::size_t horizon = 80;
  std::size_t window = 0;
  std::string out;
};

struct Models {
  std::unique_ptr<codec::CodecModel<float>> codec;
  std::unique_ptr<world::WorldModel<float>> world;
};

Models load_models(const std::string& world_path, const std::string& codec_path) {
  if (codec_path.empty() || !fs::exists(codec_path)) throw ConfigError("codec checkpoint not found: '" + codec_path + "'");
  if (world_path.empty() || !fs::exists(world_path)) throw ConfigError("world checkpoint not found: '" + world_path + "'");
  Models m;
  m.codec = codec::load_codec(codec_path);
  m.world = world::load_world(world_path, *m.codec);
  return m;
}

/// Conditional predicate from a comma list of: all, none, map, ego, agents, or slot indices.
rollout::SubstitutionPredicate parse_gt_slots(const std::string& text, const world::SceneLayout& L) {
  std::vector<std::uint8_t> on(L.tokens_per_frame(), 0);
  for (const auto& item : split(text)) {
    if (item == "all") {
      std::fill(on.begin(), on.end(), 1);
    } else if (item == "none") {
    } else if (item == "map") {
      std::fill(on.begin(), on.begin() + static_cast<long>(L.n_map), 1);
    } else if (item == "ego") {
      on[L.n_map] = 1;
    } else if (item == "agents") {
      std::fill(on.begin() + static_cast<long>(L.n_map + 1), on.end(), 1);
    } else {
      std::size_t k = 0;
      try {
        k = std::stoul(item);
      } catch (const std::exception&) {
        throw ConfigError("bad --gt-slots entry '" + item + "'");
      }
      if (k >= on.size()) throw ConfigError("--gt-slots index " + item + " out of range");
      on[k] = 1;
    }
  }
  return [on](std::size_t, std::size_t slot) { return on[slot] != 0; };
}

int cmd_rollout(const RolloutArgs& a, const CLI::App& sub, std::ostream& out) {
  const auto mode = rollout::parse_task_mode(a.mode);
  const auto models = load_models(a.world, a.codec);
  const auto gt = scene::load_scenario(a.scenario);
  rollout::RolloutConfig rc;
  rc.mode = mode;
  rc.context_frames = a.context;
  rc.horizon_frames = a.horizon;
  rc.window = a.window;
  if (mode == rollout::TaskMode::Conditional) rc.predicate = parse_gt_slots(a.gt_slots, models.world->config().layout);
  const auto res = rollout::run_rollout(*models.world, *models.codec, gt, rc);
  const fs::path path = default_out(a.out, "rollout.scenario");
  ensure_parent(path);
  scene::save_scenario(res.scenario, path);
  rollout::save_provenance(rollout::provenance_of(res, models.world->config().layout), path.string() + ".prov");
  echo_config(sub, path.string() + ".config", {{"out", path.string()}});
  out << "rollout " << rollout::to_string(mode) << ": " << res.scenario.frames.size() << " frames -> " << path.string()
      << '\n';
  return kOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string world;
  std::string codec;
  std::string data;
  std::string pred;
  std::string gt;
  std::string modes = "sg,ts,cl,mp";
  std::string horizons = "3,5,8";
  std::size_t context = 20;
  std::size_t window = 0;
  std::string out;
};

int cmd_eval(const EvalArgs& a, const CLI::App& sub, std::ostream& out) {
  const auto horizons_s = parse_list(a.horizons);
  std::vector<rollout::EvalRow> rows;
  auto frames_for = [](double seconds, double dt) {
    const auto f = static_cast<long>(std::llround(seconds / dt));
    if (f <= 0) throw ConfigError("horizon must be positive");
    return static_cast<std::size_t>(f);
  };
  std::vector<std::string> mode_names;
  if (!a.pred.empty() || !a.gt.empty()) {
    if (a.pred.empty() || a.gt.empty()) throw ConfigError("--pred and --gt go together");
    const auto pred = scene::load_scenario(a.pred);
    const auto gt = scene::load_scenario(a.gt);
    mode_names.push_back("file");
    for (double h : horizons_s) {
      auto r = rollout::evaluate_prediction(pred, gt, frames_for(h, pred.dt));
      r.scenario = fs::path(a.pred).filename().string();
      r.mode = "file";
      rows.push_back(r);
    }
  } else {
    const auto models = load_models(a.world, a.codec);
    std::vector<rollout::TaskMode> modes;
    for (const auto& m : split(a.modes)) {
      modes.push_back(rollout::parse_task_mode(m));
      if (modes.back() == rollout::TaskMode::Conditional) throw ConfigError("eval does not run conditional rollouts");
      mode_names.push_back(rollout::to_string(modes.back()));
    }
    const auto files = scenario_files(a.data);
    for (const auto& f : files) {
      const auto gt = scene::load_scenario(f);
      std::size_t longest = 0;
      for (double h : horizons_s) longest = std::max(longest, frames_for(h, gt.dt));
      for (auto mode : modes) {
        // Greedy decoding: shorter horizons are prefixes of the longest rollout.
        rollout::RolloutConfig rc;
        rc.mode = mode;
        rc.context_frames = a.context;
        rc.horizon_frames = longest;
        rc.window = a.window;
        const auto res = rollout::run_rollout(*models.world, *models.codec, gt, rc);
        for (double h : horizons_s) {
          auto r = rollout::evaluate_prediction(res.scenario, gt, frames_for(h, gt.dt));
          r.scenario = f.filename().string();
          r.mode = rollout::to_string(mode);
          rows.push_back(r);
        }
      }
    }
  }
  const fs::path path = default_out(a.out, "eval.txt");
  ensure_parent(path);
  std::ofstream rep(path);
  if (!rep) throw ConfigError("cannot write " + path.string());
  for (const auto& r : rows) rep << "row " << rollout::format_row(r) << '\n';
  for (const auto& m : mode_names) {
    for (double h : horizons_s) {
      std::vector<rollout::EvalRow> sel;
      for (const auto& r : rows) {
        if (r.mode == m && std::abs(r.horizon_s - h) < 1e-9) sel.push_back(r);
      }
      if (sel.empty()) continue;
      const auto line = "summary " + rollout::format_row(rollout::average_rows(sel));
      rep << line << '\n';
      out << line << '\n';
    }
  }
  echo_config(sub, path.string() + ".config", {{"out", path.string()}});
  return kOk;
}

// ------------------------------------------------------------------ render

struct RenderArgs {
  std::string scenario;
  std::string gt;
  std::string out;
  long frame = -1;
  bool pgm = false;
  double half_extent = 32.0;
};

int cmd_render(const RenderArgs& a, const CLI::App& sub, std::ostream& out) {
  const auto s = scene::load_scenario(a.scenario);
  std::optional<scene::Scenario> gt;
  if (!a.gt.empty()) gt = scene::load_scenario(a.gt);
  if (a.frame >= 0 && std::none_of(s.frames.begin(), s.frames.end(), [&](const auto& f) { return f.t_index == a.frame; })) {
    throw ConfigError("no frame with index " + std::to_string(a.frame));
  }
  const fs::path dir = default_out(a.out, "render");
  fs::create_directories(dir);
  RenderOptions opt;
  opt.half_extent = a.half_extent;
  raster::RasterConfig rc;
  rc.region_half_extent = a.half_extent;
  raster::validate(rc);
  std::size_t written = 0;
  for (const auto& f : s.frames) {
    if (a.frame >= 0 && f.t_index != a.frame) continue;
    const scene::SceneFrame* overlay = nullptr;
    if (gt) {
      for (const auto& g : gt->frames) {
        if (g.t_index == f.t_index) overlay = &g;
      }
    }
    char name[64];
    std::snprintf(name, sizeof name, "frame_%05lld", static_cast<long long>(f.t_index));
    std::ofstream svg(dir / (std::string(name) + ".svg"));
    svg << render_svg(f, opt, overlay);
    if (a.pgm) {
      const auto local = scene::clip_map_to_region(scene::transform_map(f.map, f.ego.pose, true), a.half_extent);
      raster::write_pgm(raster::rasterize(local, rc), dir / (std::string(name) + ".pgm"));
    }
    ++written;
  }
  echo_config(sub, dir / "render.config", {{"out", dir.string()}});
  out << "rendered " << written << " frame(s) to " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative driving-scene pipeline: data, two-stage training, rollouts, evaluation, rendering"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key=value file; command-line flags take precedence");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate synthetic scenarios");
  g->add_option("--kind", gen.kind, "straight | arc | t-intersection | crossroads | mixed")->capture_default_str();
  g->add_option("--agents", gen.agents, "Agents besides the ego")->capture_default_str();
  g->add_option("--frames", gen.frames, "Frames per scenario (10 Hz)")->capture_default_str();
  g->add_option("--seed", gen.seed, "Seed of the first scenario")->capture_default_str();
  g->add_option("--count", gen.count, "Scenarios to generate (seeds seed..seed+count-1)")->capture_default_str();
  g->add_option("--lanes", gen.lanes, "Parallel lanes")->capture_default_str();
  g->add_option("--lane-width", gen.lane_width, "Lane width, m")->capture_default_str();
  g->add_option("--radius", gen.radius, "Curve radius for arc roads, m")->capture_default_str();
  g->add_option("--speed", gen.speed, "IDM desired speed, m/s")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory (default $GPD_OUT_ROOT/data)");

  CodecArgs ca;
  auto* c = app.add_subcommand("train-codec", "Train the map codec");
  c->add_option("--data", ca.data, "Directory of .scenario files")->required();
  c->add_option("--out", ca.out, "Checkpoint path (default $GPD_OUT_ROOT/codec.ckpt)");
  c->add_option("--log", ca.log, "Loss log (default <out>.log)");
  c->add_option("--steps", ca.steps, "Total optimizer steps")->capture_default_str();
  c->add_option("--seed", ca.seed)->capture_default_str();
  c->add_option("--grid", ca.grid, "Latent grid side: 4 or 8")->capture_default_str();
  c->add_option("--batch", ca.batch)->capture_default_str();
  c->add_option("--lr", ca.lr)->capture_default_str();
  c->add_option("--codebook-lr", ca.codebook_lr)->capture_default_str();
  c->add_option("--weight-decay", ca.weight_decay)->capture_default_str();
  c->add_option("--warmup", ca.warmup)->capture_default_str();
  c->add_option("--frame-stride", ca.frame_stride, "Use every n-th frame of each scenario")->capture_default_str();
  c->add_option("--queries", ca.queries)->capture_default_str();
  c->add_option("--points", ca.points)->capture_default_str();
  c->add_option("--codebook-size", ca.codebook_size)->capture_default_str();
  c->add_option("--dead-code-steps", ca.dead_code_steps)->capture_default_str();
  c->add_option("--checkpoint-every", ca.checkpoint_every)->capture_default_str();
  c->add_flag("--resume", ca.resume, "Continue from the checkpoint at --out");

  WorldArgs wa;
  auto* w = app.add_subcommand("train-world", "Train the world model on frozen codec tokens");
  w->add_option("--data", wa.data, "Directory of .scenario files")->required();
  w->add_option("--codec", wa.codec, "Codec checkpoint");
  w->add_option("--out", wa.out, "Checkpoint path (default $GPD_OUT_ROOT/world.ckpt)");
  w->add_option("--log", wa.log, "Loss log (default <out>.log)");
  w->add_option("--steps", wa.steps)->capture_default_str();
  w->add_option("--seed", wa.seed)->capture_default_str();
  w->add_option("--dim", wa.dim)->capture_default_str();
  w->add_option("--layers", wa.layers)->capture_default_str();
  w->add_option("--heads", wa.heads)->capture_default_str();
  w->add_option("--hidden", wa.hidden, "Feed-forward width (0 = 4 * dim)")->capture_default_str();
  w->add_option("--agent-slots", wa.agent_slots, "Agent slots including the ego")->capture_default_str();
  w->add_option("--t-max", wa.t_max)->capture_default_str();
  w->add_option("--window", wa.window, "Training window in frames (0 = t-max)")->capture_default_str();
  w->add_option("--batch", wa.batch)->capture_default_str();
  w->add_option("--lr", wa.lr)->capture_default_str();
  w->add_option("--weight-decay", wa.weight_decay)->capture_default_str();
  w->add_option("--warmup", wa.warmup)->capture_default_str();
  w->add_option("--pose-noise", wa.pose_noise,
                "Std-dev of noise on input slot poses (m, and degrees for heading)")
      ->capture_default_str();
  w->add_option("--checkpoint-every", wa.checkpoint_every)->capture_default_str();
  w->add_flag("--resume", wa.resume, "Continue from the checkpoint at --out");

  RolloutArgs ra;
  auto* r = app.add_subcommand("rollout", "Autoregressive rollout of one scenario");
  r->add_option("--world", ra.world)->required();
  r->add_option("--codec", ra.codec)->required();
  r->add_option("--scenario", ra.scenario)->required();
  r->add_option("--mode", ra.mode, "sg | ts | cl | mp | cond")->capture_default_str();
  r->add_option("--gt-slots", ra.gt_slots, "cond mode: all, none, map, ego, agents or slot indices")->capture_default_str();
  r->add_option("--context", ra.context)->capture_default_str();
  r->add_option("--horizon", ra.horizon)->capture_default_str();
  r->add_option("--window", ra.window, "Model context in frames (0 = t-max)")->capture_default_str();
  r->add_option("--out", ra.out, "Result scenario (default $GPD_OUT_ROOT/rollout.scenario)");

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Metrics per scenario, mode and horizon");
  e->add_option("--world", ea.world);
  e->add_option("--codec", ea.codec);
  e->add_option("--data", ea.data, "Directory of ground-truth scenarios");
  e->add_option("--pred", ea.pred, "Predicted scenario (file mode)");
  e->add_option("--gt", ea.gt, "Ground-truth scenario (file mode)");
  e->add_option("--modes", ea.modes)->capture_default_str();
  e->add_option("--horizons", ea.horizons, "Seconds, comma separated")->capture_default_str();
  e->add_option("--context", ea.context)->capture_default_str();
  e->add_option("--window", ea.window)->capture_default_str();
  e->add_option("--out", ea.out, "Report path (default $GPD_OUT_ROOT/eval.txt)");

  RenderArgs rn;
  auto* v = app.add_subcommand("render", "SVG frames of a scenario");
  v->add_option("--scenario", rn.scenario)->required();
  v->add_option("--gt", rn.gt, "Ground truth drawn dashed underneath");
  v->add_option("--out", rn.out, "Output directory (default $GPD_OUT_ROOT/render)");
  v->add_option("--frame", rn.frame, "Only the frame with this index (-1 = all)")->capture_default_str();
  v->add_option("--half-extent", rn.half_extent)->capture_default_str();
  v->add_flag("--pgm", rn.pgm, "Also write the rasterized map canvas");

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(*sub, read_config_file(config_path));
    if (sub == g) return cmd_gen_data(gen, *sub, out);
    if (sub == c) return cmd_train_codec(ca, *sub, out);
    if (sub == w) return cmd_train_world(wa, *sub, out);
    if (sub == r) return cmd_rollout(ra, *sub, out);
    if (sub == e) return cmd_eval(ea, *sub, out);
    if (sub == v) return cmd_render(rn, *sub, out);
    return kFailure;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& ex) {
    err << "numerical error: " << ex.what() << '\n';
    return kNumericalError;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const ParseError& ex) {
    err << "parse error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& ex) {
    err << "invalid input: " << ex.what() << '\n';
    return kConfigError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kFailure;
  }
}

}  // namespace gpd::cli
