#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gpd/cli/commands.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace gpd;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result gpd_run(std::vector<std::string> args) {
  args.insert(args.begin(), "gpd");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("gpd_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Small models shared by the slower cases.
struct Trained {
  fs::path dir = fresh_dir("trained");
  fs::path data = dir / "data", codec = dir / "codec.ckpt", world = dir / "world.ckpt";
  Trained() {
    REQUIRE(gpd_run({"gen-data", "--kind", "mixed", "--count", "2", "--frames", "40", "--agents", "2", "--out", data}).code == 0);
    REQUIRE(gpd_run({"train-codec", "--data", data, "--out", codec, "--steps", "3", "--frame-stride", "20"}).code == 0);
    REQUIRE(gpd_run({"train-world", "--data", data, "--codec", codec, "--out", world, "--steps", "3", "--dim", "16",
                     "--layers", "1", "--heads", "2", "--t-max", "10", "--agent-slots", "4"})
                .code == 0);
  }
};

const Trained& trained() {
  static const Trained t;
  return t;
}

}  // namespace

TEST_CASE("config files") {
  const auto d = fresh_dir("config");
  {
    std::ofstream f(d / "a.cfg");
    f << "# comment\n\nagents = 3\nseed=7\n";
  }
  const auto kv = cli::read_config_file(d / "a.cfg");
  CHECK(kv.at("agents") == "3");
  CHECK(kv.at("seed") == "7");
  {
    std::ofstream f(d / "bad.cfg");
    f << "agents 3\n";
  }
  CHECK_THROWS_AS(cli::read_config_file(d / "bad.cfg"), ParseError);
}

TEST_CASE("gen-data writes deterministic files and its config") {
  const auto d = fresh_dir("gen");
  const auto r = gpd_run({"gen-data", "--kind", "arc", "--seed", "5", "--frames", "30", "--out", (d / "a").string()});
  REQUIRE(r.code == 0);
  const auto file = d / "a" / "arc_000005.scenario";
  REQUIRE(fs::exists(file));
  CHECK(scene::load_scenario(file).frames.size() == 30);
  CHECK(fs::exists(d / "a" / "gen-data.config"));
  CHECK(slurp(d / "a" / "gen-data.config").find("seed=5") != std::string::npos);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(d / "a")) n += e.path().extension() == ".scenario";
  CHECK(n == 1);
  REQUIRE(gpd_run({"gen-data", "--kind", "arc", "--seed", "5", "--frames", "30", "--out", (d / "b").string()}).code == 0);
  CHECK(slurp(file) == slurp(d / "b" / "arc_000005.scenario"));
}

TEST_CASE("invalid arguments exit 2 and write nothing") {
  const auto d = fresh_dir("invalid");
  CHECK(gpd_run({"gen-data", "--agents", "-1", "--out", (d / "x").string()}).code == cli::kConfigError);
  CHECK(gpd_run({"gen-data", "--kind", "spiral", "--out", (d / "x").string()}).code == cli::kConfigError);
  CHECK(gpd_run({"gen-data", "--no-such-flag", "--out", (d / "x").string()}).code == cli::kConfigError);
  CHECK_FALSE(fs::exists(d / "x"));
  CHECK(gpd_run({}).code == cli::kConfigError);
  CHECK(gpd_run({"train-codec", "--data", (d / "missing").string()}).code == cli::kConfigError);
  CHECK(gpd_run({"train-world", "--data", (d / "missing").string(), "--codec", (d / "none.ckpt").string()}).code ==
        cli::kConfigError);
  CHECK(gpd_run({"--help"}).code == cli::kOk);
}

TEST_CASE("command-line flags override the config file") {
  const auto d = fresh_dir("precedence");
  {
    std::ofstream f(d / "run.cfg");
    f << "kind=straight\nseed=3\nframes=25\n";
  }
  REQUIRE(gpd_run({"--config", (d / "run.cfg").string(), "gen-data", "--seed", "9", "--out", (d / "o").string()}).code == 0);
  CHECK(fs::exists(d / "o" / "straight_000009.scenario"));
  CHECK_FALSE(fs::exists(d / "o" / "straight_000003.scenario"));
  CHECK(scene::load_scenario(d / "o" / "straight_000009.scenario").frames.size() == 25);
  {
    std::ofstream f(d / "typo.cfg");
    f << "agentz=3\n";
  }
  CHECK(gpd_run({"--config", (d / "typo.cfg").string(), "gen-data", "--out", (d / "p").string()}).code == cli::kConfigError);
}

TEST_CASE("resumed codec training continues the same curve") {
  const auto d = fresh_dir("resume");
  REQUIRE(gpd_run({"gen-data", "--count", "2", "--frames", "30", "--out", (d / "data").string()}).code == 0);
  const std::vector<std::string> common{"train-codec", "--data", (d / "data").string(), "--frame-stride", "10",
                                        "--checkpoint-every", "4"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = common;
    a.insert(a.end(), extra.begin(), extra.end());
    return gpd_run(a);
  };
  REQUIRE(with({"--out", (d / "full.ckpt").string(), "--steps", "8"}).code == 0);
  REQUIRE(with({"--out", (d / "part.ckpt").string(), "--steps", "4"}).code == 0);
  REQUIRE(with({"--out", (d / "part.ckpt").string(), "--steps", "8", "--resume"}).code == 0);
  const auto full = lines_of(d / "full.ckpt.log");
  CHECK(full.size() == 8);
  CHECK(full == lines_of(d / "part.ckpt.log"));
  CHECK(slurp(d / "full.ckpt") == slurp(d / "part.ckpt"));
  CHECK(full[0].rfind("step=1 total=", 0) == 0);
}

TEST_CASE("divergence exits 3 and keeps a checkpoint") {
  const auto d = fresh_dir("nan");
  REQUIRE(gpd_run({"gen-data", "--count", "1", "--frames", "30", "--out", (d / "data").string()}).code == 0);
  const auto r = gpd_run({"train-codec", "--data", (d / "data").string(), "--out", (d / "c.ckpt").string(), "--steps",
                          "200", "--lr", "1e30", "--codebook-lr", "1e30", "--warmup", "0"});
  CHECK(r.code == cli::kNumericalError);
  CHECK(fs::exists(d / "c.ckpt"));
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("rollout, eval and render") {
  const auto& t = trained();
  const auto d = fresh_dir("pipeline");
  fs::path scenario;
  for (const auto& e : fs::directory_iterator(t.data)) {
    if (e.path().extension() == ".scenario" && (scenario.empty() || e.path() < scenario)) scenario = e.path();
  }
  const auto out = d / "r.scenario";
  REQUIRE(gpd_run({"rollout", "--world", t.world, "--codec", t.codec, "--scenario", scenario, "--context", "5",
                   "--horizon", "12", "--mode", "ts", "--out", out})
              .code == 0);
  CHECK(scene::load_scenario(out).frames.size() == 12);
  CHECK(fs::exists(d / "r.scenario.prov"));
  CHECK(gpd_run({"rollout", "--world", t.world, "--codec", t.codec, "--scenario", scenario, "--mode", "cond",
                 "--gt-slots", "bogus", "--out", d / "bad.scenario"})
            .code == cli::kConfigError);

  // File mode: one row plus one summary per horizon.
  const auto report = d / "eval.txt";
  const auto fe = gpd_run({"eval", "--pred", out, "--gt", scenario, "--horizons", "0.5,1", "--out", report});
  REQUIRE(fe.code == 0);
  std::size_t rows = 0, summaries = 0;
  for (const auto& l : lines_of(report)) {
    rows += l.rfind("row ", 0) == 0;
    summaries += l.rfind("summary ", 0) == 0;
  }
  CHECK(rows == 2);
  CHECK(summaries == 2);

  // Model mode: scenarios x modes x horizons rows.
  const auto me = gpd_run({"eval", "--world", t.world, "--codec", t.codec, "--data", t.data, "--modes", "sg,mp",
                           "--horizons", "0.5,1", "--context", "5", "--out", d / "model.txt"});
  REQUIRE(me.code == 0);
  rows = summaries = 0;
  for (const auto& l : lines_of(d / "model.txt")) {
    rows += l.rfind("row ", 0) == 0;
    summaries += l.rfind("summary ", 0) == 0;
  }
  CHECK(rows == 2 * 2 * 2);
  CHECK(summaries == 2 * 2);
  CHECK(me.out.find("summary") != std::string::npos);
  CHECK(gpd_run({"eval", "--world", t.world, "--codec", t.codec, "--data", t.data, "--modes", "cond", "--out",
                 d / "x.txt"})
            .code == cli::kConfigError);

  REQUIRE(gpd_run({"render", "--scenario", out, "--gt", scenario, "--frame", "8", "--pgm", "--out", d / "img"}).code == 0);
  CHECK(fs::exists(d / "img" / "frame_00008.svg"));
  CHECK(fs::exists(d / "img" / "frame_00008.pgm"));
  CHECK_FALSE(fs::exists(d / "img" / "frame_00009.svg"));
}

TEST_CASE("render of an empty frame") {
  const auto d = fresh_dir("empty");
  scene::Scenario s;
  s.frames.resize(1);
  scene::save_scenario(s, d / "empty.scenario");
  REQUIRE(gpd_run({"render", "--scenario", d / "empty.scenario", "--pgm", "--out", d / "img"}).code == 0);
  const auto svg = slurp(d / "img" / "frame_00000.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") == std::string::npos);
  const auto pgm = slurp(d / "img" / "frame_00000.pgm");
  REQUIRE(pgm.rfind("P5", 0) == 0);
}
