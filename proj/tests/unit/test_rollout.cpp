#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "gpd/rollout/evaluate.hpp"
#include "gpd/rollout/provenance_io.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/scenario_io.hpp"

using namespace gpd;
using namespace gpd::rollout;

namespace {

struct Models {
  codec::CodecModel<float> codec{testing::small_codec_config(), 1};
  std::unique_ptr<world::WorldModel<float>> world;
  Models() {
    world::WorldConfig cfg;
    cfg.dim = 16;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.hidden = 32;
    cfg.codebook_size = codec.config().codebook_size;
    cfg.code_dim = codec.config().latent_dim;
    cfg.layout.t_max = 12;
    world = std::make_unique<world::WorldModel<float>>(cfg, codec.codebook().value, 2);
  }
};

const Models& models() {
  static const Models m;
  return m;
}

}  // namespace

TEST_CASE("substitution rules") {
  world::SceneLayout L;
  const std::size_t ego = L.n_map;
  CHECK_FALSE(substitutes(TaskMode::SceneGeneration, L, 0));
  CHECK_FALSE(substitutes(TaskMode::SceneGeneration, L, ego));
  CHECK(substitutes(TaskMode::TrafficSimulation, L, 3));
  CHECK_FALSE(substitutes(TaskMode::TrafficSimulation, L, ego));
  CHECK_FALSE(substitutes(TaskMode::TrafficSimulation, L, ego + 1));
  CHECK(substitutes(TaskMode::ClosedLoop, L, ego));
  CHECK_FALSE(substitutes(TaskMode::ClosedLoop, L, ego + 2));
  CHECK(substitutes(TaskMode::MotionPlanning, L, ego + 2));
  CHECK_FALSE(substitutes(TaskMode::MotionPlanning, L, ego));
}

TEST_CASE("mode names") {
  CHECK(parse_task_mode("sg") == TaskMode::SceneGeneration);
  CHECK(parse_task_mode("ts") == TaskMode::TrafficSimulation);
  CHECK(parse_task_mode("cl") == TaskMode::ClosedLoop);
  CHECK(parse_task_mode("mp") == TaskMode::MotionPlanning);
  CHECK(parse_task_mode("cond") == TaskMode::Conditional);
  for (auto m : {TaskMode::SceneGeneration, TaskMode::TrafficSimulation, TaskMode::ClosedLoop, TaskMode::MotionPlanning,
                 TaskMode::Conditional}) {
    CHECK(parse_task_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_task_mode("fly"), ConfigError);
}

TEST_CASE("pose chaining") {
  const scene::Pose2D start{3, 4, 0.5};
  const auto still = chain_poses(start, std::vector<scene::Pose2D>(5));
  REQUIRE(still.size() == 6);
  for (const auto& p : still) CHECK(p == start);

  const auto line = chain_poses({}, std::vector<scene::Pose2D>(4, {1, 0, 0}));
  for (std::size_t i = 0; i < line.size(); ++i) {
    CHECK(line[i].x == doctest::Approx(static_cast<double>(i)));
    CHECK(line[i].y == 0.0);
  }

  // Deltas recovered from a global path chain back onto it.
  std::vector<scene::Pose2D> path, deltas;
  for (int i = 0; i < 50; ++i) path.push_back({100 + 3 * std::cos(0.1 * i), -20 + 5 * std::sin(0.07 * i), 0.03 * i - 1});
  for (std::size_t i = 1; i < path.size(); ++i) deltas.push_back(scene::relative(path[i - 1], path[i]));
  const auto back = chain_poses(path[0], deltas);
  for (std::size_t i = 0; i < path.size(); ++i) {
    CHECK(std::abs(back[i].x - path[i].x) < 1e-6);
    CHECK(std::abs(back[i].y - path[i].y) < 1e-6);
    CHECK(std::abs(scene::normalize_angle(back[i].heading - path[i].heading)) < 1e-6);
  }
}

TEST_CASE("conditional rollout with every slot from ground truth reproduces it") {
  const auto& m = models();
  const auto gt = testing::scenario(11, 30, 4);
  RolloutConfig rc;
  rc.context_frames = 10;
  rc.horizon_frames = 20;
  rc.mode = TaskMode::Conditional;
  rc.predicate = [](std::size_t, std::size_t) { return true; };
  const auto res = run_rollout(*m.world, m.codec, gt, rc);
  REQUIRE(res.scenario.frames.size() == 20);
  std::ostringstream a, b;
  scene::Scenario tail = gt;
  tail.frames.erase(tail.frames.begin(), tail.frames.begin() + 10);
  scene::write_scenario(a, res.scenario);
  scene::write_scenario(b, tail);
  CHECK(a.str() == b.str());

  // Token records equal a direct tokenization of the ground truth.
  const auto tok = world::tokenize_scenario(gt, m.codec, m.world->config().layout);
  for (std::size_t t = 0; t < 20; ++t) {
    CHECK(res.tokens[t].map == tok.frames[10 + t].map);
    for (std::size_t s = 0; s < tok.frames[10 + t].slots.size(); ++s) {
      const auto& x = res.tokens[t].slots[s];
      const auto& y = tok.frames[10 + t].slots[s];
      CHECK(x.visible == y.visible);
      CHECK(std::abs(x.pose.x - y.pose.x) < 1e-6);
      CHECK(std::abs(x.pose.y - y.pose.y) < 1e-6);
    }
  }
  const auto row = evaluate_prediction(res.scenario, gt, 20);
  CHECK(row.ego_ade == 0.0);
  CHECK(row.agent_ade == 0.0);
}

TEST_CASE("mode provenance") {
  const auto& m = models();
  const auto& L = m.world->config().layout;
  const auto gt = testing::scenario(12, 21, 3);
  RolloutConfig rc;
  rc.context_frames = 8;
  rc.horizon_frames = 6;
  for (auto mode : {TaskMode::SceneGeneration, TaskMode::TrafficSimulation, TaskMode::ClosedLoop, TaskMode::MotionPlanning}) {
    rc.mode = mode;
    const auto res = run_rollout(*m.world, m.codec, gt, rc);
    for (const auto& row : res.provenance) {
      REQUIRE(row.size() == L.tokens_per_frame());
      for (std::size_t s = 0; s < row.size(); ++s) CHECK((row[s] == Source::GroundTruth) == substitutes(mode, L, s));
    }
  }
  rc.mode = TaskMode::MotionPlanning;
  const auto mp = run_rollout(*m.world, m.codec, gt, rc);
  for (const auto& row : mp.provenance) {
    std::size_t predicted = 0;
    for (auto s : row) predicted += s == Source::Predicted;
    CHECK(predicted == 1);
    CHECK(row[L.n_map] == Source::Predicted);
  }
  for (std::size_t t = 0; t < mp.scenario.frames.size(); ++t) CHECK(mp.scenario.frames[t].agents == gt.frames[8 + t].agents);
  rc.mode = TaskMode::ClosedLoop;
  const auto cl = run_rollout(*m.world, m.codec, gt, rc);
  for (std::size_t t = 0; t < cl.scenario.frames.size(); ++t) CHECK(cl.scenario.frames[t].ego == gt.frames[8 + t].ego);
}

TEST_CASE("scene generation is deterministic and may run past the ground truth") {
  const auto& m = models();
  const auto gt = testing::scenario(13, 21, 3);
  RolloutConfig rc;
  rc.context_frames = 6;
  rc.horizon_frames = 20;
  const auto a = run_rollout(*m.world, m.codec, gt, rc);
  const auto b = run_rollout(*m.world, m.codec, gt, rc);
  std::ostringstream sa, sb;
  scene::write_scenario(sa, a.scenario);
  scene::write_scenario(sb, b.scenario);
  CHECK(sa.str() == sb.str());
  CHECK(a.tokens.size() == 20);
  for (std::size_t t = 0; t < a.tokens.size(); ++t) CHECK(a.tokens[t] == b.tokens[t]);
  CHECK(a.scenario.frames.back().t_index == gt.frames[5].t_index + 20);

  rc.mode = TaskMode::TrafficSimulation;
  CHECK_THROWS_AS(run_rollout(*m.world, m.codec, gt, rc), ConfigError);
  rc.context_frames = 0;
  CHECK_THROWS_AS(run_rollout(*m.world, m.codec, gt, rc), ConfigError);
}

TEST_CASE("provenance files round trip") {
  const auto& m = models();
  const auto gt = testing::scenario(14, 21, 3);
  RolloutConfig rc;
  rc.context_frames = 6;
  rc.horizon_frames = 10;
  rc.mode = TaskMode::TrafficSimulation;
  const auto res = run_rollout(*m.world, m.codec, gt, rc);
  const auto p = provenance_of(res, m.world->config().layout);
  std::stringstream ss;
  write_provenance(ss, p);
  CHECK(ss.str().rfind("GPD-PROVENANCE v1 mode=", 0) == 0);
  CHECK(read_provenance(ss) == p);

  std::istringstream bad("GPD-PROVENANCE v1 mode=sg n_map=1 n_agent=1 frames=1\n0\tX\tP\t\nend\n");
  CHECK_THROWS_AS(read_provenance(bad), ParseError);
  std::istringstream truncated("GPD-PROVENANCE v1 mode=sg n_map=1 n_agent=1 frames=2\n0\tG\tP\t\n");
  CHECK_THROWS_AS(read_provenance(truncated), ParseError);
}

TEST_CASE("evaluation against itself") {
  const auto gt = testing::scenario(15, 40, 4, synth::RoadKind::Arc);
  const auto row = evaluate_prediction(gt, gt, 30);
  CHECK(row.frames == 30);
  CHECK(row.ego_ade == 0.0);
  CHECK(row.ego_fde == 0.0);
  CHECK(row.agent_ade == 0.0);
  CHECK(row.agent_fde == 0.0);
  CHECK(row.collision_rate == 0.0);
  CHECK(row.map_f1 == 1.0);
  CHECK(row.map_chamfer == 0.0);
  CHECK(row.map_frames == 3);

  // A constant 1 m ego offset shows up in ego ADE and FDE only.
  auto shifted = gt;
  for (auto& f : shifted.frames) f.ego.pose.y += 1.0;
  const auto s = evaluate_prediction(shifted, gt, 30);
  CHECK(s.ego_ade == doctest::Approx(1.0));
  CHECK(s.ego_fde == doctest::Approx(1.0));
  CHECK(s.agent_ade == 0.0);

  auto misaligned = gt;
  for (auto& f : misaligned.frames) f.t_index += 1000;
  CHECK_THROWS_AS(evaluate_prediction(misaligned, gt, 10), ConfigError);

  const auto avg = average_rows({row, s});
  CHECK(avg.ego_ade == doctest::Approx(0.5));
  CHECK(format_row(avg).find("ego_ade=0.5") != std::string::npos);
}
