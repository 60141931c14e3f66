#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "gpd/codec/trainer.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/world/loss.hpp"
#include "gpd/world/mask.hpp"
#include "gpd/world/trainer.hpp"
#include "gradcheck.hpp"

using namespace gpd;
using namespace gpd::world;
using nn::Tensor;

namespace {

WorldConfig tiny_config(std::size_t k = 16) {
  WorldConfig cfg;
  cfg.dim = 16;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.hidden = 32;
  cfg.codebook_size = k;
  cfg.code_dim = 8;
  cfg.layout.t_max = 6;
  cfg.agent.level_dim = 8;
  return cfg;
}

Tensor<float> random_book(std::size_t k, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1, 1);
  Tensor<float> t({k, d});
  for (auto& v : t.values()) v = u(rng);
  return t;
}

}  // namespace

TEST_CASE("scene mask") {
  const auto one = build_scene_mask(1, 4);
  for (auto a : one->allowed) CHECK(a == 1);

  const auto m = build_scene_mask(2, 2);
  CHECK_FALSE((*m)(0, 2));
  for (std::size_t j = 0; j < 4; ++j) CHECK((*m)(2, j));
  CHECK((*m)(0, 1));

  const auto big = build_scene_mask(5, 7);
  REQUIRE(big->allowed.size() == 35u * 35u);
  for (std::size_t i = 0; i < 35; ++i) {
    for (std::size_t j = 0; j < 35; ++j) CHECK((*big)(i, j) == (j / 7 <= i / 7));
  }
}

TEST_CASE("agent slots and ego deltas") {
  scene::SceneFrame f;
  f.ego.pose = {10, 0, std::numbers::pi / 2};
  scene::AgentState near, far, hidden;
  near.id = 1;
  near.pose = {10, 5, std::numbers::pi / 2};
  far.id = 2;
  far.pose = {10, 50, 0};
  hidden.id = 3;
  hidden.pose = {11, 1, 0};
  hidden.visible = false;
  f.agents = {near, far, hidden};
  SceneLayout L;
  L.n_agent = 5;
  const auto s = agent_slots(f, f.ego.pose, L, 32);
  REQUIRE(s.size() == 4);
  CHECK(s[0].visible);
  CHECK(s[0].pose.x == doctest::Approx(5));
  CHECK(s[0].pose.heading == doctest::Approx(0).epsilon(1e-12));
  CHECK_FALSE(s[1].visible);
  CHECK_FALSE(s[2].visible);
  CHECK_FALSE(s[3].visible);
  L.n_agent = 3;
  CHECK_THROWS_AS(agent_slots(f, f.ego.pose, L, 32), ConfigError);

  CHECK_FALSE(ego_slot(std::nullopt, {1, 2, 3}).visible);
  const auto d = ego_slot(scene::Pose2D{0, 0, std::numbers::pi / 2}, {0, 1, std::numbers::pi / 2});
  CHECK(d.pose.x == doctest::Approx(1));
  CHECK(d.pose.y == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("tokenized scenario layout") {
  const auto cfg = testing::small_codec_config();
  codec::CodecModel<float> codec(cfg, 1);
  SceneLayout L;
  const auto s = testing::scenario(3, 25, 4);
  const auto tok = tokenize_scenario(s, codec, L);
  REQUIRE(tok.frames.size() == 25);
  std::size_t total = 0;
  for (const auto& f : tok.frames) {
    CHECK(f.map.size() == L.n_map);
    CHECK(f.slots.size() == L.n_agent);
    total += f.map.size() + f.slots.size();
    for (std::size_t a = 5; a < L.n_agent; ++a) CHECK_FALSE(f.slots[a].visible);  // padding slots
  }
  CHECK(total == 25 * L.tokens_per_frame());
  CHECK_FALSE(tok.frames[0].slots[0].visible);
  CHECK(tok.frames[1].slots[0].visible);

  // Identical frames give identical token records.
  auto still = s;
  still.frames[1].ego = still.frames[0].ego;
  still.frames[1].agents = still.frames[0].agents;
  const auto t2 = tokenize_scenario(still, codec, L);
  CHECK(t2.frames[0].map == t2.frames[1].map);
  for (std::size_t a = 1; a < L.n_agent; ++a) CHECK(t2.frames[0].slots[a] == t2.frames[1].slots[a]);

  L.n_agent = 3;
  CHECK_THROWS_AS(tokenize_scenario(s, codec, L), ConfigError);
}

TEST_CASE("forward shapes, causality, and intra-frame reach") {
  const auto cfg = tiny_config();
  WorldModel<float> model(cfg, random_book(16, 8, 1), 2);
  // Random embeddings so every slot starts distinct.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  for (auto* p : model.params().all()) {
    if (p->name == "spatial" || p->name == "temporal") {
      for (auto& v : p->value.values()) v = u(rng);
    }
  }
  const auto& L = cfg.layout;
  auto frames = testing::random_frames(L, 4, 16, 5);
  nn::Tape<float> tape;
  const auto out = model.forward(tape, frames);
  CHECK(out.map_logits.shape() == nn::Shape{4 * L.n_map, 16});
  CHECK(out.agent_out.shape() == nn::Shape{4 * L.n_agent, kAgentOutCols});

  auto edited = frames;
  edited[3].map[0] = (edited[3].map[0] + 1) % 16;
  edited[3].slots[2].pose.x += 3.0;
  edited[2].slots[4].visible = !edited[2].slots[4].visible;
  const auto out2 = model.forward(tape, edited);
  const auto& a = out.map_logits.value();
  const auto& b = out2.map_logits.value();
  for (std::size_t i = 0; i < 2 * L.n_map * 16; ++i) CHECK(a[i] == b[i]);
  for (std::size_t i = 0; i < 2 * L.n_agent * kAgentOutCols; ++i) CHECK(out.agent_out.value()[i] == out2.agent_out.value()[i]);
  // Frame 2 changed through the agent edit, including its map outputs.
  bool frame2_changed = false;
  for (std::size_t i = 2 * L.n_map * 16; i < 3 * L.n_map * 16; ++i) frame2_changed = frame2_changed || a[i] != b[i];
  CHECK(frame2_changed);

  // A change in the last slot of frame 0 reaches the first slot of frame 0.
  auto late = frames;
  late[0].slots.back() = {true, {5, 5, 1}};
  const auto out3 = model.forward(tape, late);
  bool first_changed = false;
  for (std::size_t c = 0; c < 16; ++c) first_changed = first_changed || out3.map_logits.value()(0, c) != a[c];
  CHECK(first_changed);
}

TEST_CASE("world loss hand values") {
  auto cfg = tiny_config(128);
  WorldModel<double> model(cfg, random_book(128, 8, 1).cast<double>(), 2);
  const auto& L = cfg.layout;
  auto frames = testing::random_frames(L, 2, 128, 6);
  for (auto& s : frames[1].slots) s.visible = true;
  const std::span<const FrameTokens> win(frames.data(), 1), tgt(frames.data() + 1, 1);
  nn::Tape<double> tape;

  auto agent_rows = [&](double pos_err, double vis_logit) {
    Tensor<double> t({L.n_agent, kAgentOutCols});
    for (std::size_t a = 0; a < L.n_agent; ++a) {
      const auto target = agent_target(residual_input(frames[0], a), frames[1].slots[a], cfg.agent);
      t(a, kOutX) = target[0] + pos_err;
      t(a, kOutY) = target[1] + pos_err;
      t(a, kOutHeading) = target[2];
      t(a, kOutVis) = vis_logit;
    }
    return t;
  };

  WorldModel<double>::Output uniform{tape.constant(Tensor<double>({L.n_map, 128}, 0.0)),
                                     tape.constant(agent_rows(0.5, 40.0))};
  const auto u = world_loss(model, uniform, win, tgt);
  CHECK(u.map_ce == doctest::Approx(std::log(128.0)));
  CHECK(u.map_ce == doctest::Approx(4.852).epsilon(1e-3));
  // Two of three regression columns carry a 0.5 m error: 0.5 * 0.25 each.
  CHECK(u.agent_l1 == doctest::Approx(0.125 * 2 / 3));
  CHECK(u.position_l1 == doctest::Approx(0.125));

  Tensor<double> perfect_logits({L.n_map, 128}, -40.0);
  for (std::size_t k = 0; k < L.n_map; ++k) perfect_logits(k, frames[1].map[k]) = 40.0;
  WorldModel<double>::Output perfect{tape.constant(perfect_logits), tape.constant(agent_rows(0.0, 40.0))};
  const auto p = world_loss(model, perfect, win, tgt);
  CHECK(p.total.value()[0] < 1e-12);
  CHECK(p.map_correct == L.n_map);
}

TEST_CASE("world loss gradient") {
  const auto t0 = std::chrono::steady_clock::now();
  std::string worst;
  const double err = testing::world_loss_gradient_error(7, &worst);
  INFO("worst parameter: " << worst);
  CHECK(err < 1e-4);
  MESSAGE("world loss gradient check took "
          << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s");
}

TEST_CASE("greedy prediction") {
  const auto cfg = tiny_config();
  WorldModel<float> model(cfg, random_book(16, 8, 1), 4);
  auto frames = testing::random_frames(cfg.layout, 3, 16, 8);
  const auto a = predict_next<float>(model, frames);
  const auto b = predict_next<float>(model, frames);
  CHECK(a == b);
  CHECK(a.map.size() == cfg.layout.n_map);
  CHECK(a.slots.size() == cfg.layout.n_agent);
  frames.push_back(a);
  const auto c = predict_next<float>(model, frames);
  CHECK(c.map.size() == cfg.layout.n_map);
}

TEST_CASE("residual decoding inverts the regression target") {
  agent::AgentTokConfig cfg;
  const agent::SlotState in{true, {3.456, -7.891, 0.4}};
  const agent::SlotState target{true, {4.0, -7.5, 0.55}};
  const auto t = agent_target(in, target, cfg);
  CHECK(t[2] == doctest::Approx(0.55 * 180 / std::numbers::pi - 22.0));  // base heading quantized to 22 deg
  const double row[] = {t[0], t[1], t[2], 5.0};
  const auto out = decode_agent(in, row, cfg);
  CHECK(out.visible);
  CHECK(out.pose.x == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(out.pose.y == doctest::Approx(-7.5).epsilon(1e-12));
  CHECK(out.pose.heading == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(residual_base({false, {9, 9, 9}}, cfg) == scene::Pose2D{});
}

TEST_CASE("training keeps the codec frozen and is deterministic") {
  const auto ccfg = testing::small_codec_config();
  codec::CodecModel<float> codec(ccfg, 1);
  const auto hash = codec_hash(codec);
  WorldConfig cfg = tiny_config(ccfg.codebook_size);
  cfg.code_dim = ccfg.latent_dim;
  cfg.layout.t_max = 8;
  std::vector<TokenizedScenario> data;
  for (std::uint64_t s = 0; s < 2; ++s) data.push_back(tokenize_scenario(testing::scenario(40 + s, 22, 3), codec, cfg.layout));
  WorldTrainConfig tc;
  tc.steps = 25;
  tc.warmup = 5;
  std::vector<double> first;
  {
    WorldModel<float> m(cfg, codec.codebook().value, 3);
    WorldTrainer tr(m, data, tc);
    for (int i = 0; i < 25; ++i) first.push_back(tr.step().total);
    CHECK(first.back() < first.front());
  }
  WorldModel<float> m(cfg, codec.codebook().value, 3);
  WorldTrainer tr(m, data, tc);
  for (int i = 0; i < 10; ++i) CHECK(tr.step().total == first[static_cast<std::size_t>(i)]);
  CHECK(codec_hash(codec) == hash);

  // Resume from a mid-run checkpoint.
  const auto ck = tr.checkpoint(hash);
  WorldModel<float> m2(cfg, codec.codebook().value, 77);
  WorldTrainer tr2(m2, data, tc);
  tr2.restore(ck);
  for (int i = 10; i < 25; ++i) CHECK(tr2.step().total == first[static_cast<std::size_t>(i)]);

  const auto ev = evaluate_teacher_forced(m2, data, 8);
  CHECK(ev.map_accuracy >= 0.0);
  CHECK(ev.map_accuracy <= 1.0);
}

TEST_CASE("input pose noise is deterministic and leaves the data alone") {
  const auto ccfg = testing::small_codec_config();
  codec::CodecModel<float> codec(ccfg, 1);
  WorldConfig cfg = tiny_config(ccfg.codebook_size);
  cfg.code_dim = ccfg.latent_dim;
  cfg.layout.t_max = 8;
  std::vector<TokenizedScenario> data{tokenize_scenario(testing::scenario(41, 22, 3), codec, cfg.layout)};
  WorldTrainConfig tc;
  tc.steps = 10;
  tc.warmup = 2;
  auto run = [&](double noise) {
    tc.pose_noise = noise;
    WorldModel<float> m(cfg, codec.codebook().value, 3);
    WorldTrainer tr(m, data, tc);
    std::vector<double> totals;
    for (int i = 0; i < 10; ++i) totals.push_back(tr.step().total);
    return totals;
  };
  const auto clean = run(0.0);
  const auto noisy = run(0.2);
  CHECK(noisy == run(0.2));
  CHECK(noisy != clean);
  // the first step sees the same weights, so only the inputs differ
  CHECK(noisy[0] != clean[0]);
  CHECK(run(0.0) == clean);
}

TEST_CASE("world checkpoint binds the codec") {
  const auto ccfg = testing::small_codec_config();
  codec::CodecModel<float> codec(ccfg, 1), other(ccfg, 2);
  WorldConfig cfg = tiny_config(ccfg.codebook_size);
  cfg.code_dim = ccfg.latent_dim;
  WorldModel<float> m(cfg, codec.codebook().value, 3);
  const auto path = std::filesystem::temp_directory_path() / "gpd_world_test.ckpt";
  save_world(m, codec_hash(codec), path);
  const auto back = load_world(path, codec);
  CHECK(back->config().dim == cfg.dim);
  CHECK(back->config().layout == cfg.layout);
  auto frames = testing::random_frames(cfg.layout, 2, ccfg.codebook_size, 9);
  CHECK(predict_next<float>(*back, frames) == predict_next<float>(m, frames));
  try {
    load_world(path, other);
    FAIL("expected a codec mismatch");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(codec_hash(codec)) != std::string::npos);
    CHECK(msg.find(codec_hash(other)) != std::string::npos);
  }
  std::filesystem::remove(path);
}
