#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gpd/agent/quantization.hpp"
#include "gpd/agent/tokenizer.hpp"
#include "gpd/scene/error.hpp"

using namespace gpd;
using namespace gpd::agent;

using Levels = std::vector<std::int64_t>;

TEST_CASE("hand quantization examples") {
  CHECK(quantize_scalar(12.34, position_scheme()) == Levels{12, 34});
  CHECK(quantize_scalar(-3.7, position_scheme()) == Levels{-4, 30});
  CHECK(quantize_scalar(0.0, position_scheme()) == Levels{0, 0});
  CHECK(quantize_scalar(47.0, heading_scheme()) == Levels{2, 7});
  CHECK(dequantize({12, 34}, position_scheme()) == doctest::Approx(12.34).epsilon(1e-12));
  CHECK(dequantize({0, 0}, position_scheme()) == 0.0);
}

TEST_CASE("residual levels stay in range") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  const QuantScheme three{{10.0, 1.0, 0.1}};
  for (int i = 0; i < 1000; ++i) {
    const auto q = quantize_scalar(u(rng), three);
    CHECK(q[1] >= 0);
    CHECK(q[1] < 10);
    CHECK(q[2] >= 0);
    CHECK(q[2] < 10);
  }
}

TEST_CASE("round trip errors") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-50, 50), deg(0, 360);
  for (int i = 0; i < 10000; ++i) {
    const double p = pos(rng);
    CHECK(std::abs(p - dequantize(quantize_scalar(p, position_scheme()), position_scheme())) < 0.01);
    const double h = deg(rng);
    CHECK(std::abs(h - dequantize(quantize_scalar(h, heading_scheme()), heading_scheme())) < 1.0);
  }
}

TEST_CASE("scheme validation and text form") {
  const QuantScheme ratio{{1.0, 0.3}}, increasing{{0.01, 1.0}}, empty{}, fine{{5.0, 1.0, 0.25}};
  CHECK_THROWS_AS(ratio.validate(), ConfigError);
  CHECK_THROWS_AS(increasing.validate(), ConfigError);
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  CHECK_NOTHROW(fine.validate());
  const auto s = position_scheme();
  CHECK(QuantScheme::parse(s.to_string()) == s);
}

TEST_CASE("heading degrees wrap") {
  CHECK(heading_degrees(0.0) == 0.0);
  CHECK(heading_degrees(-std::numbers::pi / 2) == doctest::Approx(270.0));
  CHECK(heading_degrees(std::numbers::pi) == doctest::Approx(180.0));
  CHECK(heading_degrees(2 * std::numbers::pi) < 360.0);
}

TEST_CASE("sinusoidal embed") {
  CHECK(sinusoidal_embed(0, 4) == std::vector<double>{0, 1, 0, 1});
  const auto e = sinusoidal_embed(1, 2);
  CHECK(e[0] == doctest::Approx(0.8415).epsilon(1e-4));
  CHECK(e[1] == doctest::Approx(0.5403).epsilon(1e-4));
  for (std::int64_t q = -60; q < 60; q += 7) {
    for (double v : sinusoidal_embed(q, 32)) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK_THROWS_AS(sinusoidal_embed(1, 5), ConfigError);
}

TEST_CASE("state quantization clamps to the region") {
  AgentTokConfig cfg;
  const auto q = quantize_state({100.0, -3.7, 0.5}, cfg);
  CHECK(dequantize(q.x, cfg.position) == doctest::Approx(32.0));
  CHECK(q.y == Levels{-4, 30});
  const auto back = dequantize_state(quantize_state({1.234, 5.678, -2.0}, cfg), cfg);
  CHECK(back.x == doctest::Approx(1.23));
  CHECK(back.y == doctest::Approx(5.67));
  CHECK(std::abs(back.heading + 2.0) < std::numbers::pi / 180.0);
  CHECK(pos_vec(q, cfg).size() == cfg.pos_vec_dim());
}

TEST_CASE("agent embedder") {
  AgentTokConfig cfg;
  cfg.model_dim = 16;
  nn::ParameterSet<double> ps;
  nn::Rng rng(3);
  AgentEmbedder<double> emb(ps, "agent", cfg, rng);
  const std::vector<SlotState> states{
      {false, {1, 2, 0}},          {false, {-30, 7, 2}},         // invisible
      {true, {3.001, 4.002, 0.1}}, {true, {3.004, 4.003, 0.1}},  // same quantization
      {true, {4.001, 4.002, 0.1}},                               // x one level-1 step away
  };
  nn::Tape<double> tape;
  const auto out = emb(tape, states).value();
  REQUIRE(out.rows() == 5);
  REQUIRE(out.cols() == 16);
  auto row_equal = [&](std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < 16; ++c) {
      if (out(a, c) != out(b, c)) return false;
    }
    return true;
  };
  CHECK(row_equal(0, 1));
  CHECK(row_equal(2, 3));
  CHECK_FALSE(row_equal(2, 4));
  CHECK_FALSE(row_equal(0, 2));

  const auto qa = quantize_state(states[2].pose, cfg);
  const auto qb = quantize_state(states[4].pose, cfg);
  CHECK(qa.x[0] != qb.x[0]);
  const auto va = pos_vec(qa, cfg), vb = pos_vec(qb, cfg);
  bool first_block_differs = false;
  for (std::size_t i = 0; i < cfg.level_dim; ++i) first_block_differs = first_block_differs || va[i] != vb[i];
  CHECK(first_block_differs);
}
