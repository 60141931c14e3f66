#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <sstream>

#include "gpd/scene/assignment.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/geometry.hpp"
#include "gpd/scene/scenario_io.hpp"
#include "gpd/synth/scenario_gen.hpp"

using namespace gpd;
using namespace gpd::scene;

namespace {

SceneFrame frame_with_agent(Pose2D ego, Vec2 agent) {
  SceneFrame f;
  f.ego.pose = ego;
  AgentState a;
  a.id = 1;
  a.pose = {agent.x, agent.y, 0.0};
  f.agents.push_back(a);
  return f;
}

}  // namespace

TEST_CASE("normalize_angle range and idempotence") {
  CHECK(normalize_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_angle(u(rng));
    CHECK(a > -std::numbers::pi);
    CHECK(a <= std::numbers::pi);
    CHECK(normalize_angle(a) == a);
  }
}

TEST_CASE("to_ego_frame hand examples") {
  auto id = to_ego_frame(frame_with_agent({0, 0, 0}, {3, 4}));
  CHECK(id.agents[0].pose.x == doctest::Approx(3));
  CHECK(id.agents[0].pose.y == doctest::Approx(4));

  auto rot = to_ego_frame(frame_with_agent({10, 0, std::numbers::pi / 2}, {10, 5}));
  CHECK(rot.ego.pose.x == 0.0);
  CHECK(rot.ego.pose.heading == 0.0);
  CHECK(rot.agents[0].pose.x == doctest::Approx(5));
  CHECK(rot.agents[0].pose.y == doctest::Approx(0).epsilon(1e-12));
  CHECK(rot.agents[0].pose.heading == doctest::Approx(-std::numbers::pi / 2));
}

TEST_CASE("to_ego_frame / from_ego_frame round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100, 100), h(-3.1, 3.1);
  for (int i = 0; i < 1000; ++i) {
    SceneFrame f;
    f.ego.pose = {u(rng), u(rng), h(rng)};
    for (int a = 0; a < 3; ++a) {
      AgentState s;
      s.id = a;
      s.pose = {u(rng), u(rng), h(rng)};
      f.agents.push_back(s);
    }
    f.map.push_back(Polyline({{u(rng), u(rng)}, {u(rng), u(rng)}}));
    const auto back = from_ego_frame(to_ego_frame(f), f.ego.pose);
    CHECK(back.ego.pose.x == doctest::Approx(f.ego.pose.x).epsilon(1e-12));
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(back.agents[a].pose.x == doctest::Approx(f.agents[a].pose.x).epsilon(1e-12));
      CHECK(back.agents[a].pose.y == doctest::Approx(f.agents[a].pose.y).epsilon(1e-12));
      CHECK(std::abs(normalize_angle(back.agents[a].pose.heading - f.agents[a].pose.heading)) < 1e-12);
    }
    CHECK(back.map[0][1].x == doctest::Approx(f.map[0][1].x).epsilon(1e-12));
  }
}

TEST_CASE("polyline invariant") {
  CHECK_THROWS_AS(Polyline({{0, 0}}), GeometryError);
  CHECK_THROWS_AS(Polyline({{0, 0}, {0, 0}}), GeometryError);
  CHECK(Polyline({{0, 0}, {3, 4}}).length() == doctest::Approx(5));
}

TEST_CASE("resample_polyline") {
  auto a = resample_polyline(Polyline({{0, 0}, {1, 0}}), 0.5);
  REQUIRE(a.size() == 3);
  CHECK(a[1].x == doctest::Approx(0.5));
  CHECK(a[2] == Vec2{1, 0});

  auto b = resample_polyline(Polyline({{0, 0}, {0, 2}}), 2.0);
  REQUIRE(b.size() == 2);
  CHECK(b[1] == Vec2{0, 2});

  auto c = resample_polyline(Polyline({{0, 0}, {1, 0}, {1, 1}}), 0.5);
  REQUIRE(c.size() == 5);
  CHECK(c[2].x == doctest::Approx(1));
  CHECK(c[2].y == doctest::Approx(0));
  CHECK(c[3].x == doctest::Approx(1));
  CHECK(c[3].y == doctest::Approx(0.5));

  CHECK_THROWS_AS(resample_polyline(Polyline({{0, 0}, {1, 0}}), 0.0), GeometryError);
  CHECK(resample_to_count(Polyline({{0, 0}, {3, 0}}), 4)[1].x == doctest::Approx(1));
}

TEST_CASE("point_at_arclength") {
  const Polyline l({{0, 0}, {1, 0}, {1, 1}});
  const auto p = point_at_arclength(l, 1.5);
  CHECK(p.x == doctest::Approx(1));
  CHECK(p.y == doctest::Approx(0.5));
  CHECK(p.heading == doctest::Approx(std::numbers::pi / 2));
  CHECK(point_at_arclength(l, 10).y == doctest::Approx(1));
}

TEST_CASE("clip_map_to_region") {
  const Polyline inside({{0, 0}, {5, 5}});
  auto a = clip_map_to_region({inside}, 32);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == inside);

  auto b = clip_map_to_region({Polyline({{0, 0}, {100, 0}})}, 32);
  REQUIRE(b.size() == 1);
  REQUIRE(b[0].size() == 2);
  CHECK(b[0][1].x == doctest::Approx(32));

  CHECK(clip_map_to_region({Polyline({{40, 40}, {50, 40}})}, 32).empty());

  // Leaves and re-enters: two pieces.
  auto d = clip_map_to_region({Polyline({{0, 0}, {40, 0}, {40, 10}, {0, 10}})}, 32);
  CHECK(d.size() == 2);
}

TEST_CASE("segment distances") {
  CHECK(point_segment_distance({0, 1}, {-5, 0}, {5, 0}) == doctest::Approx(1));
  CHECK(point_segment_distance({6, 0}, {-5, 0}, {5, 0}) == doctest::Approx(1));
  CHECK(point_polyline_distance({2, 2}, Polyline({{0, 0}, {4, 0}, {4, 4}})) == doctest::Approx(2));
}

TEST_CASE("box overlap is strict") {
  CHECK(boxes_overlap({0, 0, 0}, 2, 2, {1, 0, 0}, 2, 2));
  CHECK_FALSE(boxes_overlap({0, 0, 0}, 2, 2, {10, 0, 0}, 2, 2));
  CHECK_FALSE(boxes_overlap({0, 0, 0}, 2, 2, {2, 0, 0}, 2, 2));
  CHECK(boxes_overlap({0, 0, 0}, 4, 1, {0, 0, std::numbers::pi / 2}, 4, 1));
  CHECK(boxes_overlap({0, 0, std::numbers::pi / 4}, 2, 2, {2.5, 0, std::numbers::pi / 4}, 2, 2));
  CHECK_FALSE(boxes_overlap({0, 0, std::numbers::pi / 4}, 2, 2, {3.0, 0, std::numbers::pi / 4}, 2, 2));
}

TEST_CASE("scenario round trip") {
  Scenario empty;
  SceneFrame f;
  f.map.push_back(Polyline({{0, 0}, {1.25, -3}}));
  empty.frames = {f};
  std::stringstream ss;
  write_scenario(ss, empty);
  CHECK(read_scenario(ss) == empty);

  synth::GenConfig g;
  g.horizon_frames = 100;
  g.n_agents = 4;
  g.seed = 5;
  const auto s = synth::gen_scenario(g);
  std::stringstream a;
  write_scenario(a, s);
  const auto text = a.str();
  const auto back = read_scenario(a);
  CHECK(back == s);
  std::stringstream b;
  write_scenario(b, back);
  CHECK(b.str() == text);

  std::stringstream cut(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_scenario(cut), ParseError);
  std::stringstream garbage("hello\n");
  CHECK_THROWS_AS(read_scenario(garbage), ParseError);
}

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("assignment 2x2 and rectangular") {
  CostMatrix c(2, 2);
  c(0, 0) = 1;
  c(0, 1) = 2;
  c(1, 0) = 2;
  c(1, 1) = 1;
  const auto a = solve_assignment(c);
  CHECK(a.row_to_col == std::vector<long>{0, 1});
  CHECK(a.total_cost == 2.0);

  CostMatrix r(3, 1);
  r(0, 0) = 5;
  r(1, 0) = 1;
  r(2, 0) = 3;
  const auto b = solve_assignment(r);
  CHECK(b.row_to_col == std::vector<long>{-1, 0, -1});
  CHECK(b.col_to_row == std::vector<long>{1});
}

TEST_CASE("assignment matches permutation enumeration") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    CostMatrix c(n, n);
    for (auto& v : c.data) v = u(rng);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    double best = 1e300;
    do {
      double t = 0;
      for (std::size_t i = 0; i < n; ++i) t += c(i, perm[i]);
      best = std::min(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(solve_assignment(c).total_cost == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("assignment rejects non-finite costs") {
  scene::CostMatrix c(2, 2, 1.0);
  c(1, 0) = std::nan("");
  CHECK_THROWS_AS(scene::solve_assignment(c), NumericalError);
}
