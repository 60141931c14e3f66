#include <doctest.h>

#include <random>

#include "gpd/metrics/map.hpp"
#include "gpd/metrics/trajectory.hpp"
#include "gpd/scene/geometry.hpp"

using namespace gpd;
using namespace gpd::metrics;
using scene::Vec2;

TEST_CASE("ade") {
  TrajPair same{{{1, 2}, {3, 4}}, {{1, 2}, {3, 4}}, {1, 1}};
  CHECK(ade(same) == 0.0);
  TrajPair p{{{0, 0}, {1, 0}}, {{0, 0}, {0, 0}}, {1, 1}};
  CHECK(ade(p) == doctest::Approx(0.5));
  // Rigid motion of both leaves it unchanged.
  const scene::Pose2D T{3, -7, 0.9};
  TrajPair q = p;
  for (auto& v : q.pred) v = scene::apply(T, v);
  for (auto& v : q.gt) v = scene::apply(T, v);
  CHECK(ade(q) == doctest::Approx(0.5));
  TrajPair bad{{{0, 0}}, {{0, 0}, {1, 1}}, {1, 1}};
  CHECK_THROWS_AS(ade(bad), MetricError);
}

TEST_CASE("fde") {
  TrajPair p{{{0, 0}, {3, 4}}, {{0, 0}, {0, 0}}, {1, 1}};
  CHECK(fde(p) == doctest::Approx(5));
  TrajPair hidden{{{0, 0}, {1, 0}, {9, 9}}, {{0, 0}, {0, 0}, {0, 0}}, {1, 1, 0}};
  CHECK(fde(hidden) == doctest::Approx(1));
  TrajPair none{{{0, 0}}, {{0, 0}}, {0}};
  CHECK_THROWS_AS(fde(none), MetricError);
}

TEST_CASE("collision rate") {
  auto box = [](std::int64_t id, double x) { return Box{id, {x, 0, 0}, 2.0, 2.0}; };
  CHECK(collision_rate({{box(0, 0), box(1, 1)}}) == 100.0);
  CHECK(collision_rate({{box(0, 0), box(1, 10)}}) == 0.0);
  CHECK(collision_rate({{box(0, 0), box(1, 2)}}) == 0.0);
  CHECK(collision_rate({{box(0, 0), box(1, 1), box(2, 20), box(3, 40)}}) == 50.0);
  // Ids counted once over time.
  CHECK(collision_rate({{box(0, 0), box(1, 10)}, {box(0, 0), box(1, 1)}}) == 100.0);
  CHECK(colliding_ids({{box(5, 0), box(1, 1), box(2, 20)}}) == std::vector<std::int64_t>{1, 5});
  CHECK(collision_rate(std::vector<std::vector<Box>>{}) == 0.0);
}

TEST_CASE("map F1") {
  CHECK(map_f1({{0, 0}}, {{0, 1}}).f1 == 1.0);
  CHECK(map_f1({{0, 0}}, {{0, 2}}).f1 == 0.0);
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {2, 0}};
  CHECK(map_f1(pts, pts).f1 == 1.0);
  CHECK(map_f1({}, pts).f1 == 0.0);
  CHECK_THROWS_AS(map_f1(pts, {}), MetricError);
  // One-to-one: two predictions near one GT point, only one counts.
  const auto r = map_f1({{0, 0}, {0, 0.1}}, {{0, 0}});
  CHECK(r.true_positives == 1);
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sample points at 1 m") {
  const auto s = sample_points({scene::Polyline({{0, 0}, {3, 0}}), scene::Polyline({{0, 1}, {0, 3}})});
  CHECK(s.size() == 7);
}

TEST_CASE("lateral L2") {
  const scene::MapLines seg{scene::Polyline({{-5, 0}, {5, 0}})};
  CHECK(lateral_l2({{0, 1}}, seg) == doctest::Approx(1));
  CHECK(lateral_l2({{6, 0}}, seg) == doctest::Approx(1));
  CHECK(lateral_l2({{-2, 0}, {3, 0}}, seg) == 0.0);
  CHECK(lateral_l2({{0, 1}, {0, -3}}, seg) == doctest::Approx(2));
}

TEST_CASE("chamfer") {
  CHECK(chamfer({{0, 0}}, {{3, 4}}) == doctest::Approx(25));
  const std::vector<Vec2> a{{0, 0}, {1, 2}};
  CHECK(chamfer(a, a) == 0.0);
  // Hand example: a->b nearest squared distances {1, 1}, b->a {1}.
  CHECK(chamfer({{0, 0}, {2, 0}}, {{1, 0}}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chamfer matches brute force") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> a(50), b(50);
    for (auto& p : a) p = {u(rng), u(rng)};
    for (auto& p : b) p = {u(rng), u(rng)};
    auto one_way = [](const std::vector<Vec2>& x, const std::vector<Vec2>& y) {
      double total = 0;
      for (auto p : x) {
        double best = 1e300;
        for (auto q : y) best = std::min(best, (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
        total += best;
      }
      return total / static_cast<double>(x.size());
    };
    CHECK(chamfer(a, b) == 0.5 * (one_way(a, b) + one_way(b, a)));
  }
}
