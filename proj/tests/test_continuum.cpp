#include <cmath>
#include <vector>

#include "doctest.h"
#include "rumourlab/continuum.hpp"
#include "rumourlab/error.hpp"

using namespace rumourlab;

namespace {

PointSet line(std::vector<Point> pts) { return PointSet{1, std::move(pts)}; }
PointSet plane(std::vector<Point> pts) { return PointSet{2, std::move(pts)}; }

PointSet random_set(int dim, std::uint64_t seed, double lambda, double t) {
  ContinuumConfig c;
  c.dimension = dim;
  c.lambda = lambda;
  c.window_t = t;
  c.law = ParetoCont{1.5};
  c.seed = seed;
  return sample_ppp(c);
}

}  // namespace

TEST_CASE("poisson counts") {
  ContinuumConfig c;
  c.lambda = 1e-9;
  c.window_t = 1;
  double total = 0;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    c.seed = s;
    total += static_cast<double>(sample_ppp(c).points.size());
  }
  const double n = 100000;
  CHECK(std::abs(total / n - 1e-9) < 3 * std::sqrt(1e-9 / n));

  c.lambda = 2;
  c.window_t = 10;
  total = 0;
  const double m = 10000;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    c.seed = s;
    const PointSet ps = sample_ppp(c);
    total += static_cast<double>(ps.points.size());
    for (const Point& pt : ps.points) {
      REQUIRE(pt.x >= 0.0);
      REQUIRE(pt.x <= 10.0);
      REQUIRE(pt.radius >= 1.0);
    }
  }
  CHECK(std::abs(total / m - 20) < 3 * std::sqrt(20 / m));

  c.dimension = 2;
  c.lambda = 0.5;
  c.seed = 4;
  for (const Point& pt : sample_ppp(c).points) {
    CHECK(pt.y >= 0.0);
    CHECK(pt.y <= 10.0);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  ContinuumConfig c;
  c.lambda = 0.3;
  c.window_t = 500;
  c.seed = 99;
  const PointSet a = sample_ppp(c), b = sample_ppp(c);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].x == b.points[i].x);
    CHECK(a.points[i].radius == b.points[i].radius);
  }
}

TEST_CASE("radius laws") {
  CHECK(radius_from_uniform(ParetoCont{4}, 0.5) == 8.0);
  CHECK(radius_from_uniform(PowerCont{2}, 0.25) == 2.0);
  CHECK(radius_from_uniform(ConstCont{3}, 0.7) == 3.0);
  for (const char* text : {"pareto:alpha=4", "power:beta=1.5", "const:r=2.5"})
    CHECK(to_string(parse_continuous_law(text)) == text);
  CHECK_THROWS_AS(parse_continuous_law("pareto:alpha=0"), ParseError);
  CHECK_THROWS_AS(parse_continuous_law("geom:q=0.5"), ParseError);
  CHECK_THROWS_AS(parse_continuous_law("power:alpha=2"), ParseError);
}

TEST_CASE("1D last gap") {
  CHECK_FALSE(k_cover_last_gap_1d(line({{0, 0, 10}}), 1, 5).has_value());
  CHECK(k_cover_last_gap_1d(line({{0, 0, 10}}), 2, 5) == std::optional<double>{5.0});
  CHECK(k_cover_last_gap_1d(line({{0, 0, 10}, {1, 0, 10}}), 2, 5) == std::optional<double>{1.0});
  CHECK(k_cover_last_gap_1d(line({}), 1, 5) == std::optional<double>{5.0});
  // Half-open intervals: [0,2) and [2,7) leave no gap; [0,2) and [2.5,7) leave [2,2.5).
  CHECK_FALSE(k_cover_last_gap_1d(line({{0, 0, 2}, {2, 0, 5}}), 1, 5).has_value());
  CHECK(k_cover_last_gap_1d(line({{0, 0, 2}, {2.5, 0, 5}}), 1, 5) == std::optional<double>{2.5});
  // Coverage ending exactly at T leaves T itself uncovered.
  CHECK(k_cover_last_gap_1d(line({{0, 0, 5}}), 1, 5) == std::optional<double>{5.0});

  CHECK(k_cover_deficient_length_1d(line({{0, 0, 10}, {1, 0, 10}}), 2, 5) == 1.0);
  CHECK(k_cover_deficient_length_1d(line({{1, 0, 1}, {3, 0, 1}}), 1, 5) == 3.0);
  CHECK(k_cover_deficient_segments_1d(line({{1, 0, 1}, {3, 0, 1}}), 1, 5) == 3);
}

TEST_CASE("sweep and raster agree within the resolution") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const double t = 200;
    const PointSet ps = random_set(1, seed, 0.05 + 0.01 * static_cast<double>(seed), t);
    for (unsigned k : {1u, 2u}) {
      const double res = 0.5;
      const double sweep = k_cover_deficient_length_1d(ps, k, t);
      const double raster = k_cover_deficient_length_1d_raster(ps, k, t, res);
      const auto segments = static_cast<double>(k_cover_deficient_segments_1d(ps, k, t));
      CHECK(std::abs(sweep - raster) <= res * std::max(1.0, segments));
    }
  }
}

TEST_CASE("2D deficit") {
  CHECK(k_cover_deficit_2d(plane({}), 1, 4, 0.5).fraction == 1.0);
  const Deficit2D full = k_cover_deficit_2d(plane({{0, 0, 4}}), 1, 4, 0.5);
  CHECK(full.fraction == 0.0);
  CHECK_FALSE(full.witness.has_value());
  const Deficit2D two = k_cover_deficit_2d(plane({{0, 0, 1}, {0.5, 0.5, 1}}), 2, 1, 0.25);
  CHECK(two.fraction == 0.75);
  REQUIRE(two.witness.has_value());
  CHECK(two.clamped == 1);
  // One corner square leaves the far diagonal deficient.
  const Deficit2D corner = k_cover_deficit_2d(plane({{0, 0, 2}}), 1, 4, 1);
  CHECK(corner.fraction == 0.75);
  CHECK(*corner.witness == std::array<double, 2>{3.5, 3.5});
  CHECK_THROWS_AS(k_cover_deficit_2d(plane({}), 1, 1e6, 1e-3), WindowOverflowError);
  CHECK_THROWS_AS(k_cover_deficit_2d(line({}), 1, 4, 1), ValidationError);
}

TEST_CASE("deficit is monotone in k and in the point set") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PointSet ps = random_set(2, seed, 0.02, 40);
    double previous = -1;
    for (unsigned k = 1; k <= 4; ++k) {
      const double f = k_cover_deficit_2d(ps, k, 40, 0.5).fraction;
      CHECK(f >= previous);
      previous = f;
    }
    const double before = k_cover_deficit_2d(ps, 2, 40, 0.5).fraction;
    const double before_1d = k_cover_deficient_length_1d(random_set(1, seed, 0.1, 100), 2, 100);
    ps.points.push_back({13.3, 7.1, 5.5});
    CHECK(k_cover_deficit_2d(ps, 2, 40, 0.5).fraction <= before);
    PointSet l = random_set(1, seed, 0.1, 100);
    l.points.push_back({42.0, 0, 9.0});
    CHECK(k_cover_deficient_length_1d(l, 2, 100) <= before_1d);
  }
}

TEST_CASE("lambda scans") {
  ContinuumConfig c;
  c.window_t = 300;
  c.seed = 5;
  const std::vector<double> lambdas{0.05, 0.5, 2};
  const auto serial = scan_lambda(c, lambdas, 20, 1);
  const auto threaded = scan_lambda(c, lambdas, 20, 4);
  REQUIRE(serial.size() == lambdas.size());
  for (std::size_t g = 0; g < serial.size(); ++g) {
    CHECK(serial[g].lambda == lambdas[g]);
    CHECK(serial[g].statistic.mean == threaded[g].statistic.mean);
    CHECK(serial[g].statistic.count == 20);
  }
  CHECK(serial.front().statistic.mean > serial.back().statistic.mean);
  const std::vector<double> unsorted{1, 0.5};
  CHECK_THROWS_AS(scan_lambda(c, unsorted, 2), ValidationError);
  CHECK_THROWS_AS(scan_lambda(c, lambdas, 0), ValidationError);
  c.lambda = -1;
  CHECK_THROWS_AS(sample_ppp(c), ValidationError);
}
