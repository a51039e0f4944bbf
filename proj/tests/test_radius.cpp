#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rumourlab/error.hpp"
#include "rumourlab/radius.hpp"

using namespace rumourlab;

namespace {

// Largest j with G(j) > u by direct scan.
std::uint64_t scan_inverse(const TailDistribution& d, double u) {
  std::uint64_t j = 0;
  while (tail(d, j + 1) > u) ++j;
  return j;
}

std::vector<TailDistribution> families() {
  return {TailDistribution::pareto(4.0),    TailDistribution::pareto(2.5),   TailDistribution::power(0.5),
          TailDistribution::power(1.5),     TailDistribution::geometric(0.5), TailDistribution::geometric(0.9),
          TailDistribution::constant(3),    TailDistribution::truncated(TailDistribution::pareto(4.0), 12)};
}

}  // namespace

TEST_CASE("tail values") {
  const auto d = TailDistribution::pareto(4.0);
  CHECK(tail(d, 0) == 1.0);
  CHECK(tail(d, 2) == 1.0);
  CHECK(tail(d, 8) == 0.5);
  CHECK(tail(TailDistribution::power(2.0), 4) == doctest::Approx(1.0 / 16));
  CHECK(tail(TailDistribution::geometric(0.5), 3) == 0.125);
  CHECK(tail(TailDistribution::constant(3), 3) == 1.0);
  CHECK(tail(TailDistribution::constant(3), 4) == 0.0);
  const auto t = TailDistribution::truncated(TailDistribution::pareto(4.0), 10);
  CHECK(tail(t, 10) == doctest::Approx(0.4));
  CHECK(tail(t, 11) == 0.0);
}

TEST_CASE("survival complement") {
  CHECK(survival_complement(TailDistribution::pareto(4.0), 0.5, 8) == 0.75);
  CHECK(survival_complement(TailDistribution::constant(1), 1.0, 2) == 1.0);
  for (const auto& d : families())
    for (std::uint64_t j : {0u, 1u, 5u, 100u}) {
      CHECK(survival_complement(d, 0.0, j) == 1.0);
      for (double p : {0.1, 0.37, 0.9}) {
        const double sum = survival_complement(d, p, j) + p * tail(d, j);
        CHECK(std::abs(sum - 1.0) <= std::numeric_limits<double>::epsilon());
      }
    }
}

TEST_CASE("monotone survival") {
  for (const auto& d : families()) {
    CHECK(tail(d, 0) == 1.0);
    for (std::uint64_t j = 0; j < 2000; ++j) CHECK_LE(tail(d, j + 1), tail(d, j));
  }
}

TEST_CASE("pareto probe matches its functional") {
  for (double alpha : {2.5, 4.0, 7.0}) {
    const auto d = TailDistribution::pareto(alpha);
    for (std::uint64_t j = static_cast<std::uint64_t>(std::ceil(alpha)); j < 5000; ++j)
      CHECK(std::abs(static_cast<double>(j) * tail(d, j) - alpha) < 1e-12);
    CHECK(tail_functionals(d).liminf_jg == ExtendedReal::finite(alpha));
  }
}

TEST_CASE("tail functionals") {
  CHECK(tail_functionals(TailDistribution::pareto(4.0)) ==
        TailFunctionals{ExtendedReal::finite(4.0), ExtendedReal::finite(4.0)});
  CHECK(tail_functionals(TailDistribution::geometric(0.5)) ==
        TailFunctionals{ExtendedReal::finite(0.0), ExtendedReal::finite(0.0)});
  CHECK(tail_functionals(TailDistribution::power(0.5)) ==
        TailFunctionals{ExtendedReal::infinity(), ExtendedReal::infinity()});
  CHECK(tail_functionals(TailDistribution::power(1.0)).limsup_jg == ExtendedReal::finite(1.0));
  CHECK(tail_functionals(TailDistribution::power(2.0)).limsup_jg == ExtendedReal::finite(0.0));
  CHECK(tail_functionals(TailDistribution::constant(5)).liminf_jg == ExtendedReal::finite(0.0));
  CHECK_THROWS_AS(tail_functionals(TailDistribution::truncated(TailDistribution::pareto(4.0), 9)), TruncatedLawError);
  CHECK(ExtendedReal::finite(1e300) < ExtendedReal::infinity());
  CHECK_FALSE(ExtendedReal::infinity() < ExtendedReal::infinity());
}

TEST_CASE("moment finiteness") {
  CHECK(moment_finite(TailDistribution::power(1.5), 1));
  CHECK_FALSE(moment_finite(TailDistribution::power(1.5), 2));
  CHECK_FALSE(moment_finite(TailDistribution::power(2.0), 2));
  CHECK(moment_finite(TailDistribution::geometric(0.9), 5));
  CHECK_FALSE(moment_finite(TailDistribution::pareto(4.0), 1));
  CHECK(moment_finite(TailDistribution::truncated(TailDistribution::power(0.5), 100), 3));
  CHECK_THROWS_AS(moment_finite(TailDistribution::power(1.5), 0), ValidationError);
}

TEST_CASE("inverse transform is the largest j with G(j) > u") {
  Rng rng(7);
  for (const auto& d : {TailDistribution::pareto(4.0), TailDistribution::power(0.5), TailDistribution::power(2.5),
                        TailDistribution::geometric(0.7), TailDistribution::constant(4),
                        TailDistribution::truncated(TailDistribution::pareto(3.0), 20)}) {
    for (int s = 0; s < 300; ++s) {
      const double u = 0.01 + 0.99 * rng.uniform();
      CHECK(radius_from_uniform(d, u) == scan_inverse(d, u));
    }
    // Exact breakpoints: G(j) == u must not count as G(j) > u.
    for (std::uint64_t j = 1; j < 20; ++j) {
      const double g = tail(d, j);
      if (g > 0.0 && g < 1.0) CHECK(radius_from_uniform(d, g) == scan_inverse(d, g));
    }
  }
  CHECK(radius_from_uniform(TailDistribution::pareto(4.0), 0.5) == 7);
  CHECK(radius_from_uniform(TailDistribution::pareto(4.0), 1e-300) == kRadiusMax);
}

TEST_CASE("sampler") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(sample_radius(TailDistribution::constant(3), rng) == 3);
  const auto capped = TailDistribution::truncated(TailDistribution::power(0.5), 1000000);
  for (int i = 0; i < 100000; ++i) CHECK_LE(sample_radius(capped, rng), 1000000u);

  const auto geo = TailDistribution::geometric(0.5);
  const int draws = 1000000;
  int at_least_three = 0;
  for (int i = 0; i < draws; ++i) at_least_three += sample_radius(geo, rng) >= 3;
  const double se = std::sqrt(0.125 * 0.875 / draws);
  CHECK(std::abs(static_cast<double>(at_least_three) / draws - 0.125) < 3 * se);
}

TEST_CASE("sampler histogram passes chi-square at 99%") {
  for (const auto& d : {TailDistribution::truncated(TailDistribution::geometric(0.5), 6),
                        TailDistribution::truncated(TailDistribution::pareto(4.0), 10),
                        TailDistribution::truncated(TailDistribution::power(0.5), 20)}) {
    const std::uint64_t bound = *d.support_bound();
    const int draws = 100000;
    std::vector<double> observed(bound + 1, 0.0), expected(bound + 1, 0.0);
    Rng rng(2024);
    for (int i = 0; i < draws; ++i) observed[sample_radius(d, rng)] += 1;
    for (std::uint64_t j = 0; j <= bound; ++j) expected[j] = draws * (tail(d, j) - tail(d, j + 1));

    // Merge cells with small expectations into their right neighbour.
    double stat = 0, eo = 0, ee = 0;
    int cells = 0;
    for (std::uint64_t j = 0; j <= bound; ++j) {
      if (expected[j] == 0.0) {
        CHECK(observed[j] == 0.0);
        continue;
      }
      eo += observed[j];
      ee += expected[j];
      if (ee >= 5.0 || j == bound) {
        stat += (eo - ee) * (eo - ee) / ee;
        ++cells;
        eo = ee = 0;
      }
    }
    REQUIRE(cells >= 2);
    const boost::math::chi_squared chi(cells - 1);
    CHECK(stat < boost::math::quantile(chi, 0.99));
  }
}

TEST_CASE("distribution strings round-trip") {
  for (const char* text : {"pareto:alpha=4", "power:beta=0.5", "geom:q=0.5", "const:r=2", "trunc:geom:q=0.5:cap=6",
                           "trunc:trunc:pareto:alpha=4:cap=9:cap=20"}) {
    const auto d = parse_distribution(text);
    CHECK(parse_distribution(to_string(d)) == d);
  }
  CHECK(parse_distribution("trunc:trunc:pareto:alpha=4:cap=9:cap=20").cap() == std::optional<std::uint64_t>{9});
  CHECK(parse_distribution("pareto:alpha=+4") == TailDistribution::pareto(4.0));
}

TEST_CASE("distribution parse errors name the bad token") {
  auto message = [](const char* text) {
    try {
      (void)parse_distribution(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("foo:x=1").find("foo") != std::string::npos);
  CHECK(message("pareto:beta=2").find("beta=2") != std::string::npos);
  CHECK(message("geom:q=abc").find("abc") != std::string::npos);
  CHECK(message("trunc:geom:q=0.5:cap=x").find("x") != std::string::npos);
  CHECK(message("geom:q=1.5") != "no error");
  CHECK(message("pareto:alpha=-1") != "no error");
  CHECK(message("const:r=1.5") != "no error");
  CHECK(message("pareto") != "no error");
}
