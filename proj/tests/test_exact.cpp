#include <cmath>
#include <vector>

#include "doctest.h"
#include "rumourlab/error.hpp"
#include "rumourlab/exact.hpp"

using namespace rumourlab;

namespace {

ExactQuery query(int dim, std::int64_t i, std::int64_t j, double p, unsigned k, const TailDistribution& d,
                 bool init = false) {
  ExactQuery q;
  q.dimension = dim;
  q.site = {i, j};
  q.p = p;
  q.k = k;
  q.dist = d;
  q.include_initiators = init;
  return q;
}

// Sum over the 2^n activation patterns of independent Bernoulli(probs).
double brute_fewer_than(const std::vector<double>& probs, unsigned k) {
  double total = 0;
  for (std::uint32_t mask = 0; mask < (1u << probs.size()); ++mask) {
    double w = 1;
    unsigned ones = 0;
    for (std::size_t b = 0; b < probs.size(); ++b) {
      const bool on = mask >> b & 1u;
      w *= on ? probs[b] : 1 - probs[b];
      ones += on;
    }
    if (ones < k) total += w;
  }
  return total;
}

// Constant radius r: source s reaches target t iff 0 <= t - s <= r
// componentwise. Enumerates activations of the sources that can reach t.
double const_radius_brute(int dim, std::int64_t i, std::int64_t j, std::uint64_t r, double p, unsigned k) {
  std::vector<double> probs;
  const auto rr = static_cast<std::int64_t>(r);
  for (std::int64_t sx = 1; sx <= i; ++sx)
    for (std::int64_t sy = 1; sy <= (dim == 1 ? 1 : j); ++sy)
      if (i - sx <= rr && (dim == 1 || j - sy <= rr)) probs.push_back(p);
  return brute_fewer_than(probs, k);
}

}  // namespace

TEST_CASE("poisson binomial lower tail") {
  CHECK(poisson_binomial_fewer_than({}, 1) == 1.0);
  const std::vector<double> half{0.5, 0.5};
  CHECK(poisson_binomial_fewer_than(half, 2) == 0.75);
  const std::vector<double> one{1.0};
  CHECK(poisson_binomial_fewer_than(one, 1) == 0.0);
  const std::vector<double> probs{0.1, 0.9, 0.35, 0.5, 0.02, 0.77, 0.61, 0.3, 0.44, 0.05};
  for (unsigned k = 0; k <= 11; ++k)
    CHECK(poisson_binomial_fewer_than(probs, k) == doctest::Approx(brute_fewer_than(probs, k)).epsilon(1e-13));

  PoissonBinomialTail t(2);
  t.add(0.5, 2);
  CHECK(t.fewer_than() == 0.75);
  CHECK(t.log_fewer_than() == doctest::Approx(std::log(0.75)));
}

TEST_CASE("1D uncovered examples") {
  for (const auto& d : {TailDistribution::pareto(4.0), TailDistribution::geometric(0.3), TailDistribution::constant(0)})
    CHECK(uncovered_prob_1d(query(1, 1, 0, 0.5, 1, d)) == 0.5);
  CHECK(uncovered_prob_1d(query(1, 3, 0, 0.5, 1, TailDistribution::constant(1))) == 0.25);
  CHECK(uncovered_prob_1d(query(1, 5, 0, 1.0, 1, TailDistribution::constant(10))) == 0.0);
}

TEST_CASE("1D under-coverage examples") {
  CHECK(undercovered_prob_1d(query(1, 3, 0, 0.5, 2, TailDistribution::constant(1))) == 0.75);
  for (const auto& d : {TailDistribution::pareto(4.0), TailDistribution::power(0.5)})
    CHECK(undercovered_prob_1d(query(1, 1, 0, 0.7, 2, d)) == 1.0);

  Rng rng(3);
  const std::vector<TailDistribution> dists{TailDistribution::pareto(4.0), TailDistribution::power(1.3),
                                            TailDistribution::geometric(0.8), TailDistribution::constant(3)};
  for (int s = 0; s < 20; ++s) {
    const auto q = query(1, 1 + static_cast<std::int64_t>(rng.uniform() * 60), 0, rng.uniform(), 1,
                         dists[static_cast<std::size_t>(s) % dists.size()], s % 3 == 0);
    CHECK(undercovered_prob_1d(q) == doctest::Approx(uncovered_prob_1d(q)).epsilon(1e-12));
  }
}

TEST_CASE("constant radii match direct enumeration") {
  for (std::uint64_t r : {0u, 1u, 2u, 4u})
    for (std::int64_t i = 1; i <= 9; ++i)
      for (double p : {0.2, 0.5, 0.9})
        for (unsigned k : {1u, 2u, 3u}) {
          const auto d = TailDistribution::constant(r);
          CHECK(undercovered_prob_1d(query(1, i, 0, p, k, d)) ==
                doctest::Approx(const_radius_brute(1, i, 0, r, p, k)).epsilon(1e-13));
          if (i <= 4)
            for (std::int64_t j = 1; j <= i; ++j)
              CHECK(undercovered_prob_2d_exact(query(2, i, j, p, k, d)) ==
                    doctest::Approx(const_radius_brute(2, i, j, r, p, k)).epsilon(1e-13));
        }
}

TEST_CASE("closed form agrees with the DP") {
  for (const auto& d : {TailDistribution::pareto(4.0), TailDistribution::power(0.7), TailDistribution::geometric(0.9)})
    for (double p : {0.05, 0.2, 0.5, 0.8, 1.0})
      for (std::int64_t i = 1; i <= 200; ++i)
        for (unsigned k : {1u, 2u}) {
          const auto q = query(1, i, 0, p, k, d);
          CHECK(std::abs(undercovered_prob_1d_closed_form(q) - undercovered_prob_1d(q)) < 1e-12);
        }
  CHECK_THROWS_AS(undercovered_prob_1d_closed_form(query(1, 4, 0, 0.5, 3, TailDistribution::pareto(4.0))),
                  ValidationError);
}

TEST_CASE("shell multiplicities") {
  CHECK(shell_multiplicity_2d(2, 2, 0) == 1);
  CHECK(shell_multiplicity_2d(2, 2, 1) == 3);
  CHECK(shell_multiplicity_2d(5, 2, 3) == 2);
  CHECK(shell_multiplicity_2d(5, 2, 5) == 0);
  for (std::int64_t i = 1; i <= 12; ++i)
    for (std::int64_t j = 1; j <= i; ++j) {
      std::uint64_t total = 0;
      for (std::int64_t t = 0; t < i; ++t) {
        std::uint64_t direct = 0;
        for (std::int64_t sx = 1; sx <= i; ++sx)
          for (std::int64_t sy = 1; sy <= j; ++sy) direct += std::max(i - sx, j - sy) == t;
        CHECK(shell_multiplicity_2d(i, j, t) == direct);
        total += direct;
      }
      CHECK(total == static_cast<std::uint64_t>(i * j));
    }
  CHECK_THROWS_AS(shell_multiplicity_2d(2, 3, 0), ValidationError);
}

TEST_CASE("2D probabilities") {
  const auto c1 = TailDistribution::constant(1);
  CHECK(uncovered_prob_2d(query(2, 2, 2, 0.5, 1, c1)) == 0.0625);
  CHECK(undercovered_prob_2d_exact(query(2, 2, 2, 0.5, 2, c1)) == 0.3125);
  CHECK(undercovered_prob_2d_unweighted(query(2, 2, 2, 0.5, 2, c1)) == 0.1875);
  CHECK(uncovered_prob_2d(query(2, 7, 3, 0.0, 1, TailDistribution::pareto(4.0))) == 1.0);
  CHECK(undercovered_prob_2d_unweighted(query(2, 7, 3, 0.0, 2, TailDistribution::pareto(4.0))) == 1.0);
  for (double p : {0.1, 0.5, 0.9})
    CHECK(undercovered_prob_2d_unweighted(query(2, 1, 1, p, 2, TailDistribution::pareto(4.0))) ==
          doctest::Approx(undercovered_prob_2d_exact(query(2, 1, 1, p, 2, TailDistribution::pareto(4.0)))));
  CHECK_THROWS_AS(undercovered_prob_2d_unweighted(query(2, 3, 3, 1.0, 2, TailDistribution::constant(5))),
                  DivisionByZeroError);

  Rng rng(17);
  const std::vector<TailDistribution> dists{TailDistribution::pareto(4.0), TailDistribution::power(2.5),
                                            TailDistribution::geometric(0.7)};
  for (int s = 0; s < 20; ++s) {
    const auto i = 1 + static_cast<std::int64_t>(rng.uniform() * 30);
    const auto j = 1 + static_cast<std::int64_t>(rng.uniform() * 30);
    const double p = rng.uniform();
    const auto& d = dists[static_cast<std::size_t>(s) % dists.size()];
    CHECK(uncovered_prob_2d(query(2, i, j, p, 1, d)) == doctest::Approx(uncovered_prob_2d(query(2, j, i, p, 1, d))));
    CHECK(undercovered_prob_2d_exact(query(2, i, j, p, 2, d)) ==
          doctest::Approx(undercovered_prob_2d_exact(query(2, j, i, p, 2, d))));
    CHECK(std::abs(undercovered_prob_2d_exact(query(2, i, j, p, 1, d)) - uncovered_prob_2d(query(2, i, j, p, 1, d))) <
          1e-12);
  }
}

TEST_CASE("enumeration oracle") {
  const auto c1 = TailDistribution::constant(1);
  CHECK(enumeration_oracle(query(2, 2, 2, 0.5, 2, c1)) == doctest::Approx(0.3125).epsilon(1e-15));
  CHECK(enumeration_oracle(query(1, 5, 0, 1.0, 1, TailDistribution::constant(50))) == 0.0);

  const auto q33 = query(2, 3, 3, 0.3, 2, TailDistribution::geometric(0.5));
  CHECK(std::abs(enumeration_oracle(q33) - undercovered_prob_2d_exact(q33)) < 1e-12);

  for (double p : {0.2, 0.5, 0.9})
    for (unsigned k : {1u, 2u, 3u})
      for (std::int64_t i = 1; i <= 8; ++i) {
        const auto q = query(1, i, 0, p, k, c1);
        CHECK(std::abs(enumeration_oracle(q) - undercovered_prob_1d(q)) < 1e-12);
        const auto qi = query(1, i, 0, p, k, TailDistribution::truncated(TailDistribution::geometric(0.5), 4), true);
        CHECK(std::abs(enumeration_oracle(qi) - undercovered_prob_1d(qi)) < 1e-12);
      }

  CHECK_THROWS_AS(enumeration_oracle(query(1, 40, 0, 0.5, 2, TailDistribution::pareto(4.0))), EnumerationBoundError);
  CHECK_THROWS_AS(enumeration_oracle(query(1, 6, 0, 0.5, 2, TailDistribution::pareto(4.0)), 2), LossyTruncationError);
  // A cap below the farthest source is harmless when the law cannot exceed it.
  CHECK_NOTHROW(enumeration_oracle(query(1, 6, 0, 0.5, 2, TailDistribution::constant(1)), 1));
}

TEST_CASE("monotonicity and bounds") {
  for (const auto& d : {TailDistribution::pareto(4.0), TailDistribution::power(1.5), TailDistribution::geometric(0.6)})
    for (int dim : {1, 2})
      for (std::int64_t i = 1; i <= (dim == 1 ? 60 : 12); ++i) {
        const std::int64_t j = dim == 1 ? 0 : std::max<std::int64_t>(1, i / 2);
        for (double p : {0.1, 0.4, 0.7}) {
          const double b1 = undercovered_prob(query(dim, i, j, p, 1, d));
          const double b2 = undercovered_prob(query(dim, i, j, p, 2, d));
          const double b3 = undercovered_prob(query(dim, i, j, p, 3, d));
          CHECK(b1 <= b2 + 1e-15);
          CHECK(b2 <= b3 + 1e-15);
          CHECK(b3 <= 1.0);
          CHECK(undercovered_prob(query(dim, i, j, p + 0.2, 2, d)) <= b2 + 1e-15);
          CHECK(undercovered_prob(query(dim, i + 1, j, p, 2, d)) <= b2 + 1e-15);
          if (dim == 2) CHECK(undercovered_prob(query(dim, i, j + 1, p, 2, d)) <= b2 + 1e-15);
        }
      }
}

TEST_CASE("tiny probabilities stay positive") {
  // prod_l (1 - p q^l) over many l is around 1e-250.
  const auto d = TailDistribution::geometric(0.999);
  const auto q = query(1, 5000, 0, 0.5, 1, d);
  long double log_expected = 0;
  for (std::int64_t l = 0; l < 5000; ++l) log_expected += std::log1p(-0.5L * std::pow(0.999L, l));
  REQUIRE(log_expected > -690.0L);
  CHECK(uncovered_prob_1d(q) > 0.0);
  CHECK(std::log(uncovered_prob_1d(q)) == doctest::Approx(static_cast<double>(log_expected)).epsilon(1e-10));
  CHECK(undercovered_prob_1d(q) == doctest::Approx(uncovered_prob_1d(q)).epsilon(1e-10));
  auto q3 = q;
  q3.k = 3;
  CHECK(undercovered_prob_1d(q3) > undercovered_prob_1d(q));

  const auto q2d = query(2, 40, 40, 0.5, 2, TailDistribution::pareto(4.0));
  CHECK(undercovered_prob_2d_exact(q2d) > 0.0);
  CHECK(uncovered_prob_2d(q2d) > 0.0);
}

TEST_CASE("initiators") {
  // Initiators at -1 and 0 add two always-open sources at distances i+1 and i.
  const auto d = TailDistribution::constant(2);
  CHECK(undercovered_prob_1d(query(1, 1, 0, 0.5, 2, d, true)) == 0.0);
  CHECK(undercovered_prob_1d(query(1, 2, 0, 0.5, 2, d, true)) == doctest::Approx(0.25));
  CHECK(max_source_distance(query(1, 5, 0, 0.5, 2, d, true)) == 6);
  CHECK(max_source_distance(query(1, 5, 0, 0.5, 2, d)) == 4);
}

TEST_CASE("series diagnostics") {
  // Light tails: P(site uncovered) tends to prod_{l>=0} (1 - 2^{-(l+1)}) > 0,
  // so partial sums grow linearly.
  const auto geo = series_diagnostics(0.5, TailDistribution::geometric(0.5), 1, 1, 2000);
  CHECK(geo.probability(2000) == doctest::Approx(0.28878809508660242).epsilon(1e-12));
  CHECK(geo.growth_ratio == doctest::Approx(2.0).epsilon(1e-2));
  const auto par = series_diagnostics(0.5, TailDistribution::pareto(4.0), 1, 1, 20000);
  CHECK(par.decay_exponent == doctest::Approx(-2.0).epsilon(0.05));
  CHECK(par.partial_sum(1) == par.probability(1));
  CHECK(par.partial_sum(3) == doctest::Approx(par.probability(1) + par.probability(2) + par.probability(3)));
  CHECK(std::isnan(par.growth_ratio_at(15000)));
  for (std::int64_t i = 1; i <= 50; ++i)
    CHECK(par.probability(i) == doctest::Approx(undercovered_prob_1d(query(1, i, 0, 0.5, 1, TailDistribution::pareto(4.0)))));
  CHECK_THROWS_AS(series_diagnostics(0.5, TailDistribution::pareto(4.0), 1, 5, 5), ValidationError);
}

TEST_CASE("query validation") {
  CHECK_THROWS_AS(undercovered_prob(query(1, 0, 0, 0.5, 2, TailDistribution::pareto(4.0))), ValidationError);
  CHECK_THROWS_AS(undercovered_prob(query(3, 1, 1, 0.5, 2, TailDistribution::pareto(4.0))), ValidationError);
  CHECK_THROWS_AS(undercovered_prob(query(1, 1, 0, 1.5, 2, TailDistribution::pareto(4.0))), ValidationError);
}
