#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rumourlab/lattice.hpp"
#include "rumourlab/radius.hpp"

namespace rumourlab {

// Probability that a lattice site has fewer than k distinct covering
// firework sources. Site components are >= 1; 1D queries use site.x only.
struct ExactQuery {
  int dimension = 1;
  Site site{1, 0};
  double p = 0.5;
  unsigned k = 2;
  TailDistribution dist = TailDistribution::pareto(4.0);
  bool include_initiators = false;

  void validate() const;
};

// Lower tail of a Poisson-binomial sum, built incrementally. Keeps the
// probabilities of counts 0..k-1 under a running power-of-two scale, so long
// products of small factors do not underflow.
class PoissonBinomialTail {
 public:
  explicit PoissonBinomialTail(unsigned k);

  void add(double prob, std::uint64_t multiplicity = 1);

  // P(sum < k)
  double fewer_than() const;
  // log P(sum < k); -inf when the probability is exactly 0.
  double log_fewer_than() const;

 private:
  void renormalize();

  unsigned k_;
  std::vector<double> mass_;  // mass_[c] * 2^scale_ = P(sum == c), c < k
  std::int64_t scale_ = 0;
};

/// P(sum of independent Bernoulli(probs) < k).
double poisson_binomial_fewer_than(std::span<const double> probs, unsigned k);

/// 1D, no cover at all: prod_{l=0}^{i-1} g_p(l) (times the initiator factors
/// when present), evaluated in log space.
double uncovered_prob_1d(const ExactQuery& q);

/// 1D, fewer than k covers, via the Poisson-binomial DP.
double undercovered_prob_1d(const ExactQuery& q);

/// 1D literal closed forms without initiators: the product for k = 1 and the
/// "none or exactly one source" decomposition for k = 2.
double undercovered_prob_1d_closed_form(const ExactQuery& q);

/// Number of candidate sources s <= (i, j) with max(i - s_x, j - s_y) == t.
/// Requires i >= j >= 1.
std::uint64_t shell_multiplicity_2d(std::int64_t i, std::int64_t j, std::int64_t t);

/// 2D, no cover: prod_t g_p(t)^{shell multiplicity}.
double uncovered_prob_2d(const ExactQuery& q);

/// 2D, k = 2: a_{i,j} * (1 + p * sum_{t<i} G(t) / g_p(t)) evaluated as
/// without shell multiplicities. Exposed as the paperEq11 method; it
/// undercounts the single-cover events (see undercovered_prob_2d_exact).
double undercovered_prob_2d_unweighted(const ExactQuery& q);

/// 2D, fewer than k covers, Poisson-binomial DP over shells with their
/// multiplicities.
double undercovered_prob_2d_exact(const ExactQuery& q);

/// Dispatch on q.dimension to the DP.
double undercovered_prob(const ExactQuery& q);

/// Maximum over candidate sources of the displacement they must span.
std::uint64_t max_source_distance(const ExactQuery& q);

/// Brute force: sums over every activation pattern and every radius
/// assignment under truncated(dist, radius_cap), checking coverage
/// geometrically. Throws EnumerationBoundError when
/// candidates * log2(radius_cap + 2) > 30, and LossyTruncationError when the
/// cap changes a coverage event that matters for the site.
double enumeration_oracle(const ExactQuery& q, std::uint64_t radius_cap);

/// Oracle with the smallest lossless cap.
double enumeration_oracle(const ExactQuery& q);

struct SeriesDiagnostics {
  std::int64_t i_min = 1;
  std::int64_t i_max = 1;
  std::vector<double> probabilities;  // P(B_i), i = i_min..i_max
  std::vector<double> partial_sums;   // running sums of the above
  double growth_ratio = 0.0;          // S(2n) / S(n), n = floor(i_max / 2)
  double decay_exponent = 0.0;        // slope of log P vs log i on [i_max/2, i_max]

  double probability(std::int64_t i) const { return probabilities[static_cast<std::size_t>(i - i_min)]; }
  double partial_sum(std::int64_t i) const { return partial_sums[static_cast<std::size_t>(i - i_min)]; }
  // S(2n) / S(n); NaN when n < i_min or 2n > i_max.
  double growth_ratio_at(std::int64_t n) const;
  // Regression slope over [lo, hi]; NaN if any probability there is 0.
  double decay_exponent_over(std::int64_t lo, std::int64_t hi) const;
};

/// 1D under-coverage series for i in [i_min, i_max]; requires 1 <= i_min < i_max.
SeriesDiagnostics series_diagnostics(double p, const TailDistribution& dist, unsigned k, std::int64_t i_min,
                                     std::int64_t i_max);

}  // namespace rumourlab
