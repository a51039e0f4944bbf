#include "rumourlab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rumourlab/error.hpp"
#include "rumourlab/stats.hpp"

namespace rumourlab {

namespace {

constexpr int kRescaleExponent = -512;

struct OrderedSite {
  std::int64_t i;  // larger coordinate
  std::int64_t j;
};

OrderedSite ordered(const ExactQuery& q) {
  if (q.dimension == 1) return {q.site.x, q.site.x};
  return {std::max(q.site.x, q.site.y), std::min(q.site.x, q.site.y)};
}

// Accumulates log of a product of factors in [0,1], tracking exact zeros.
class LogProduct {
 public:
  void multiply(double factor, std::uint64_t power = 1) {
    if (power == 0) return;
    if (factor <= 0.0) {
      zero_ = true;
      return;
    }
    log_.add(static_cast<double>(power) * std::log(factor));
  }
  double value() const { return zero_ ? 0.0 : std::exp(log_.value()); }

 private:
  CompensatedSum log_;
  bool zero_ = false;
};

}  // namespace

void ExactQuery::validate() const {
  if (dimension != 1 && dimension != 2) throw ValidationError("dimension must be 1 or 2");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0,1]");
  if (site.x < 1) throw ValidationError("site coordinates must be >= 1");
  if (dimension == 2 && site.y < 1) throw ValidationError("site coordinates must be >= 1");
}

PoissonBinomialTail::PoissonBinomialTail(unsigned k) : k_{k}, mass_(k, 0.0) {
  if (k_ > 0) mass_[0] = 1.0;
}

void PoissonBinomialTail::add(double prob, std::uint64_t multiplicity) {
  if (k_ == 0) return;
  const double miss = 1.0 - prob;
  for (std::uint64_t m = 0; m < multiplicity; ++m) {
    for (std::size_t c = mass_.size() - 1; c > 0; --c) mass_[c] = mass_[c] * miss + mass_[c - 1] * prob;
    mass_[0] *= miss;
    renormalize();
  }
}

void PoissonBinomialTail::renormalize() {
  const double peak = *std::max_element(mass_.begin(), mass_.end());
  if (peak == 0.0) return;
  int exponent = 0;
  std::frexp(peak, &exponent);
  if (exponent > kRescaleExponent) return;
  for (double& m : mass_) m = std::ldexp(m, -exponent);
  scale_ += exponent;
}

double PoissonBinomialTail::fewer_than() const {
  if (k_ == 0) return 0.0;
  CompensatedSum total;
  for (double m : mass_) total.add(m);
  return std::min(1.0, std::ldexp(total.value(), static_cast<int>(scale_)));
}

double PoissonBinomialTail::log_fewer_than() const {
  if (k_ == 0) return -std::numeric_limits<double>::infinity();
  CompensatedSum total;
  for (double m : mass_) total.add(m);
  if (total.value() <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(total.value()) + static_cast<double>(scale_) * std::numbers::ln2;
}

double poisson_binomial_fewer_than(std::span<const double> probs, unsigned k) {
  PoissonBinomialTail tail_dp(k);
  for (double q : probs) {
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("Bernoulli probabilities must lie in [0,1]");
    tail_dp.add(q);
  }
  return tail_dp.fewer_than();
}

double uncovered_prob_1d(const ExactQuery& q) {
  q.validate();
  if (q.dimension != 1) throw ValidationError("uncovered_prob_1d needs a 1D query");
  const auto i = static_cast<std::uint64_t>(q.site.x);
  LogProduct product;
  for (std::uint64_t l = 0; l < i; ++l) product.multiply(survival_complement(q.dist, q.p, l));
  if (q.include_initiators) {
    product.multiply(1.0 - tail(q.dist, i + 1));
    product.multiply(1.0 - tail(q.dist, i));
  }
  return product.value();
}

double undercovered_prob_1d(const ExactQuery& q) {
  q.validate();
  if (q.dimension != 1) throw ValidationError("undercovered_prob_1d needs a 1D query");
  const auto i = static_cast<std::uint64_t>(q.site.x);
  PoissonBinomialTail dp(q.k);
  for (std::uint64_t l = 0; l < i; ++l) dp.add(q.p * tail(q.dist, l));
  if (q.include_initiators) {
    dp.add(tail(q.dist, i + 1));
    dp.add(tail(q.dist, i));
  }
  return dp.fewer_than();
}

double undercovered_prob_1d_closed_form(const ExactQuery& q) {
  q.validate();
  if (q.dimension != 1) throw ValidationError("closed form needs a 1D query");
  if (q.include_initiators) throw ValidationError("closed forms assume no initiators");
  if (q.k == 1) return uncovered_prob_1d(q);
  if (q.k != 2) throw ValidationError("closed form exists only for k = 1 and k = 2");

  const auto i = static_cast<std::uint64_t>(q.site.x);
  const double p = q.p;
  // Factors g_p(l), l = 1..i-1, shared by every term.
  CompensatedSum log_rest;
  std::uint64_t zeros = 0;
  std::vector<double> g(i, 1.0);
  for (std::uint64_t l = 1; l < i; ++l) {
    g[l] = survival_complement(q.dist, p, l);
    if (g[l] <= 0.0)
      ++zeros;
    else
      log_rest.add(std::log(g[l]));
  }
  const double rest = zeros > 0 ? 0.0 : std::exp(log_rest.value());
  const double none = survival_complement(q.dist, p, 0) * rest;  // no source covers i
  const double from_site_itself = p * rest;

  CompensatedSum one_other;
  for (std::uint64_t k = 1; k < i; ++k) {
    const bool zero_here = g[k] <= 0.0;
    if (zeros > (zero_here ? 1u : 0u)) continue;
    const double excluded = zero_here ? log_rest.value() : log_rest.value() - std::log(g[k]);
    one_other.add(tail(q.dist, k) * std::exp(excluded));
  }
  CompensatedSum total;
  total.add(none);
  total.add(from_site_itself);
  total.add(p * (1.0 - p) * one_other.value());
  return total.value();
}

std::uint64_t shell_multiplicity_2d(std::int64_t i, std::int64_t j, std::int64_t t) {
  if (!(i >= j && j >= 1)) throw ValidationError("shell multiplicity needs i >= j >= 1");
  if (t < 0) return 0;
  if (t <= j - 1) return static_cast<std::uint64_t>(2 * t + 1);
  if (t <= i - 1) return static_cast<std::uint64_t>(j);
  return 0;
}

double uncovered_prob_2d(const ExactQuery& q) {
  q.validate();
  if (q.dimension != 2) throw ValidationError("uncovered_prob_2d needs a 2D query");
  const auto [i, j] = ordered(q);
  LogProduct product;
  for (std::int64_t t = 0; t < i; ++t)
    product.multiply(survival_complement(q.dist, q.p, static_cast<std::uint64_t>(t)), shell_multiplicity_2d(i, j, t));
  if (q.include_initiators) {
    product.multiply(1.0 - tail(q.dist, static_cast<std::uint64_t>(i) + 1));
    product.multiply(1.0 - tail(q.dist, static_cast<std::uint64_t>(i)));
  }
  return product.value();
}

double undercovered_prob_2d_unweighted(const ExactQuery& q) {
  q.validate();
  if (q.dimension != 2 || q.k != 2) throw ValidationError("the printed 2D formula covers 2D queries with k = 2");
  if (q.include_initiators) throw ValidationError("the printed 2D formula assumes no initiators");
  const auto [i, j] = ordered(q);
  CompensatedSum ratio_sum;
  for (std::int64_t t = 0; t < i; ++t) {
    const double g = survival_complement(q.dist, q.p, static_cast<std::uint64_t>(t));
    if (g == 0.0)
      throw DivisionByZeroError("g_p(" + std::to_string(t) + ") = 0 in the printed 2D formula (p * G(t) = 1)");
    ratio_sum.add(tail(q.dist, static_cast<std::uint64_t>(t)) / g);
  }
  ExactQuery k1 = q;
  k1.k = 1;
  return uncovered_prob_2d(k1) * (1.0 + q.p * ratio_sum.value());
}

double undercovered_prob_2d_exact(const ExactQuery& q) {
  q.validate();
  if (q.dimension != 2) throw ValidationError("undercovered_prob_2d_exact needs a 2D query");
  const auto [i, j] = ordered(q);
  PoissonBinomialTail dp(q.k);
  for (std::int64_t t = 0; t < i; ++t)
    dp.add(q.p * tail(q.dist, static_cast<std::uint64_t>(t)), shell_multiplicity_2d(i, j, t));
  if (q.include_initiators) {
    dp.add(tail(q.dist, static_cast<std::uint64_t>(i) + 1));
    dp.add(tail(q.dist, static_cast<std::uint64_t>(i)));
  }
  return dp.fewer_than();
}

double undercovered_prob(const ExactQuery& q) {
  return q.dimension == 1 ? undercovered_prob_1d(q) : undercovered_prob_2d_exact(q);
}

std::uint64_t max_source_distance(const ExactQuery& q) {
  q.validate();
  const auto [i, j] = ordered(q);
  (void)j;
  // Furthest lattice source is at displacement i - 1; the initiator at -1 sits at i + 1.
  return static_cast<std::uint64_t>(q.include_initiators ? i + 1 : i - 1);
}

namespace {

struct Candidate {
  Site site;
  bool always_open;
};

// Depth-first enumeration over (closed | open with radius r) per candidate.
class Enumerator {
 public:
  Enumerator(const ExactQuery& q, const TailDistribution& law, std::uint64_t cap, std::vector<Candidate> candidates)
      : q_{q}, candidates_{std::move(candidates)} {
    radius_mass_.resize(cap + 1);
    for (std::uint64_t r = 0; r <= cap; ++r) radius_mass_[r] = tail(law, r) - tail(law, r + 1);
  }

  double run() {
    walk(0, 1.0, 0);
    return total_.value();
  }

 private:
  bool contains(const Candidate& c, std::uint64_t r) const {
    const auto reach = [r](std::int64_t lo, std::int64_t x) {
      return lo <= x && static_cast<std::uint64_t>(x - lo) <= r;
    };
    if (!reach(c.site.x, q_.site.x)) return false;
    return q_.dimension == 1 || reach(c.site.y, q_.site.y);
  }

  void walk(std::size_t depth, double weight, unsigned covers) {
    if (weight == 0.0) return;
    if (covers >= q_.k) return;  // this whole subtree is adequately covered
    if (depth == candidates_.size()) {
      total_.add(weight);
      return;
    }
    const Candidate& c = candidates_[depth];
    if (!c.always_open) walk(depth + 1, weight * (1.0 - q_.p), covers);
    const double open = c.always_open ? 1.0 : q_.p;
    for (std::uint64_t r = 0; r < radius_mass_.size(); ++r)
      walk(depth + 1, weight * open * radius_mass_[r], covers + (contains(c, r) ? 1u : 0u));
  }

  const ExactQuery& q_;
  std::vector<Candidate> candidates_;
  std::vector<double> radius_mass_;
  CompensatedSum total_;
};

}  // namespace

double enumeration_oracle(const ExactQuery& q, std::uint64_t radius_cap) {
  q.validate();
  std::vector<Candidate> candidates;
  if (q.dimension == 1) {
    for (std::int64_t s = 1; s <= q.site.x; ++s) candidates.push_back({{s, 0}, false});
    if (q.include_initiators) {
      candidates.push_back({{-1, 0}, true});
      candidates.push_back({{0, 0}, true});
    }
  } else {
    for (std::int64_t b = 1; b <= q.site.y; ++b)
      for (std::int64_t a = 1; a <= q.site.x; ++a) candidates.push_back({{a, b}, false});
    if (q.include_initiators) {
      candidates.push_back({{-1, -1}, true});
      candidates.push_back({{0, 0}, true});
    }
  }

  const double bits = static_cast<double>(candidates.size()) * std::log2(static_cast<double>(radius_cap) + 2.0);
  if (bits > 30.0)
    throw EnumerationBoundError("enumeration needs " + std::to_string(candidates.size()) + " sources x log2(cap+2) = " +
                                std::to_string(bits) + " bits > 30");

  const std::uint64_t furthest = max_source_distance(q);
  if (radius_cap < furthest && tail(q.dist, radius_cap + 1) > 0.0)
    throw LossyTruncationError("radius cap " + std::to_string(radius_cap) + " truncates a law with G(cap+1) > 0 below "
                               "the source distance " + std::to_string(furthest));

  const TailDistribution law = TailDistribution::truncated(q.dist, radius_cap);
  return Enumerator(q, law, radius_cap, std::move(candidates)).run();
}

double enumeration_oracle(const ExactQuery& q) {
  std::uint64_t cap = max_source_distance(q);
  if (const auto bound = q.dist.support_bound()) cap = std::min(cap, *bound);
  return enumeration_oracle(q, cap);
}

double SeriesDiagnostics::growth_ratio_at(std::int64_t n) const {
  if (n < i_min || 2 * n > i_max) return std::numeric_limits<double>::quiet_NaN();
  return partial_sum(2 * n) / partial_sum(n);
}

double SeriesDiagnostics::decay_exponent_over(std::int64_t lo, std::int64_t hi) const {
  lo = std::max(lo, i_min);
  hi = std::min(hi, i_max);
  if (hi - lo < 1) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> xs, ys;
  xs.reserve(static_cast<std::size_t>(hi - lo + 1));
  ys.reserve(xs.capacity());
  for (std::int64_t i = lo; i <= hi; ++i) {
    const double prob = probability(i);
    if (!(prob > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    xs.push_back(std::log(static_cast<double>(i)));
    ys.push_back(std::log(prob));
  }
  return regression_slope(xs, ys);
}

SeriesDiagnostics series_diagnostics(double p, const TailDistribution& dist, unsigned k, std::int64_t i_min,
                                     std::int64_t i_max) {
  if (!(1 <= i_min && i_min < i_max)) throw ValidationError("series range needs 1 <= iMin < iMax");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0,1]");
  SeriesDiagnostics d;
  d.i_min = i_min;
  d.i_max = i_max;
  d.probabilities.reserve(static_cast<std::size_t>(i_max - i_min + 1));
  d.partial_sums.reserve(d.probabilities.capacity());

  // Site i's candidate list is site (i-1)'s plus the source at displacement i-1.
  PoissonBinomialTail dp(k);
  CompensatedSum running;
  for (std::int64_t i = 1; i <= i_max; ++i) {
    dp.add(p * tail(dist, static_cast<std::uint64_t>(i - 1)));
    if (i < i_min) continue;
    const double prob = dp.fewer_than();
    running.add(prob);
    d.probabilities.push_back(prob);
    d.partial_sums.push_back(running.value());
  }
  d.growth_ratio = d.growth_ratio_at(i_max / 2);
  d.decay_exponent = d.decay_exponent_over(i_max / 2, i_max);
  return d;
}

}  // namespace rumourlab
