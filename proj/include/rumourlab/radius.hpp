#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "rumourlab/rng.hpp"

namespace rumourlab {

// Radii are unbounded in principle; draws are clamped here so that site
// arithmetic (site + radius) can never overflow a signed 64-bit index.
inline constexpr std::uint64_t kRadiusMax = std::uint64_t{1} << 62;

struct ParetoTail {
  double alpha;  // G(j) = min(1, alpha / j)
  bool operator==(const ParetoTail&) const = default;
};

struct PowerTail {
  double beta;  // G(j) = min(1, j^-beta)
  bool operator==(const PowerTail&) const = default;
};

struct GeometricTail {
  double q;  // G(j) = q^j
  bool operator==(const GeometricTail&) const = default;
};

struct ConstantRadius {
  std::uint64_t r;
  bool operator==(const ConstantRadius&) const = default;
};

using RadiusFamily = std::variant<ParetoTail, PowerTail, GeometricTail, ConstantRadius>;

// A radius law on {0, 1, 2, ...} given by its survival function
// G(j) = P(rho >= j), optionally truncated at `cap` (G(j) = 0 for j > cap).
// Nested truncations collapse to the smallest cap.
class TailDistribution {
 public:
  TailDistribution(RadiusFamily family, std::optional<std::uint64_t> cap = std::nullopt);

  static TailDistribution pareto(double alpha) { return TailDistribution{ParetoTail{alpha}}; }
  static TailDistribution power(double beta) { return TailDistribution{PowerTail{beta}}; }
  static TailDistribution geometric(double q) { return TailDistribution{GeometricTail{q}}; }
  static TailDistribution constant(std::uint64_t r) { return TailDistribution{ConstantRadius{r}}; }
  static TailDistribution truncated(const TailDistribution& base, std::uint64_t cap);

  const RadiusFamily& family() const noexcept { return family_; }
  const std::optional<std::uint64_t>& cap() const noexcept { return cap_; }
  bool is_truncated() const noexcept { return cap_.has_value(); }

  // Finite support bound, if any (constant laws and truncations).
  std::optional<std::uint64_t> support_bound() const noexcept;

  bool operator==(const TailDistribution&) const = default;

 private:
  RadiusFamily family_;
  std::optional<std::uint64_t> cap_;
};

// Extended nonnegative real: finite value or +infinity. Comparisons are total.
struct ExtendedReal {
  double value = 0.0;
  bool infinite = false;

  static constexpr ExtendedReal finite(double v) { return {v, false}; }
  static constexpr ExtendedReal infinity() { return {0.0, true}; }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.infinite == b.infinite && (a.infinite || a.value == b.value);
  }
  friend constexpr bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite) return false;
    if (b.infinite) return true;
    return a.value < b.value;
  }
  friend constexpr bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
};

// liminf and limsup of j * G(j).
struct TailFunctionals {
  ExtendedReal liminf_jg;
  ExtendedReal limsup_jg;
  bool operator==(const TailFunctionals&) const = default;
};

/// Survival function G(j) = P(rho >= j).
double tail(const TailDistribution& dist, std::uint64_t j);

/// g_p(j) = 1 - p * G(j): probability that a candidate source at
/// displacement j fails to cover its target.
double survival_complement(const TailDistribution& dist, double p, std::uint64_t j);

/// Inverse transform on the integer survival function: the largest j with
/// G(j) > u. `u` must lie in (0,1).
std::uint64_t radius_from_uniform(const TailDistribution& dist, double u);

std::uint64_t sample_radius(const TailDistribution& dist, Rng& rng);

/// Closed-form l and L per family. Throws TruncatedLawError for truncated laws.
TailFunctionals tail_functionals(const TailDistribution& dist);

/// True iff E[rho^d] < infinity. Requires d >= 1.
bool moment_finite(const TailDistribution& dist, unsigned d);

// String grammar:
//   pareto:alpha=<float> | power:beta=<float> | geom:q=<float> | const:r=<int>
//   | trunc:<spec>:cap=<int>
TailDistribution parse_distribution(std::string_view text);
std::string to_string(const TailDistribution& dist);

}  // namespace rumourlab
