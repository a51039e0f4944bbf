#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <variant>
#include <vector>

#include "rumourlab/rng.hpp"
#include "rumourlab/stats.hpp"

namespace rumourlab {

struct ParetoCont {
  double alpha;  // P(rho > x) = min(1, alpha / x)
  bool operator==(const ParetoCont&) const = default;
};
struct PowerCont {
  double beta;  // P(rho > x) = min(1, x^-beta)
  bool operator==(const PowerCont&) const = default;
};
struct ConstCont {
  double r;
  bool operator==(const ConstCont&) const = default;
};

using ContinuousRadiusLaw = std::variant<ParetoCont, PowerCont, ConstCont>;

// Same grammar as the lattice laws for the shared families:
// pareto:alpha=<float> | power:beta=<float> | const:r=<float>
ContinuousRadiusLaw parse_continuous_law(std::string_view text);
std::string to_string(const ContinuousRadiusLaw& law);

/// Inverse transform of the continuous survival function, u in (0,1).
double radius_from_uniform(const ContinuousRadiusLaw& law, double u);

struct ContinuumConfig {
  int dimension = 1;
  double lambda = 1.0;    // Poisson intensity
  double window_t = 100;  // observation extent per axis
  ContinuousRadiusLaw law = ParetoCont{4.0};
  unsigned k = 2;
  double resolution = 1.0;  // 2D pixel side
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ContinuumConfig&) const = default;
};

struct Point {
  double x = 0;
  double y = 0;  // unused in 1D
  double radius = 0;
};

struct PointSet {
  int dimension = 1;
  std::vector<Point> points;
};

/// Poisson(lambda * T^d) points, uniform in [0,T]^d, i.i.d. radii.
PointSet sample_ppp(const ContinuumConfig& config);

/// Supremum of {x in [0,T] : fewer than k intervals [x_i, x_i + rho_i) cover x},
/// or nullopt when every point of [0,T] is covered k times.
std::optional<double> k_cover_last_gap_1d(const PointSet& points, unsigned k, double t);

/// Total length of {x in [0,T] : coverage < k} from the exact sweep.
double k_cover_deficient_length_1d(const PointSet& points, unsigned k, double t);

/// Number of maximal deficient segments in [0,T].
std::size_t k_cover_deficient_segments_1d(const PointSet& points, unsigned k, double t);

/// Deficient length from a pixel raster (pixel centres tested against the
/// half-open intervals); used to cross-check the sweep.
double k_cover_deficient_length_1d_raster(const PointSet& points, unsigned k, double t, double resolution);

struct Deficit2D {
  double fraction = 1.0;                   // pixels with coverage < k
  std::optional<std::array<double, 2>> witness;  // centre of the furthest deficient pixel
  std::uint64_t clamped = 0;               // squares clipped at the window edge
};

/// Rasterises squares [x, x+rho)^2 on a ceil(T/resolution)^2 grid; a pixel
/// counts as covered by a square containing its centre. Discretisation bias
/// is O(resolution * perimeter density).
Deficit2D k_cover_deficit_2d(const PointSet& points, unsigned k, double t, double resolution);

struct LambdaSummary {
  double lambda = 0;
  MeanSummary statistic;  // 1D: last gap / T (0 if none); 2D: deficit fraction
};

/// Runs `trials` realizations per lambda with seeds derive_seed(seed, grid
/// index * trials + trial). No coupling across lambdas.
std::vector<LambdaSummary> scan_lambda(const ContinuumConfig& base, std::span<const double> lambdas,
                                       std::uint64_t trials, unsigned workers = 1);

/// Per-trial statistic used by scan_lambda.
double continuum_statistic(const ContinuumConfig& config);

}  // namespace rumourlab
