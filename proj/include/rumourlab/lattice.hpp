#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rumourlab/radius.hpp"
#include "rumourlab/rng.hpp"
#include "rumourlab/stats.hpp"

namespace rumourlab {

enum class Model { firework, reverse_firework };

std::string to_string(Model model);
Model parse_model(std::string_view text);

struct LatticeConfig {
  int dimension = 1;
  Model model = Model::firework;
  double p = 0.5;
  unsigned k = 2;  // scepticism threshold
  std::int64_t n = 100;      // reported sites per axis: 1..n
  std::int64_t cushion = 10;  // reverse model simulates n * cushion sites per axis
  bool include_initiators = false;  // always-open sources at -1 and 0 (2D: (-1,-1) and (0,0))
  TailDistribution dist = TailDistribution::pareto(4.0);
  std::uint64_t seed = 0;

  void validate() const;

  // Simulated sites per axis. Throws WindowOverflowError when the window is
  // not addressable.
  std::int64_t simulated_extent() const;

  bool operator==(const LatticeConfig&) const = default;
};

// Lattice site. 1D sites use x only (y == 0).
struct Site {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const Site&) const = default;
};

// One sampled configuration of activations X_s and radii rho_s.
//
// Sampled realizations are counter-based: X_s and rho_s are pure functions of
// (seed, s), so any site of the simulated window can be queried without
// materialising it. Explicit realizations wrap hand-built arrays (tests).
// Lattice sites are 1..extent per axis; initiator sites are -1 and 0 in 1D
// and (-1,-1), (0,0) in 2D.
class Realization {
 public:
  // Sample per config.seed.
  explicit Realization(const LatticeConfig& config);

  // Wrap explicit arrays over the simulated window, row-major with x fastest.
  // `radii` is read only at open sites.
  static Realization from_arrays(const LatticeConfig& config, std::vector<std::uint8_t> activation,
                                 std::vector<std::uint64_t> radii,
                                 std::array<std::uint64_t, 2> initiator_radii = {0, 0});

  const LatticeConfig& config() const noexcept { return config_; }
  std::int64_t extent() const noexcept { return extent_; }
  int dimension() const noexcept { return config_.dimension; }

  bool is_initiator(Site s) const noexcept;
  bool open(Site s) const;
  // Radius at an open site; nullopt at closed sites.
  std::optional<std::uint64_t> radius(Site s) const;

  // Radius at a site known to be open.
  std::uint64_t radius_unchecked(Site s) const;

  // Raw uniform driving rho at s; radius(s) >= m iff u < G(m).
  double radius_uniform(Site s) const;

  // Materialised views over the simulated lattice window (no initiators).
  std::vector<std::uint8_t> activation() const;
  std::vector<std::uint64_t> open_radii() const;  // radii of open sites in window order

  bool operator==(const Realization& other) const;

 private:
  Realization(const LatticeConfig& config, bool explicit_backing);
  std::uint64_t key(Site s) const noexcept;
  std::size_t index(Site s) const noexcept;

  LatticeConfig config_;
  std::int64_t extent_ = 0;
  CounterUniform uniform_;
  bool explicit_ = false;
  std::vector<std::uint8_t> activation_;
  std::vector<std::uint64_t> radii_;
  std::array<std::uint64_t, 2> initiator_radii_{};
};

Realization realize(const LatticeConfig& config);

enum class FieldKind {
  counts,      // number of distinct covering sources (firework)
  membership,  // 0/1 indicator of the reverse-model set for the config's k
};

// Per-site values over the reported window 1..n (per axis).
class CoverageField {
 public:
  CoverageField(int dimension, std::int64_t n, FieldKind kind);

  int dimension() const noexcept { return dimension_; }
  std::int64_t n() const noexcept { return n_; }
  FieldKind kind() const noexcept { return kind_; }

  std::uint32_t at(Site s) const { return values_[index(s)]; }
  std::uint32_t& at(Site s) { return values_[index(s)]; }
  std::span<const std::uint32_t> values() const noexcept { return values_; }

  // Threshold to compare values against for scepticism level k: k for count
  // fields, 1 for membership fields (their k is already applied).
  std::uint32_t threshold(unsigned k) const noexcept;
  bool covered(Site s, unsigned k) const { return at(s) >= threshold(k); }

  // Radii that reached past the reported window and were clipped.
  std::uint64_t clamped = 0;

 private:
  std::size_t index(Site s) const noexcept;

  int dimension_;
  std::int64_t n_;
  FieldKind kind_;
  std::vector<std::uint32_t> values_;
};

/// counts[x] = number of open sources s <= x (componentwise) with
/// x in s + [0, rho_s]^d. Requires a firework realization.
CoverageField firework_counts(const Realization& realization);

/// Indicator of the reverse set for threshold k: x is marked iff some open
/// i >= x in the simulated window has x in i + [-rho_i, 0]^d and at least k
/// other open sites inside that box. k == 0 yields the plain reverse cover.
CoverageField reverse_membership(const Realization& realization, unsigned k);

/// Dispatches on the realization's model (membership uses config.k).
CoverageField coverage_field(const Realization& realization);

/// 1D: the largest x with value < k, or nullopt when every site reaches k.
/// 2D: the smallest N0 such that every site in [N0, n]^2 reaches k, or
/// nullopt when (n, n) itself falls short.
/// A returned value only witnesses a deficit inside the finite window; it is
/// not evidence about the infinite lattice beyond n.
std::optional<std::int64_t> last_under_covered(const CoverageField& field, unsigned k);

/// Depth of the deficit in [0, n]: 1D the last under-covered site (0 if
/// none); 2D N0 - 1 (n if none).
std::int64_t under_covered_depth(const CoverageField& field, unsigned k);

/// Fraction of sites with every coordinate >= from that fall below k.
double under_covered_fraction(const CoverageField& field, unsigned k, std::int64_t from = 1);

/// Number of sites with every coordinate >= from that fall below k.
std::uint64_t under_covered_count(const CoverageField& field, unsigned k, std::int64_t from = 1);

/// 2D: fraction of diagonal sites (t, t) that reach k.
double diagonal_covered_fraction(const CoverageField& field, unsigned k);

struct SiteEstimate {
  Site site;
  std::uint64_t under_covered = 0;
  std::uint64_t trials = 0;
  double frequency = 0.0;
  Interval ci;  // 99% Wilson
};

/// Fraction of trials in which each site falls below the config's threshold.
/// Trial t uses seed derive_seed(config.seed, t); the result does not depend
/// on `workers`.
std::vector<SiteEstimate> estimate_under_coverage(const LatticeConfig& config, std::span<const Site> sites,
                                                  std::uint64_t trials, unsigned workers = 1);

// The config a given trial runs with.
LatticeConfig trial_config(const LatticeConfig& config, std::uint64_t trial);

}  // namespace rumourlab
