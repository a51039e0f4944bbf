#include "rumourlab/lattice.hpp"

#include <algorithm>
#include <limits>

#include "rumourlab/error.hpp"
#include "rumourlab/parallel.hpp"

namespace rumourlab {

namespace {

constexpr std::int64_t kMaxExtent1D = std::int64_t{1} << 40;
constexpr std::int64_t kMaxExtent2D = std::int64_t{1} << 28;
constexpr std::int64_t kMaxReported1D = std::int64_t{1} << 32;
constexpr std::int64_t kMaxReported2D = std::int64_t{1} << 15;

constexpr std::uint32_t kActivationStream = 0;
constexpr std::uint32_t kRadiusStream = 1;

// Last site of [s, s + r] inside 1..n (s + r cannot overflow: s < 2^40, r <= 2^62).
std::int64_t reach_right(std::int64_t s, std::uint64_t r) { return s + static_cast<std::int64_t>(r); }

}  // namespace

std::string to_string(Model model) { return model == Model::firework ? "firework" : "reverse"; }

Model parse_model(std::string_view text) {
  if (text == "firework") return Model::firework;
  if (text == "reverse") return Model::reverse_firework;
  throw ParseError("unknown model '" + std::string(text) + "' (expected firework or reverse)");
}

void LatticeConfig::validate() const {
  if (dimension != 1 && dimension != 2) throw ValidationError("dimension must be 1 or 2");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0,1]");
  if (n < 1) throw ValidationError("n must be >= 1");
  if (cushion < 1) throw ValidationError("cushion must be >= 1");
  if (n > (dimension == 1 ? kMaxReported1D : kMaxReported2D))
    throw WindowOverflowError("reported window n=" + std::to_string(n) + " is too large for dimension " +
                              std::to_string(dimension));
}

std::int64_t LatticeConfig::simulated_extent() const {
  validate();
  if (model == Model::firework) return n;
  const std::int64_t limit = dimension == 1 ? kMaxExtent1D : kMaxExtent2D;
  if (cushion > limit / n)
    throw WindowOverflowError("simulated window n*cushion = " + std::to_string(n) + "*" + std::to_string(cushion) +
                              " exceeds the addressable extent " + std::to_string(limit));
  return n * cushion;
}

Realization::Realization(const LatticeConfig& config, bool explicit_backing)
    : config_{config}, extent_{config.simulated_extent()}, uniform_{config.seed}, explicit_{explicit_backing} {}

Realization::Realization(const LatticeConfig& config) : Realization(config, false) {}

Realization Realization::from_arrays(const LatticeConfig& config, std::vector<std::uint8_t> activation,
                                     std::vector<std::uint64_t> radii,
                                     std::array<std::uint64_t, 2> initiator_radii) {
  Realization r(config, true);
  const auto cells = static_cast<std::size_t>(config.dimension == 1 ? r.extent_ : r.extent_ * r.extent_);
  if (activation.size() != cells || radii.size() != cells)
    throw ValidationError("explicit realization arrays must cover the simulated window (" + std::to_string(cells) +
                          " sites)");
  r.activation_ = std::move(activation);
  r.radii_ = std::move(radii);
  r.initiator_radii_ = initiator_radii;
  return r;
}

bool Realization::is_initiator(Site s) const noexcept {
  if (config_.dimension == 1) return s.x == -1 || s.x == 0;
  return (s.x == -1 && s.y == -1) || (s.x == 0 && s.y == 0);
}

std::uint64_t Realization::key(Site s) const noexcept {
  if (config_.dimension == 1) return static_cast<std::uint64_t>(s.x + 2);
  return (static_cast<std::uint64_t>(s.x + 2) << 32) | static_cast<std::uint64_t>(s.y + 2);
}

std::size_t Realization::index(Site s) const noexcept {
  if (config_.dimension == 1) return static_cast<std::size_t>(s.x - 1);
  return static_cast<std::size_t>((s.y - 1) * extent_ + (s.x - 1));
}

bool Realization::open(Site s) const {
  if (is_initiator(s)) return config_.include_initiators;
  if (explicit_) return activation_[index(s)] != 0;
  return uniform_(key(s), kActivationStream) < config_.p;
}

double Realization::radius_uniform(Site s) const { return uniform_(key(s), kRadiusStream); }

std::uint64_t Realization::radius_unchecked(Site s) const {
  if (explicit_) {
    if (is_initiator(s)) return initiator_radii_[s.x == -1 ? 0 : 1];
    return radii_[index(s)];
  }
  return radius_from_uniform(config_.dist, radius_uniform(s));
}

std::optional<std::uint64_t> Realization::radius(Site s) const {
  if (!open(s)) return std::nullopt;
  return radius_unchecked(s);
}

std::vector<std::uint8_t> Realization::activation() const {
  std::vector<std::uint8_t> bits;
  if (config_.dimension == 1) {
    bits.reserve(static_cast<std::size_t>(extent_));
    for (std::int64_t x = 1; x <= extent_; ++x) bits.push_back(open({x, 0}) ? 1 : 0);
  } else {
    bits.reserve(static_cast<std::size_t>(extent_ * extent_));
    for (std::int64_t y = 1; y <= extent_; ++y)
      for (std::int64_t x = 1; x <= extent_; ++x) bits.push_back(open({x, y}) ? 1 : 0);
  }
  return bits;
}

std::vector<std::uint64_t> Realization::open_radii() const {
  std::vector<std::uint64_t> out;
  auto visit = [&](Site s) {
    if (open(s)) out.push_back(radius_unchecked(s));
  };
  if (config_.dimension == 1) {
    for (std::int64_t x = 1; x <= extent_; ++x) visit({x, 0});
  } else {
    for (std::int64_t y = 1; y <= extent_; ++y)
      for (std::int64_t x = 1; x <= extent_; ++x) visit({x, y});
  }
  return out;
}

bool Realization::operator==(const Realization& other) const {
  if (!(config_ == other.config_)) return false;
  if (activation() != other.activation() || open_radii() != other.open_radii()) return false;
  for (std::int64_t i : {-1, 0}) {
    const Site s = config_.dimension == 1 ? Site{i, 0} : Site{i, i};
    if (radius(s) != other.radius(s)) return false;
  }
  return true;
}

Realization realize(const LatticeConfig& config) { return Realization(config); }

CoverageField::CoverageField(int dimension, std::int64_t n, FieldKind kind)
    : dimension_{dimension}, n_{n}, kind_{kind},
      values_(static_cast<std::size_t>(dimension == 1 ? n : n * n), 0) {}

std::size_t CoverageField::index(Site s) const noexcept {
  if (dimension_ == 1) return static_cast<std::size_t>(s.x - 1);
  return static_cast<std::size_t>((s.y - 1) * n_ + (s.x - 1));
}

std::uint32_t CoverageField::threshold(unsigned k) const noexcept {
  return kind_ == FieldKind::counts ? k : 1u;
}

namespace {

// Adds +1 on the box [x0, x1] x [y0, y1] (already clipped to 1..n) of an
// (n+2)^2 difference grid.
void add_block(std::vector<std::int32_t>& diff, std::int64_t n, std::int64_t x0, std::int64_t x1, std::int64_t y0,
               std::int64_t y1) {
  const std::int64_t stride = n + 2;
  diff[static_cast<std::size_t>(y0 * stride + x0)] += 1;
  diff[static_cast<std::size_t>(y0 * stride + x1 + 1)] -= 1;
  diff[static_cast<std::size_t>((y1 + 1) * stride + x0)] -= 1;
  diff[static_cast<std::size_t>((y1 + 1) * stride + x1 + 1)] += 1;
}

void integrate_2d(const std::vector<std::int32_t>& diff, std::int64_t n, CoverageField& field, bool indicator) {
  const std::int64_t stride = n + 2;
  std::vector<std::int64_t> row(static_cast<std::size_t>(stride), 0);  // running column sums
  for (std::int64_t y = 1; y <= n; ++y) {
    std::int64_t acc = 0;
    for (std::int64_t x = 1; x <= n; ++x) {
      acc += diff[static_cast<std::size_t>(y * stride + x)];
      row[static_cast<std::size_t>(x)] += acc;
      const std::int64_t v = row[static_cast<std::size_t>(x)];
      field.at({x, y}) = indicator ? (v > 0 ? 1u : 0u) : static_cast<std::uint32_t>(v);
    }
  }
}

}  // namespace

CoverageField firework_counts(const Realization& realization) {
  const LatticeConfig& cfg = realization.config();
  if (cfg.model != Model::firework) throw ValidationError("firework_counts needs a firework realization");
  const std::int64_t n = cfg.n;
  CoverageField field(cfg.dimension, n, FieldKind::counts);

  if (cfg.dimension == 1) {
    std::vector<std::int64_t> diff(static_cast<std::size_t>(n + 2), 0);
    auto add = [&](std::int64_t lo, std::int64_t hi) {
      diff[static_cast<std::size_t>(lo)] += 1;
      diff[static_cast<std::size_t>(hi + 1)] -= 1;
    };
    for (std::int64_t s = 1; s <= n; ++s) {
      if (!realization.open({s, 0})) continue;
      const std::int64_t reach = reach_right(s, realization.radius_unchecked({s, 0}));
      if (reach > n) ++field.clamped;
      add(s, std::min(reach, n));
    }
    if (cfg.include_initiators) {
      for (std::int64_t s : {-1, 0}) {
        const std::int64_t reach = reach_right(s, realization.radius_unchecked({s, 0}));
        if (reach < 1) continue;
        if (reach > n) ++field.clamped;
        add(1, std::min(reach, n));
      }
    }
    std::int64_t acc = 0;
    for (std::int64_t x = 1; x <= n; ++x) {
      acc += diff[static_cast<std::size_t>(x)];
      field.at({x, 0}) = static_cast<std::uint32_t>(acc);
    }
    return field;
  }

  std::vector<std::int32_t> diff(static_cast<std::size_t>((n + 2) * (n + 2)), 0);
  for (std::int64_t y = 1; y <= n; ++y) {
    for (std::int64_t x = 1; x <= n; ++x) {
      if (!realization.open({x, y})) continue;
      const std::uint64_t r = realization.radius_unchecked({x, y});
      const std::int64_t rx = reach_right(x, r);
      const std::int64_t ry = reach_right(y, r);
      if (rx > n || ry > n) ++field.clamped;
      add_block(diff, n, x, std::min(rx, n), y, std::min(ry, n));
    }
  }
  if (cfg.include_initiators) {
    for (std::int64_t s : {-1, 0}) {
      const std::int64_t reach = reach_right(s, realization.radius_unchecked({s, s}));
      if (reach < 1) continue;
      if (reach > n) ++field.clamped;
      add_block(diff, n, 1, std::min(reach, n), 1, std::min(reach, n));
    }
  }
  integrate_2d(diff, n, field, false);
  return field;
}

namespace {

CoverageField reverse_membership_1d(const Realization& realization, unsigned k) {
  const LatticeConfig& cfg = realization.config();
  const std::int64_t n = cfg.n;
  const std::int64_t extent = realization.extent();
  CoverageField field(1, n, FieldKind::membership);

  // prefix[t] = open sites among positions -1 .. t-2.
  std::vector<std::int64_t> prefix(static_cast<std::size_t>(extent + 3), 0);
  for (std::int64_t pos = -1; pos <= extent; ++pos)
    prefix[static_cast<std::size_t>(pos + 2)] =
        prefix[static_cast<std::size_t>(pos + 1)] + (realization.open({pos, 0}) ? 1 : 0);
  auto opens_between = [&](std::int64_t lo, std::int64_t hi) {  // positions lo..hi, lo >= -1
    if (hi < lo) return std::int64_t{0};
    return prefix[static_cast<std::size_t>(hi + 2)] - prefix[static_cast<std::size_t>(lo + 1)];
  };

  std::vector<std::int64_t> diff(static_cast<std::size_t>(n + 2), 0);
  const std::int64_t lowest = cfg.include_initiators ? -1 : 1;
  for (std::int64_t i = 1; i <= extent; ++i) {
    if (!realization.open({i, 0})) continue;
    const std::uint64_t r = realization.radius_unchecked({i, 0});
    // Left end of [i - r, i]; anything below -1 is past the lattice.
    const std::int64_t lo = r > static_cast<std::uint64_t>(i + 1) ? -2 : i - static_cast<std::int64_t>(r);
    const std::int64_t first = std::max<std::int64_t>(lo, 1);
    if (first > n) continue;
    if (lo < lowest) ++field.clamped;
    if (opens_between(std::max(lo, std::int64_t{-1}), i - 1) < static_cast<std::int64_t>(k)) continue;
    diff[static_cast<std::size_t>(first)] += 1;
    diff[static_cast<std::size_t>(std::min(i, n) + 1)] -= 1;
  }
  std::int64_t acc = 0;
  for (std::int64_t x = 1; x <= n; ++x) {
    acc += diff[static_cast<std::size_t>(x)];
    field.at({x, 0}) = acc > 0 ? 1u : 0u;
  }
  return field;
}

// Counts open lattice sites in [x0,x1] x [y0,y1] other than `skip`, stopping
// once `need` are found.
unsigned count_open_box(const Realization& realization, std::int64_t x0, std::int64_t x1, std::int64_t y0,
                        std::int64_t y1, Site skip, unsigned need) {
  unsigned found = 0;
  for (std::int64_t y = y1; y >= y0; --y) {
    for (std::int64_t x = x1; x >= x0; --x) {
      if (x == skip.x && y == skip.y) continue;
      if (realization.open({x, y}) && ++found >= need) return found;
    }
  }
  return found;
}

CoverageField reverse_membership_2d(const Realization& realization, unsigned k) {
  const LatticeConfig& cfg = realization.config();
  const std::int64_t n = cfg.n;
  const std::int64_t extent = realization.extent();
  CoverageField field(2, n, FieldKind::membership);
  std::vector<std::int32_t> diff(static_cast<std::size_t>((n + 2) * (n + 2)), 0);

  // reach_tail[m] = G(m): a source at i needs rho >= max(i) - n to touch the
  // reported window. Screening on the raw uniform skips the inverse transform
  // for the vast majority of far sources; the 1e-12 slack keeps the screen
  // conservative, and the exact radius decides.
  std::vector<double> reach_tail(static_cast<std::size_t>(extent + 1));
  for (std::int64_t m = 0; m <= extent; ++m) reach_tail[static_cast<std::size_t>(m)] = tail(cfg.dist, m);

  const unsigned initiators = cfg.include_initiators ? 2u : 0u;
  for (std::int64_t b = 1; b <= extent; ++b) {
    for (std::int64_t a = 1; a <= extent; ++a) {
      const Site i{a, b};
      if (!realization.open(i)) continue;
      const std::int64_t needed = std::max(a, b) - n;
      if (needed > 0 && realization.radius_uniform(i) >= reach_tail[static_cast<std::size_t>(needed)] * (1 + 1e-12))
        continue;
      const std::uint64_t r = realization.radius_unchecked(i);
      const std::int64_t span = r > static_cast<std::uint64_t>(extent + 1) ? extent + 2 : static_cast<std::int64_t>(r);
      const std::int64_t lox = a - span;
      const std::int64_t loy = b - span;
      if (lox > n || loy > n) continue;

      unsigned found = 0;
      if (initiators != 0) {
        if (lox <= 0 && loy <= 0) ++found;
        if (lox <= -1 && loy <= -1) ++found;
      }
      if (lox < 1 || loy < 1) ++field.clamped;
      if (found < k)
        found += count_open_box(realization, std::max<std::int64_t>(lox, 1), a, std::max<std::int64_t>(loy, 1), b, i,
                                k - found);
      if (found < k) continue;
      add_block(diff, n, std::max<std::int64_t>(lox, 1), std::min(a, n), std::max<std::int64_t>(loy, 1),
                std::min(b, n));
    }
  }
  integrate_2d(diff, n, field, true);
  return field;
}

}  // namespace

CoverageField reverse_membership(const Realization& realization, unsigned k) {
  if (realization.config().model != Model::reverse_firework)
    throw ValidationError("reverse_membership needs a reverse-firework realization");
  return realization.dimension() == 1 ? reverse_membership_1d(realization, k)
                                      : reverse_membership_2d(realization, k);
}

CoverageField coverage_field(const Realization& realization) {
  if (realization.config().model == Model::firework) return firework_counts(realization);
  return reverse_membership(realization, realization.config().k);
}

std::optional<std::int64_t> last_under_covered(const CoverageField& field, unsigned k) {
  const std::uint32_t t = field.threshold(k);
  const std::int64_t n = field.n();
  if (field.dimension() == 1) {
    for (std::int64_t x = n; x >= 1; --x)
      if (field.at({x, 0}) < t) return x;
    return std::nullopt;
  }
  // N0 = 1 + max over deficient sites of min(x, y).
  std::int64_t depth = 0;
  for (std::int64_t y = 1; y <= n; ++y)
    for (std::int64_t x = 1; x <= n; ++x)
      if (field.at({x, y}) < t) depth = std::max(depth, std::min(x, y));
  if (depth >= n) return std::nullopt;
  return depth + 1;
}

std::int64_t under_covered_depth(const CoverageField& field, unsigned k) {
  const auto last = last_under_covered(field, k);
  if (field.dimension() == 1) return last.value_or(0);
  return last ? *last - 1 : field.n();
}

std::uint64_t under_covered_count(const CoverageField& field, unsigned k, std::int64_t from) {
  const std::uint32_t t = field.threshold(k);
  const std::int64_t n = field.n();
  from = std::max<std::int64_t>(from, 1);
  std::uint64_t count = 0;
  if (field.dimension() == 1) {
    for (std::int64_t x = from; x <= n; ++x) count += field.at({x, 0}) < t;
  } else {
    for (std::int64_t y = from; y <= n; ++y)
      for (std::int64_t x = from; x <= n; ++x) count += field.at({x, y}) < t;
  }
  return count;
}

double under_covered_fraction(const CoverageField& field, unsigned k, std::int64_t from) {
  from = std::max<std::int64_t>(from, 1);
  if (from > field.n()) return 0.0;
  const auto side = static_cast<double>(field.n() - from + 1);
  const double total = field.dimension() == 1 ? side : side * side;
  return static_cast<double>(under_covered_count(field, k, from)) / total;
}

double diagonal_covered_fraction(const CoverageField& field, unsigned k) {
  if (field.dimension() != 2) throw ValidationError("diagonal fraction needs a 2D field");
  std::uint64_t covered = 0;
  for (std::int64_t t = 1; t <= field.n(); ++t) covered += field.covered({t, t}, k);
  return static_cast<double>(covered) / static_cast<double>(field.n());
}

LatticeConfig trial_config(const LatticeConfig& config, std::uint64_t trial) {
  LatticeConfig c = config;
  c.seed = derive_seed(config.seed, trial);
  return c;
}

std::vector<SiteEstimate> estimate_under_coverage(const LatticeConfig& config, std::span<const Site> sites,
                                                  std::uint64_t trials, unsigned workers) {
  config.validate();
  if (trials == 0) throw ValidationError("trials must be >= 1");
  for (const Site& s : sites) {
    const bool inside = s.x >= 1 && s.x <= config.n && (config.dimension == 1 ? s.y == 0 : s.y >= 1 && s.y <= config.n);
    if (!inside)
      throw ValidationError("site (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                            ") lies outside the reported window 1.." + std::to_string(config.n));
  }
  (void)config.simulated_extent();

  // One bit per (trial, site); reduced in trial order afterwards.
  std::vector<std::uint8_t> hits(static_cast<std::size_t>(trials) * sites.size(), 0);
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const Realization realization(trial_config(config, t));
    const CoverageField field = coverage_field(realization);
    for (std::size_t j = 0; j < sites.size(); ++j) hits[t * sites.size() + j] = field.covered(sites[j], config.k) ? 0 : 1;
  });

  std::vector<SiteEstimate> out;
  out.reserve(sites.size());
  for (std::size_t j = 0; j < sites.size(); ++j) {
    SiteEstimate e;
    e.site = sites[j];
    e.trials = trials;
    for (std::uint64_t t = 0; t < trials; ++t) e.under_covered += hits[t * sites.size() + j];
    e.frequency = static_cast<double>(e.under_covered) / static_cast<double>(trials);
    e.ci = wilson_interval(e.under_covered, trials);
    out.push_back(e);
  }
  return out;
}

}  // namespace rumourlab
