#include "rumourlab/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "rumourlab/error.hpp"
#include "rumourlab/format.hpp"
#include "rumourlab/parallel.hpp"

namespace rumourlab {

namespace {

constexpr std::int64_t kMaxPixels = std::int64_t{1} << 28;

double parse_value(std::string_view body, std::string_view key, std::string_view whole) {
  const std::string prefix = std::string(key) + "=";
  if (body.substr(0, prefix.size()) != prefix)
    throw ParseError("radius law '" + std::string(whole) + "': expected '" + prefix + "' but found '" +
                     std::string(body) + "'");
  double v = 0;
  const auto token = body.substr(prefix.size());
  if (!parse_double(token, v))
    throw ParseError("radius law '" + std::string(whole) + "': bad number '" + std::string(token) + "'");
  return v;
}

struct Segment {
  double lo;
  double hi;
  long count;
};

// Coverage segments partitioning [0, T) plus the coverage at the point T.
struct Sweep {
  std::vector<Segment> segments;
  long count_at_t = 0;
};

Sweep sweep_1d(const PointSet& points, double t) {
  if (points.dimension != 1) throw ValidationError("1D sweep needs a 1D point set");
  std::vector<std::pair<double, int>> events;
  events.reserve(points.points.size() * 2);
  Sweep out;
  for (const Point& pt : points.points) {
    const double end = pt.x + pt.radius;
    if (pt.x <= t && t < end) ++out.count_at_t;
    if (pt.x >= t) continue;
    events.emplace_back(std::max(pt.x, 0.0), +1);
    if (end < t) events.emplace_back(end, -1);
  }
  std::sort(events.begin(), events.end());
  double pos = 0.0;
  long count = 0;
  for (std::size_t e = 0; e < events.size();) {
    const double q = events[e].first;
    if (q > pos) out.segments.push_back({pos, q, count});
    for (; e < events.size() && events[e].first == q; ++e) count += events[e].second;
    pos = std::max(pos, q);
  }
  if (pos < t) out.segments.push_back({pos, t, count});
  return out;
}

// Pixel indices whose centres (c + 0.5) * res fall in [lo, hi), clipped to [0, m).
std::pair<std::int64_t, std::int64_t> centre_range(double lo, double hi, double res, std::int64_t m) {
  auto first = static_cast<std::int64_t>(std::ceil(lo / res - 0.5));
  auto last = static_cast<std::int64_t>(std::ceil(hi / res - 0.5)) - 1;
  return {std::max<std::int64_t>(first, 0), std::min(last, m - 1)};
}

std::int64_t pixel_count(double t, double resolution) {
  if (!(resolution > 0.0)) throw ValidationError("resolution must be positive");
  const double m = std::ceil(t / resolution);
  if (!(m < static_cast<double>(kMaxPixels))) throw WindowOverflowError("pixel grid too large");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(m));
}

}  // namespace

ContinuousRadiusLaw parse_continuous_law(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("radius law '" + std::string(text) + "': missing ':'");
  const auto name = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  if (name == "pareto") {
    const double a = parse_value(body, "alpha", text);
    if (!(a > 0)) throw ParseError("radius law '" + std::string(text) + "': alpha must be positive");
    return ParetoCont{a};
  }
  if (name == "power") {
    const double b = parse_value(body, "beta", text);
    if (!(b > 0)) throw ParseError("radius law '" + std::string(text) + "': beta must be positive");
    return PowerCont{b};
  }
  if (name == "const") {
    const double r = parse_value(body, "r", text);
    if (!(r > 0)) throw ParseError("radius law '" + std::string(text) + "': r must be positive");
    return ConstCont{r};
  }
  throw ParseError("radius law '" + std::string(text) + "': unknown family '" + std::string(name) + "'");
}

std::string to_string(const ContinuousRadiusLaw& law) {
  if (const auto* p = std::get_if<ParetoCont>(&law)) return "pareto:alpha=" + format_double(p->alpha);
  if (const auto* p = std::get_if<PowerCont>(&law)) return "power:beta=" + format_double(p->beta);
  return "const:r=" + format_double(std::get<ConstCont>(law).r);
}

double radius_from_uniform(const ContinuousRadiusLaw& law, double u) {
  if (const auto* p = std::get_if<ParetoCont>(&law)) return p->alpha / u;
  if (const auto* p = std::get_if<PowerCont>(&law)) return std::pow(u, -1.0 / p->beta);
  return std::get<ConstCont>(law).r;
}

void ContinuumConfig::validate() const {
  if (dimension != 1 && dimension != 2) throw ValidationError("dimension must be 1 or 2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
  if (!(window_t > 0.0) || !std::isfinite(window_t)) throw ValidationError("window T must be positive");
  if (!(resolution > 0.0)) throw ValidationError("resolution must be positive");
}

PointSet sample_ppp(const ContinuumConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const double mean = config.lambda * std::pow(config.window_t, config.dimension);
  // Unit-rate arrivals on [0, mean]: the count is exactly Poisson(mean).
  std::uint64_t count = 0;
  for (double arrival = -std::log(rng.uniform()); arrival <= mean; arrival -= std::log(rng.uniform())) ++count;

  PointSet set;
  set.dimension = config.dimension;
  set.points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Point pt;
    pt.x = rng.uniform() * config.window_t;
    if (config.dimension == 2) pt.y = rng.uniform() * config.window_t;
    pt.radius = radius_from_uniform(config.law, rng.uniform());
    set.points.push_back(pt);
  }
  return set;
}

std::optional<double> k_cover_last_gap_1d(const PointSet& points, unsigned k, double t) {
  const Sweep sweep = sweep_1d(points, t);
  if (sweep.count_at_t < static_cast<long>(k)) return t;
  for (auto it = sweep.segments.rbegin(); it != sweep.segments.rend(); ++it)
    if (it->count < static_cast<long>(k)) return it->hi;
  return std::nullopt;
}

double k_cover_deficient_length_1d(const PointSet& points, unsigned k, double t) {
  CompensatedSum length;
  for (const Segment& s : sweep_1d(points, t).segments)
    if (s.count < static_cast<long>(k)) length.add(s.hi - s.lo);
  return length.value();
}

std::size_t k_cover_deficient_segments_1d(const PointSet& points, unsigned k, double t) {
  std::size_t runs = 0;
  bool in_run = false;
  for (const Segment& s : sweep_1d(points, t).segments) {
    const bool deficient = s.count < static_cast<long>(k);
    if (deficient && !in_run) ++runs;
    in_run = deficient;
  }
  return runs;
}

double k_cover_deficient_length_1d_raster(const PointSet& points, unsigned k, double t, double resolution) {
  if (points.dimension != 1) throw ValidationError("1D raster needs a 1D point set");
  const std::int64_t m = pixel_count(t, resolution);
  std::vector<long> diff(static_cast<std::size_t>(m + 1), 0);
  for (const Point& pt : points.points) {
    const auto [first, last] = centre_range(pt.x, pt.x + pt.radius, resolution, m);
    if (first > last) continue;
    diff[static_cast<std::size_t>(first)] += 1;
    diff[static_cast<std::size_t>(last + 1)] -= 1;
  }
  CompensatedSum length;
  long acc = 0;
  for (std::int64_t c = 0; c < m; ++c) {
    acc += diff[static_cast<std::size_t>(c)];
    if (acc < static_cast<long>(k))
      length.add(std::min(resolution, t - static_cast<double>(c) * resolution));
  }
  return length.value();
}

Deficit2D k_cover_deficit_2d(const PointSet& points, unsigned k, double t, double resolution) {
  if (points.dimension != 2) throw ValidationError("2D deficit needs a 2D point set");
  const std::int64_t m = pixel_count(t, resolution);
  if (m > (std::int64_t{1} << 14)) throw WindowOverflowError("pixel grid " + std::to_string(m) + "^2 too large");
  const std::int64_t stride = m + 1;
  std::vector<std::int32_t> diff(static_cast<std::size_t>(stride * stride), 0);
  Deficit2D out;
  for (const Point& pt : points.points) {
    if (pt.x + pt.radius > t || pt.y + pt.radius > t) ++out.clamped;
    const auto [x0, x1] = centre_range(pt.x, pt.x + pt.radius, resolution, m);
    const auto [y0, y1] = centre_range(pt.y, pt.y + pt.radius, resolution, m);
    if (x0 > x1 || y0 > y1) continue;
    diff[static_cast<std::size_t>(y0 * stride + x0)] += 1;
    diff[static_cast<std::size_t>(y0 * stride + x1 + 1)] -= 1;
    diff[static_cast<std::size_t>((y1 + 1) * stride + x0)] -= 1;
    diff[static_cast<std::size_t>((y1 + 1) * stride + x1 + 1)] += 1;
  }
  std::vector<std::int64_t> column(static_cast<std::size_t>(m), 0);
  std::uint64_t deficient = 0;
  std::int64_t best_a = -1, best_b = -1;
  auto further = [&](std::int64_t a, std::int64_t b) {
    if (best_a < 0) return true;
    const auto key = std::make_tuple(std::min(a, b), std::max(a, b), a);
    return key > std::make_tuple(std::min(best_a, best_b), std::max(best_a, best_b), best_a);
  };
  for (std::int64_t b = 0; b < m; ++b) {
    std::int64_t acc = 0;
    for (std::int64_t a = 0; a < m; ++a) {
      acc += diff[static_cast<std::size_t>(b * stride + a)];
      column[static_cast<std::size_t>(a)] += acc;
      if (column[static_cast<std::size_t>(a)] < static_cast<std::int64_t>(k)) {
        ++deficient;
        if (further(a, b)) {
          best_a = a;
          best_b = b;
        }
      }
    }
  }
  out.fraction = static_cast<double>(deficient) / static_cast<double>(m * m);
  if (best_a >= 0)
    out.witness = std::array<double, 2>{(static_cast<double>(best_a) + 0.5) * resolution,
                                        (static_cast<double>(best_b) + 0.5) * resolution};
  return out;
}

double continuum_statistic(const ContinuumConfig& config) {
  const PointSet points = sample_ppp(config);
  if (config.dimension == 1) return k_cover_last_gap_1d(points, config.k, config.window_t).value_or(0.0) / config.window_t;
  return k_cover_deficit_2d(points, config.k, config.window_t, config.resolution).fraction;
}

std::vector<LambdaSummary> scan_lambda(const ContinuumConfig& base, std::span<const double> lambdas,
                                       std::uint64_t trials, unsigned workers) {
  if (trials == 0) throw ValidationError("trials must be >= 1");
  if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw ValidationError("lambdas must be sorted ascending");
  for (double l : lambdas) {
    ContinuumConfig c = base;
    c.lambda = l;
    c.validate();
  }
  const std::size_t total = lambdas.size() * static_cast<std::size_t>(trials);
  std::vector<double> values(total, 0.0);
  parallel_for(total, workers, [&](std::size_t idx) {
    ContinuumConfig c = base;
    c.lambda = lambdas[idx / trials];
    c.seed = derive_seed(base.seed, idx);
    values[idx] = continuum_statistic(c);
  });
  std::vector<LambdaSummary> out;
  for (std::size_t g = 0; g < lambdas.size(); ++g) {
    LambdaSummary s;
    s.lambda = lambdas[g];
    s.statistic = summarize_mean(std::span<const double>(values).subspan(g * trials, trials));
    out.push_back(s);
  }
  return out;
}

}  // namespace rumourlab
