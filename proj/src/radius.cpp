#include "rumourlab/radius.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rumourlab/error.hpp"
#include "rumourlab/format.hpp"

namespace rumourlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const RadiusFamily& family) {
  std::visit(Overloaded{
                 [](const ParetoTail& f) {
                   if (!(f.alpha > 0.0) || !std::isfinite(f.alpha))
                     throw ValidationError("pareto alpha must be a positive finite real");
                 },
                 [](const PowerTail& f) {
                   if (!(f.beta > 0.0) || !std::isfinite(f.beta))
                     throw ValidationError("power beta must be a positive finite real");
                 },
                 [](const GeometricTail& f) {
                   if (!(f.q > 0.0 && f.q < 1.0)) throw ValidationError("geometric q must lie in (0,1)");
                 },
                 [](const ConstantRadius&) {},
             },
             family);
}

double family_tail(const RadiusFamily& family, std::uint64_t j) {
  if (j == 0) return 1.0;
  const double x = static_cast<double>(j);
  return std::visit(Overloaded{
                        [x](const ParetoTail& f) { return std::min(1.0, f.alpha / x); },
                        [x](const PowerTail& f) { return std::min(1.0, std::pow(x, -f.beta)); },
                        [x](const GeometricTail& f) { return std::pow(f.q, x); },
                        [j](const ConstantRadius& f) { return j <= f.r ? 1.0 : 0.0; },
                    },
                    family);
}

// Largest integer strictly below x, for x > 0, clamped to kRadiusMax.
std::uint64_t largest_below(double x) {
  if (!(x < static_cast<double>(kRadiusMax))) return kRadiusMax;
  const double c = std::ceil(x);
  return c >= 1.0 ? static_cast<std::uint64_t>(c) - 1 : 0;
}

}  // namespace

TailDistribution::TailDistribution(RadiusFamily family, std::optional<std::uint64_t> cap)
    : family_{std::move(family)}, cap_{cap} {
  validate(family_);
}

TailDistribution TailDistribution::truncated(const TailDistribution& base, std::uint64_t cap) {
  const std::uint64_t c = base.cap_ ? std::min(*base.cap_, cap) : cap;
  return TailDistribution{base.family_, c};
}

std::optional<std::uint64_t> TailDistribution::support_bound() const noexcept {
  std::optional<std::uint64_t> bound = cap_;
  if (const auto* c = std::get_if<ConstantRadius>(&family_)) bound = bound ? std::min(*bound, c->r) : c->r;
  return bound;
}

double tail(const TailDistribution& dist, std::uint64_t j) {
  if (dist.cap() && j > *dist.cap()) return 0.0;
  return family_tail(dist.family(), j);
}

double survival_complement(const TailDistribution& dist, double p, std::uint64_t j) {
  return 1.0 - p * tail(dist, j);
}

std::uint64_t radius_from_uniform(const TailDistribution& dist, double u) {
  const std::uint64_t r = std::visit(Overloaded{
                                         [u](const ParetoTail& f) { return largest_below(f.alpha / u); },
                                         [u](const PowerTail& f) { return largest_below(std::pow(u, -1.0 / f.beta)); },
                                         [u](const GeometricTail& f) { return largest_below(std::log(u) / std::log(f.q)); },
                                         [](const ConstantRadius& f) { return f.r; },
                                     },
                                     dist.family());
  // Snap to the exact breakpoint when the closed-form inverse rounds across it.
  std::uint64_t j = r;
  if (!std::holds_alternative<ConstantRadius>(dist.family()) && j < kRadiusMax) {
    while (j > 0 && !(family_tail(dist.family(), j) > u)) --j;
    while (j < kRadiusMax && family_tail(dist.family(), j + 1) > u) ++j;
  }
  return dist.cap() ? std::min(j, *dist.cap()) : j;
}

std::uint64_t sample_radius(const TailDistribution& dist, Rng& rng) { return radius_from_uniform(dist, rng.uniform()); }

TailFunctionals tail_functionals(const TailDistribution& dist) {
  if (dist.is_truncated())
    throw TruncatedLawError("tail functionals are undefined for truncated laws: " + to_string(dist));
  return std::visit(Overloaded{
                        [](const ParetoTail& f) {
                          return TailFunctionals{ExtendedReal::finite(f.alpha), ExtendedReal::finite(f.alpha)};
                        },
                        [](const PowerTail& f) {
                          if (f.beta < 1.0) return TailFunctionals{ExtendedReal::infinity(), ExtendedReal::infinity()};
                          if (f.beta == 1.0) return TailFunctionals{ExtendedReal::finite(1.0), ExtendedReal::finite(1.0)};
                          return TailFunctionals{ExtendedReal::finite(0.0), ExtendedReal::finite(0.0)};
                        },
                        [](const GeometricTail&) {
                          return TailFunctionals{ExtendedReal::finite(0.0), ExtendedReal::finite(0.0)};
                        },
                        [](const ConstantRadius&) {
                          return TailFunctionals{ExtendedReal::finite(0.0), ExtendedReal::finite(0.0)};
                        },
                    },
                    dist.family());
}

bool moment_finite(const TailDistribution& dist, unsigned d) {
  if (d == 0) throw ValidationError("moment order must be >= 1");
  if (dist.is_truncated()) return true;
  return std::visit(Overloaded{
                        // j * G(j) -> alpha: E[rho] already diverges.
                        [](const ParetoTail&) { return false; },
                        [d](const PowerTail& f) { return f.beta > static_cast<double>(d); },
                        [](const GeometricTail&) { return true; },
                        [](const ConstantRadius&) { return true; },
                    },
                    dist.family());
}

namespace {

std::string_view expect_key(std::string_view body, std::string_view key, std::string_view whole) {
  const std::string prefix = std::string(key) + "=";
  if (body.substr(0, prefix.size()) != prefix)
    throw ParseError("distribution spec '" + std::string(whole) + "': expected '" + prefix + "' but found '" +
                     std::string(body) + "'");
  return body.substr(prefix.size());
}

double parse_real_token(std::string_view token, std::string_view whole) {
  double v = 0;
  if (!parse_double(token, v))
    throw ParseError("distribution spec '" + std::string(whole) + "': bad number '" + std::string(token) + "'");
  return v;
}

std::uint64_t parse_int_token(std::string_view token, std::string_view whole) {
  std::uint64_t v = 0;
  if (!parse_u64(token, v))
    throw ParseError("distribution spec '" + std::string(whole) + "': bad integer '" + std::string(token) + "'");
  return v;
}

TailDistribution parse_impl(std::string_view text, std::string_view whole) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("distribution spec '" + std::string(whole) + "': missing ':' in '" + std::string(text) + "'");
  const std::string_view name = text.substr(0, colon);
  const std::string_view body = text.substr(colon + 1);

  try {
    if (name == "trunc") {
      const auto pos = body.rfind(":cap=");
      if (pos == std::string_view::npos)
        throw ParseError("distribution spec '" + std::string(whole) + "': missing ':cap=' in '" + std::string(body) +
                         "'");
      const TailDistribution base = parse_impl(body.substr(0, pos), whole);
      return TailDistribution::truncated(base, parse_int_token(body.substr(pos + 5), whole));
    }
    if (name == "pareto") return TailDistribution::pareto(parse_real_token(expect_key(body, "alpha", whole), whole));
    if (name == "power") return TailDistribution::power(parse_real_token(expect_key(body, "beta", whole), whole));
    if (name == "geom") return TailDistribution::geometric(parse_real_token(expect_key(body, "q", whole), whole));
    if (name == "const") return TailDistribution::constant(parse_int_token(expect_key(body, "r", whole), whole));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError("distribution spec '" + std::string(whole) + "': " + e.what());
  }
  throw ParseError("distribution spec '" + std::string(whole) + "': unknown family '" + std::string(name) + "'");
}

}  // namespace

TailDistribution parse_distribution(std::string_view text) { return parse_impl(text, text); }

std::string to_string(const TailDistribution& dist) {
  std::string base = std::visit(Overloaded{
                                    [](const ParetoTail& f) { return "pareto:alpha=" + format_double(f.alpha); },
                                    [](const PowerTail& f) { return "power:beta=" + format_double(f.beta); },
                                    [](const GeometricTail& f) { return "geom:q=" + format_double(f.q); },
                                    [](const ConstantRadius& f) { return "const:r=" + std::to_string(f.r); },
                                },
                                dist.family());
  if (dist.cap()) return "trunc:" + base + ":cap=" + std::to_string(*dist.cap());
  return base;
}

}  // namespace rumourlab
