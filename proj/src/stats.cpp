#include "rumourlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "rumourlab/error.hpp"

namespace rumourlab {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw ValidationError("wilson interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
}

MeanSummary summarize_mean(std::span<const double> values, double z) {
  MeanSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  s.mean = sum.value() / static_cast<double>(values.size());
  if (values.size() < 2) {
    s.ci = {s.mean, s.mean};
    return s;
  }
  CompensatedSum sq;
  for (double v : values) sq.add((v - s.mean) * (v - s.mean));
  const double sd = std::sqrt(sq.value() / static_cast<double>(values.size() - 1));
  const double half = z * sd / std::sqrt(static_cast<double>(values.size()));
  s.ci = {s.mean - half, s.mean + half};
  return s;
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("regression needs >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxy, sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx) * (y[i] - my));
    sxx.add((x[i] - mx) * (x[i] - mx));
  }
  return sxy.value() / sxx.value();
}

}  // namespace rumourlab
