#pragma once

#include <cstdint>
#include <span>

namespace rumourlab {

// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double width() const noexcept { return high - low; }
  bool contains(double x) const noexcept { return low <= x && x <= high; }
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ99);

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct MeanSummary {
  double mean = 0.0;
  Interval ci;  // normal approximation, mean +- z * sd / sqrt(n)
  std::uint64_t count = 0;
};

MeanSummary summarize_mean(std::span<const double> values, double z = kZ99);

/// Least-squares slope of y on x.
double regression_slope(std::span<const double> x, std::span<const double> y);

}  // namespace rumourlab
