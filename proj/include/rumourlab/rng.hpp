#pragma once

#include <cstdint>

namespace rumourlab {

// SplitMix64 finalizer. Used both as the sequential generator step and as a
// stateless hash for counter-based draws.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent sub-stream (trial, grid point, ...). Depends only on
// (seed, index), so aggregation order never changes the draws.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Maps 64 random bits to the open interval (0,1) with 53-bit resolution.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential deterministic stream. Output is identical on every platform,
// unlike the std:: distributions.
class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) noexcept : state_{seed} {}

  constexpr std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0,1); never returns 0 or 1.
  constexpr double uniform() noexcept { return to_open_unit(next_u64()); }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

// Counter-based uniform: a pure function of (key, counter, stream). Lets the
// lattice evaluate X_s and rho_s for any site without materialising a window.
class CounterUniform {
 public:
  explicit constexpr CounterUniform(std::uint64_t seed) noexcept : key_{mix64(seed ^ 0x5851f42d4c957f2dULL)} {}

  constexpr double operator()(std::uint64_t counter, std::uint32_t stream) const noexcept {
    return to_open_unit(mix64(key_ ^ mix64(counter * 4 + stream)));
  }

 private:
  std::uint64_t key_;
};

}  // namespace rumourlab
