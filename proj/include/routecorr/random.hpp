#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace routecorr::rng {

// Counter-based generator: every variate is a pure function of its key,
// so draws can be split across threads without changing results.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

/// Uniform on (0, 1), never exactly 0.
inline double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Stream ids keep independent uses of one seed apart.
inline constexpr std::uint64_t kStreamMnp = 1;
inline constexpr std::uint64_t kStreamChoiceSet = 2;

/// Standard normal keyed on (seed, stream, draw, index). Box-Muller over
/// index pairs; even index takes the cosine branch, odd the sine branch.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw, std::uint64_t index) {
  const std::uint64_t pair = index >> 1;
  const double u1 = to_unit(hash(seed, stream, draw, 2 * pair));
  const double u2 = to_unit(hash(seed, stream, draw, 2 * pair + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return (index & 1) ? r * std::sin(t) : r * std::cos(t);
}

}  // namespace routecorr::rng
