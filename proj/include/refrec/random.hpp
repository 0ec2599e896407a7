#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace refrec {

// All stochastic code in this project draws from a single mt19937_64 through
// the helpers below, so that a seed fully determines every output regardless
// of platform or standard library (std::uniform_*_distribution and
// std::shuffle are implementation-defined).
using Rng = std::mt19937_64;

inline std::size_t rand_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Uniform in [0, 1) with 53 bits of precision.
inline double rand_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rand_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rand_unit(rng);
}

// Box-Muller, one fresh pair of uniforms per call (no cached spare).
inline double rand_normal(Rng& rng) {
  double u1 = rand_unit(rng);
  double u2 = rand_unit(rng);
  while (u1 <= 0.0) u1 = rand_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925287 * u2);
}

// Marsaglia-Tsang, unit scale.
inline double rand_gamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    double u = rand_unit(rng);
    while (u <= 0.0) u = rand_unit(rng);
    return rand_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rand_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = rand_unit(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

inline long rand_poisson(Rng& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda < 30.0) {
    const double limit = std::exp(-lambda);
    double prod = rand_unit(rng);
    long n = 0;
    while (prod > limit) {
      ++n;
      prod *= rand_unit(rng);
    }
    return n;
  }
  // Normal approximation is plenty for large means here.
  double v = lambda + std::sqrt(lambda) * rand_normal(rng) + 0.5;
  return v < 0.0 ? 0 : static_cast<long>(v);
}

// Fisher-Yates.
template <typename T>
void shuffle_inplace(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rand_index(rng, i)]);
}

// Draws an index with probability proportional to the weight increments of
// the cumulative-sum vector `cum` (cum.back() is the total mass).
inline std::size_t sample_cumulative(const std::vector<double>& cum,
                                     Rng& rng) {
  const double u = rand_unit(rng) * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;
  return static_cast<std::size_t>(it - cum.begin());
}

}  // namespace refrec
