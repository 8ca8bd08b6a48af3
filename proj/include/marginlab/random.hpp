#pragma once

#include "marginlab/spaces.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace marginlab {

/// SplitMix64 (Steele, Lea, Flood 2014): 64-bit state, golden-gamma increment,
/// the MurmurHash3 finaliser as output function. `split()` derives an
/// independent child stream, so per-task streams do not depend on scheduling.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  SplitMix64 split() { return SplitMix64((*this)() ^ 0x6A09E667F3BCC909ULL); }

  /// Child stream for task `index`, independent of how many draws the parent made.
  SplitMix64 fork(std::uint64_t index) const {
    SplitMix64 tmp(state_ ^ (index * 0xD1B54A32D192ED03ULL));
    tmp();
    return SplitMix64(tmp());
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    // Box-Muller, one output per call.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::uint64_t state_;
};

namespace detail {

// True when a > b + c holds over the reals (TwoSum recovers the rounding error).
inline bool exceeds_sum(double a, double b, double c) {
  const double s = b + c;
  const double bb = s - b;
  const double err = (b - (s - bb)) + (c - bb);
  return a > s || (a == s && err < 0.0);
}

// Shortest-path closure that also holds exactly once the entries are read as
// rationals: where a rounded sum would leave a triangle short by an ulp, the
// long side is nudged down.
inline void exact_metric_closure(DistanceMatrix<double>& d) {
  const std::size_t n = d.size();
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          if (k == i || k == j || !exceeds_sum(d[i][j], d[i][k], d[k][j])) continue;
          double v = d[i][k] + d[k][j];
          while (exceeds_sum(v, d[i][k], d[k][j])) v = std::nextafter(v, 0.0);
          d[i][j] = d[j][i] = v;
          changed = true;
        }
  }
}

}  // namespace detail

/// Random finite metric space: symmetric weights drawn from [lo, 1], repaired
/// by shortest-path closure, so every triangle holds (also in exact arithmetic).
inline MetricSpace random_metric_space(SplitMix64& rng, std::size_t n, double lo = 0.05) {
  DistanceMatrix<double> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = rng.uniform(lo, 1.0);
  detail::exact_metric_closure(d);
  return MetricSpace(std::move(d));
}

/// Random metric space closed under shortest paths and rescaled to diameter 1.
inline MetricSpace random_unit_metric_space(SplitMix64& rng, std::size_t n) {
  auto m = random_metric_space(rng, n);
  if (n < 2) return m;
  DistanceMatrix<double> d = m.rescaled_to_unit_diameter(true).matrix();
  detail::exact_metric_closure(d);
  return MetricSpace(std::move(d));
}

/// Uniformly random point on the unit sphere of l_p^d.
inline Vector random_unit_vector(SplitMix64& rng, std::size_t d, const NormSpec& n) {
  Vector v(d);
  double s;
  do {
    for (double& x : v) x = rng.normal();
    s = norm(v, n);
  } while (s == 0.0);
  for (double& x : v) x /= s;
  return v;
}

}  // namespace marginlab
