// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reproducible random instance sampling. The engine is std::mt19937_64,
// whose output sequence is fixed by the standard; all floating-point
// transforms below are written out so results do not depend on the
// standard library's distribution implementations.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace divlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trial `index` in a search seeded with `seed`.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

class Sampler {
 public:
  /// Values are drawn from the grid {-2, -1.95, ..., 2}.
  static constexpr int kGridPoints = 81;
  static constexpr double kGridBound = 2.0;

  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  /// Uniform integer in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }

  double exponential() { return -std::log1p(-uniform()); }

  /// Symmetric Dirichlet(1) weights; every entry is positive.
  std::vector<double> dirichlet(std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) {
      v = exponential() + 1e-300;
      s += v;
    }
    for (auto& v : w) v /= s;
    return w;
  }

  double grid_value() {
    const double step = 2.0 * kGridBound / (kGridPoints - 1);
    return -kGridBound + step * static_cast<double>(index(kGridPoints));
  }

  std::vector<double> grid_values(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = grid_value();
    return v;
  }

  /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[index(i)]);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace divlab
