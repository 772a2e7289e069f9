#pragma once

#include <spectv/grid.hpp>

#include <cmath>
#include <random>

namespace spectv::test {

inline Grid random_grid(std::vector<std::size_t> dims, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  Grid g(std::move(dims));
  for (double& v : g.values) v = nd(rng);
  return g;
}

// sum of a few wide Gaussian bumps
inline Grid smooth_image(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Grid f({n, n});
  for (int k = 0; k < 6; ++k) {
    double cx = U(rng) * n, cy = U(rng) * n, s = 4 + U(rng) * 8, amp = U(rng) * 2 - 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double x = j + 0.5 - cx, y = i + 0.5 - cy;
        f.at(i, j) += amp * std::exp(-(x * x + y * y) / (2 * s * s));
      }
  }
  return f;
}

// Three blocks on 256 samples whose merging under the flow gives five
// spectral events (t = 1.5, 4, 6, 11, 18 with zero exterior).
inline Grid three_peak_signal() {
  Grid f({256});
  const struct { std::size_t start, width; double height; } blocks[] = {{56, 8, 0.5}, {88, 16, 1.0}, {136, 32, 0.5}};
  for (const auto& b : blocks)
    for (std::size_t i = b.start; i < b.start + b.width; ++i) f[i] = b.height;
  return f;
}

}  // namespace spectv::test
