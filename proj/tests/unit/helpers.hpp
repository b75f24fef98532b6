#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "avf/feature_set.hpp"
#include "avf/numeric.hpp"
#include "avf/rng.hpp"

namespace avf::testing {

inline Vec random_vec(std::size_t d, Rng& rng, double scale = 1.0) {
  Vec v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

inline std::vector<Vec> random_vectors(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_vec(d, rng));
  return out;
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace avf::testing
