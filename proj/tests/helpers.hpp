#pragma once

#include "sff/types.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

namespace testing {

inline double deg(double d) { return d * M_PI / 180.0; }

// Fixed seeds everywhere so failures reproduce.
inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline sff::MatX random_matrix(int r, int c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  sff::MatX m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng());
  return m;
}

template <class A, class B>
double rel_err(const A& a, const B& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace testing
