#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "nav/rng.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Central finite difference of f with respect to x[i].
inline double central_diff(std::vector<double>& x, size_t i, const std::function<double()>& f,
                           double h = 1e-5) {
  double orig = x[i];
  x[i] = orig + h;
  double fp = f();
  x[i] = orig - h;
  double fm = f();
  x[i] = orig;
  return (fp - fm) / (2.0 * h);
}

inline std::vector<double> random_vec(size_t n, nav::Rng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace testutil
