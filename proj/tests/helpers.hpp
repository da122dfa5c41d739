#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "cpafdm/types.hpp"

namespace testing {

using cpafdm::cd;
using cpafdm::CVec;

inline CVec random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVec v(n);
  for (auto& x : v) {
    const double re = g(rng);
    x = {re, g(rng)};
  }
  return v;
}

inline double max_abs_diff(const CVec& a, const CVec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

inline double norm(const CVec& v) {
  double s = 0.0;
  for (cd x : v) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace testing
