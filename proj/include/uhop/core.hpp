#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace uhop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// log(sum_i exp(scale * z_i)) with max-subtraction.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& z, double scale = 1.0) {
  if (z.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = scale >= 0.0 ? scale * z.maxCoeff() : scale * z.minCoeff();
  double acc = 0.0;
  for (Index i = 0; i < z.size(); ++i) acc += std::exp(scale * z(i) - m);
  return m + std::log(acc);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& z) {
  for (Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z(i))) return false;
  }
  return true;
}

}  // namespace uhop
