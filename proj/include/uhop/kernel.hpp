#pragma once

#include <Eigen/SVD>

#include <limits>

#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/patterns.hpp"

namespace uhop {

inline constexpr double kRankRelTol = 1e-8;

/// Linear feature map Phi(v) = W^T v with W of shape d x D_phi.
///
/// With output normalization on (the default) Phi(v) is rescaled to the unit
/// sphere, so kernel values are cosines and the spherical-code quantities
/// below are meaningful. With it off, Phi is the plain linear map; a square
/// orthogonal W then reproduces the classical modern Hopfield model.
///
/// Full column rank is checked at construction and exposed through
/// full_column_rank(); only operations that need it (training) reject a
/// deficient W.
class FeatureMap {
 public:
  FeatureMap(Matrix w, bool output_normalize = true) : w_(std::move(w)), output_normalize_(output_normalize) {
    detail::require(w_.rows() >= 1, ErrorKind::InvalidArgument, "feature map needs d >= 1");
    detail::require(w_.cols() >= 2, ErrorKind::InvalidArgument, "feature map needs D_phi >= 2");
    detail::require(all_finite(w_.reshaped()), ErrorKind::NonFinite, "feature map entries must be finite");
    full_rank_ = has_full_column_rank(w_);
  }

  static FeatureMap identity(Index d, bool output_normalize = true) {
    return FeatureMap(Matrix::Identity(d, d), output_normalize);
  }

  const Matrix& w() const { return w_; }
  Index d() const { return w_.rows(); }
  Index d_phi() const { return w_.cols(); }
  bool output_normalize() const { return output_normalize_; }
  bool full_column_rank() const { return full_rank_; }

  static bool has_full_column_rank(const Matrix& w) {
    if (w.cols() > w.rows()) return false;
    Eigen::JacobiSVD<Matrix> svd(w);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return false;
    return s(s.size() - 1) > kRankRelTol * s(0);
  }

  template <typename Derived>
  Vector apply(const Eigen::MatrixBase<Derived>& v) const {
    if (v.size() != d()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "feature map expects dimension " + std::to_string(d()) + ", got " + std::to_string(v.size()));
    }
    Vector f = w_.transpose() * v;
    if (output_normalize_) {
      const double n = f.norm();
      if (n < kZeroNorm) throw Error(ErrorKind::ZeroImage, "W^T v vanishes; cannot normalize");
      f /= n;
    }
    return f;
  }

  /// Phi applied column-wise: D_phi x M.
  Matrix features(const PatternSet& xi) const { return features(xi.matrix()); }

  Matrix features(const Matrix& cols) const {
    if (cols.rows() != d()) throw Error(ErrorKind::DimensionMismatch, "feature map / pattern dimension mismatch");
    Matrix f = w_.transpose() * cols;
    if (output_normalize_) {
      for (Index j = 0; j < f.cols(); ++j) {
        const double n = f.col(j).norm();
        if (n < kZeroNorm) throw Error(ErrorKind::ZeroImage, "W^T xi vanishes for pattern " + std::to_string(j));
        f.col(j) /= n;
      }
    }
    return f;
  }

 private:
  Matrix w_;
  bool output_normalize_;
  bool full_rank_ = false;
};

template <typename Derived>
Vector apply_feature_map(const FeatureMap& phi, const Eigen::MatrixBase<Derived>& v) {
  return phi.apply(v);
}

/// [<Phi(xi_mu), Phi(x)>]_mu
template <typename Derived>
Vector kernel_similarity(const FeatureMap& phi, const PatternSet& xi, const Eigen::MatrixBase<Derived>& x) {
  return phi.features(xi).transpose() * phi.apply(x);
}

/// Same, with the memory features already computed (retrieval loops reuse them).
template <typename Derived>
Vector kernel_similarity(const FeatureMap& phi, const Matrix& memory_features, const Eigen::MatrixBase<Derived>& x) {
  return memory_features.transpose() * phi.apply(x);
}

struct SeparationStats {
  Vector delta_per_pattern;
  double delta_min = 0.0;
  double r_phi = 0.0;
  Index argmin_pattern = 0;
};

/// Separation statistics of a set of feature vectors (columns). This is the
/// shared core for Phi(Xi) and for raw spherical codes.
inline SeparationStats separation_stats_of_features(const Matrix& f, bool unit_features) {
  const Index m = f.cols();
  if (m < 2) throw Error(ErrorKind::SinglePattern, "separation is undefined for a single pattern");
  const Matrix gram = f.transpose() * f;
  SeparationStats s;
  s.delta_per_pattern.resize(m);
  double min_dist = std::numeric_limits<double>::infinity();
  for (Index mu = 0; mu < m; ++mu) {
    double max_cross = -std::numeric_limits<double>::infinity();
    for (Index nu = 0; nu < m; ++nu) {
      if (nu == mu) continue;
      max_cross = std::max(max_cross, gram(nu, mu));
      if (nu > mu) min_dist = std::min(min_dist, (f.col(mu) - f.col(nu)).norm());
    }
    s.delta_per_pattern(mu) = gram(mu, mu) - max_cross;
  }
  s.delta_min = s.delta_per_pattern.minCoeff(&s.argmin_pattern);
  s.r_phi = 0.5 * min_dist;
  if (unit_features) {
    // On the unit sphere |a-b|^2 = 2 - 2<a,b>, hence R^2 = delta_min / 2.
    const double gap = std::abs(s.r_phi * s.r_phi - 0.5 * s.delta_min);
    if (gap > 1e-9) {
      throw std::logic_error("separation_stats: R_phi^2 != delta_min/2 on unit features (gap " +
                             std::to_string(gap) + ")");
    }
  }
  return s;
}

inline SeparationStats separation_stats(const FeatureMap& phi, const PatternSet& xi) {
  if (xi.m() < 2) throw Error(ErrorKind::SinglePattern, "separation is undefined for a single pattern");
  return separation_stats_of_features(phi.features(xi), phi.output_normalize());
}

}  // namespace uhop
