#pragma once

#include <Eigen/QR>

#include <array>
#include <cstdint>
#include <limits>

#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/patterns.hpp"
#include "uhop/rng.hpp"

namespace uhop {

/// N unit vectors in R^D, stored as columns.
class SphericalCode {
 public:
  explicit SphericalCode(Matrix points) : points_(std::move(points)) {
    detail::require(points_.cols() >= 1 && points_.rows() >= 1, ErrorKind::InvalidArgument,
                    "spherical code needs N >= 1 points in D >= 1");
    for (Index i = 0; i < points_.cols(); ++i) {
      if (std::abs(points_.col(i).norm() - 1.0) > kUnitNormTol) {
        throw Error(ErrorKind::InvalidArgument, "code point " + std::to_string(i) + " is not unit norm");
      }
    }
  }

  Index n() const { return points_.cols(); }
  Index dim() const { return points_.rows(); }
  const Matrix& points() const { return points_; }

 private:
  Matrix points_;
};

/// rho = max_{i != j} <c_i, c_j>. Named "minimal separation" after the
/// literature even though it is the largest inner product.
inline double minimal_separation(const SphericalCode& code) {
  if (code.n() < 2) throw Error(ErrorKind::SinglePoint, "minimal separation needs at least two points");
  const Matrix g = code.points().transpose() * code.points();
  double rho = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < g.cols(); ++j) {
    for (Index i = 0; i < j; ++i) rho = std::max(rho, g(i, j));
  }
  return rho;
}

/// Regular simplex: D+1 points with pairwise inner product -1/D.
inline SphericalCode simplex_code(Index dim) {
  detail::require(dim >= 1, ErrorKind::InvalidArgument, "simplex code needs D >= 1");
  const Index n = dim + 1;
  // Centered basis vectors of R^{D+1} live in the hyperplane orthogonal to
  // the all-ones vector; express them in an orthonormal basis of it.
  Matrix centered = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::HouseholderQR<Matrix> qr(Vector::Ones(n));
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix pts = q.rightCols(dim).transpose() * centered;
  for (Index j = 0; j < n; ++j) pts.col(j).normalize();
  return SphericalCode(std::move(pts));
}

/// Cross-polytope: the 2D points +-e_i.
inline SphericalCode cross_polytope_code(Index dim) {
  detail::require(dim >= 1, ErrorKind::InvalidArgument, "cross-polytope code needs D >= 1");
  Matrix pts = Matrix::Zero(dim, 2 * dim);
  for (Index i = 0; i < dim; ++i) {
    pts(i, 2 * i) = 1.0;
    pts(i, 2 * i + 1) = -1.0;
  }
  return SphericalCode(std::move(pts));
}

struct CodeSearchOptions {
  int restarts = 20;
  int iters = 400;  // per temperature stage
  std::uint64_t seed = 0;
  std::array<double, 4> tau_schedule{0.3, 0.1, 0.03, 0.01};
  double step = 0.05;
};

/// Best-of-restarts local minimization of the smoothed maximum
///   S(C) = tau * log sum_{i<j} exp(<c_i, c_j> / tau)
/// over positions on the sphere, annealing tau along the schedule and
/// renormalizing after each Riemannian gradient step. Restart r uses the
/// stream Rng::derive(seed, r). Returns the code with the smallest rho seen.
/// A local search, not a certificate of optimality.
inline SphericalCode brute_force_optimal_code(Index dim, Index n, const CodeSearchOptions& opt = {}) {
  detail::require(dim >= 2 && n >= 2, ErrorKind::InvalidArgument, "code search needs D >= 2 and N >= 2");
  detail::require(opt.restarts >= 1 && opt.iters >= 1, ErrorKind::InvalidArgument,
                  "code search needs restarts >= 1 and iters >= 1");

  Matrix best;
  double best_rho = std::numeric_limits<double>::infinity();
  auto rho_of = [](const Matrix& c) {
    const Matrix g = c.transpose() * c;
    double r = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < g.cols(); ++j)
      for (Index i = 0; i < j; ++i) r = std::max(r, g(i, j));
    return r;
  };

  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng = Rng::derive(opt.seed, static_cast<std::uint64_t>(r));
    Matrix c = gaussian_matrix(dim, n, rng);
    for (Index j = 0; j < n; ++j) c.col(j).normalize();
    Matrix best_local = c;
    double best_local_rho = rho_of(c);

    for (const double tau : opt.tau_schedule) {
      // Steps scale with tau: the smoothed max has curvature ~ 1/tau.
      const double eta = opt.step * tau / opt.tau_schedule.front();
      for (int it = 0; it < opt.iters; ++it) {
        const Matrix g = c.transpose() * c;
        double top = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < n; ++j)
          for (Index i = 0; i < j; ++i) top = std::max(top, g(i, j));
        Matrix w = Matrix::Zero(n, n);
        double z = 0.0;
        for (Index j = 0; j < n; ++j) {
          for (Index i = 0; i < j; ++i) {
            const double e = std::exp((g(i, j) - top) / tau);
            w(i, j) = e;
            w(j, i) = e;
            z += e;
          }
        }
        w /= z;
        // dS/dc_i = sum_j w_ij c_j; project onto the tangent space.
        Matrix grad = c * w;
        for (Index j = 0; j < n; ++j) {
          grad.col(j) -= c.col(j).dot(grad.col(j)) * c.col(j);
          c.col(j) -= eta * grad.col(j);
          c.col(j).normalize();
        }
        const double rho = rho_of(c);
        if (rho < best_local_rho) {
          best_local_rho = rho;
          best_local = c;
        }
      }
    }
    if (best_local_rho < best_rho) {
      best_rho = best_local_rho;
      best = best_local;
    }
  }
  return SphericalCode(std::move(best));
}

}  // namespace uhop
