#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/kernel.hpp"
#include "uhop/normalization.hpp"
#include "uhop/patterns.hpp"

namespace uhop {

struct HopfieldConfig {
  double beta = 1.0;
  Normalization norm{};
  int max_iters = 20;
  double fixed_point_tol = 1e-6;

  void validate() const {
    detail::require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
    detail::require(max_iters >= 1, ErrorKind::InvalidArgument, "max_iters must be >= 1");
    detail::require(fixed_point_tol > 0.0, ErrorKind::InvalidArgument, "fixed-point tolerance must be positive");
    norm.validate();
  }
};

struct RetrievalTrace {
  std::vector<Vector> iterates;  // x^0 ... x^T
  std::vector<double> energies;  // E(x^t), same length as iterates
  Vector weights_final;          // weights of the last update
  bool converged = false;
  int steps = 0;                 // updates performed
};

/// Memories plus an optional feature map. Without a map the similarity is
/// the plain inner product (MHM); with one it is the kernel (KHM). Memory
/// features are computed once here.
class HopfieldModel {
 public:
  explicit HopfieldModel(const PatternSet& xi) : xi_(&xi) {}
  HopfieldModel(const PatternSet& xi, const FeatureMap& phi) : xi_(&xi), phi_(&phi), memory_features_(phi.features(xi)) {
    if (phi.d() != xi.d()) throw Error(ErrorKind::DimensionMismatch, "feature map and memories disagree on d");
  }
  HopfieldModel(const PatternSet& xi, const FeatureMap* phi) : xi_(&xi) {
    if (phi != nullptr) *this = HopfieldModel(xi, *phi);
  }

  const PatternSet& patterns() const { return *xi_; }
  const FeatureMap* feature_map() const { return phi_; }

  template <typename Derived>
  Vector similarities(const Eigen::MatrixBase<Derived>& x) const {
    check_dim(x.size());
    if (phi_ == nullptr) return xi_->matrix().transpose() * x;
    return memory_features_.transpose() * phi_->apply(x);
  }

  /// K(x, x): <x, x> for MHM, |Phi(x)|^2 for KHM.
  template <typename Derived>
  double self_similarity(const Eigen::MatrixBase<Derived>& x) const {
    check_dim(x.size());
    if (phi_ == nullptr) return x.squaredNorm();
    return phi_->apply(x).squaredNorm();
  }

  /// E(x) = 1/2 K(x,x) - beta^{-1} log sum_mu exp(beta K(xi_mu, x))
  template <typename Derived>
  double energy(const Eigen::MatrixBase<Derived>& x, double beta) const {
    detail::require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
    return 0.5 * self_similarity(x) - log_sum_exp(similarities(x), beta) / beta;
  }

  /// One update x' = Xi * Norm(beta * K(Xi, x)); returns (x', weights).
  template <typename Derived>
  std::pair<Vector, Vector> step(const Eigen::MatrixBase<Derived>& x, const HopfieldConfig& cfg) const {
    Vector p = normalize(cfg.norm, similarities(x), cfg.beta);
    Vector next = xi_->matrix() * p;
    return {std::move(next), std::move(p)};
  }

  template <typename Derived>
  RetrievalTrace retrieve(const Eigen::MatrixBase<Derived>& x0, const HopfieldConfig& cfg) const {
    cfg.validate();
    detail::require(all_finite(x0), ErrorKind::NonFinite, "query must be finite");
    RetrievalTrace trace;
    Vector x = x0;
    trace.iterates.push_back(x);
    trace.energies.push_back(energy(x, cfg.beta));
    for (int t = 0; t < cfg.max_iters; ++t) {
      auto [next, p] = step(x, cfg);
      const double moved = (next - x).norm();
      x = std::move(next);
      trace.weights_final = std::move(p);
      trace.iterates.push_back(x);
      trace.energies.push_back(energy(x, cfg.beta));
      trace.steps = t + 1;
      if (moved <= cfg.fixed_point_tol) {
        trace.converged = true;
        break;
      }
    }
    return trace;
  }

  /// Final state and weights only, skipping the per-step bookkeeping.
  template <typename Derived>
  std::pair<Vector, Vector> run(const Eigen::MatrixBase<Derived>& x0, const HopfieldConfig& cfg) const {
    Vector x = x0;
    Vector p;
    for (int t = 0; t < cfg.max_iters; ++t) {
      auto [next, w] = step(x, cfg);
      const double moved = (next - x).norm();
      x = std::move(next);
      p = std::move(w);
      if (moved <= cfg.fixed_point_tol) break;
    }
    return {std::move(x), std::move(p)};
  }

 private:
  void check_dim(Index n) const {
    if (n != xi_->d()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "query has dimension " + std::to_string(n) + ", memories have " + std::to_string(xi_->d()));
    }
  }

  const PatternSet* xi_;
  const FeatureMap* phi_ = nullptr;
  Matrix memory_features_;
};

template <typename Derived>
double mhm_energy(const Eigen::MatrixBase<Derived>& x, const PatternSet& xi, double beta) {
  return HopfieldModel(xi).energy(x, beta);
}

template <typename Derived>
double khm_energy(const Eigen::MatrixBase<Derived>& x, const PatternSet& xi, const FeatureMap& phi, double beta) {
  return HopfieldModel(xi, phi).energy(x, beta);
}

template <typename Derived>
std::pair<Vector, Vector> update_step(const Eigen::MatrixBase<Derived>& x, const PatternSet& xi,
                                      const FeatureMap* phi, const HopfieldConfig& cfg) {
  cfg.validate();
  return HopfieldModel(xi, phi).step(x, cfg);
}

template <typename Derived>
RetrievalTrace retrieve(const Eigen::MatrixBase<Derived>& x0, const PatternSet& xi, const FeatureMap* phi,
                        const HopfieldConfig& cfg) {
  return HopfieldModel(xi, phi).retrieve(x0, cfg);
}

template <typename Derived>
double retrieval_error(const Eigen::MatrixBase<Derived>& x_star, const PatternSet& xi, Index mu) {
  if (mu < 0 || mu >= xi.m()) throw Error(ErrorKind::IndexOutOfRange, "pattern index out of range");
  if (x_star.size() != xi.d()) throw Error(ErrorKind::DimensionMismatch, "query / memory dimension mismatch");
  return (x_star - xi.column(mu)).norm();
}

}  // namespace uhop
