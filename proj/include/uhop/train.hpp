#pragma once

#include <Eigen/SVD>

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/kernel.hpp"
#include "uhop/patterns.hpp"
#include "uhop/rng.hpp"

namespace uhop {

// Separation learning: the average separation loss, its gradient with
// respect to W, projected gradient steps and the U-Hop+ training loop.

enum class Projection {
  Frobenius,          // W / |W|_F
  ColumnOrthonormal,  // polar factor U V^T of W (needs D_phi <= d)
};

struct StepRule {
  enum class Kind { Backtracking, Provided } kind = Kind::Backtracking;
  double lipschitz = 0.0;  // G, used when kind == Provided

  static StepRule backtracking() { return {}; }
  static StepRule provided(double g) { return {Kind::Provided, g}; }
};

struct TrainConfig {
  int iters = 20;
  double lr = 0.1;
  double tau = 1.0;
  StepRule step_rule{};
  std::uint64_t seed = 0;
  bool output_normalize = true;
  Projection projection = Projection::Frobenius;

  void validate() const {
    detail::require(iters >= 0, ErrorKind::InvalidArgument, "iters must be >= 0");
    detail::require(lr > 0.0, ErrorKind::InvalidArgument, "learning rate must be positive");
    detail::require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
    if (step_rule.kind == StepRule::Kind::Provided) {
      detail::require(step_rule.lipschitz > 0.0, ErrorKind::InvalidArgument, "Lipschitz constant must be positive");
    }
  }
};

/// Per-iteration values, measured after each step. The initial_* fields hold
/// the same quantities at the projected starting point.
struct TrainLog {
  std::vector<double> loss_per_iter;
  std::vector<double> hardmax_per_iter;
  std::vector<double> delta_min_per_iter;
  std::vector<double> step_size_per_iter;
  double initial_loss = 0.0;
  double initial_hardmax = 0.0;
  double initial_delta_min = 0.0;
};

namespace detail {

/// Features of the columns of xi under W, optionally unit-normalized, along
/// with the pre-normalization norms.
inline Matrix feature_columns(const Matrix& xi, const Matrix& w, bool normalize, Vector* norms = nullptr) {
  if (w.rows() != xi.rows()) throw Error(ErrorKind::DimensionMismatch, "W rows must equal pattern dimension");
  Matrix y = w.transpose() * xi;
  if (norms != nullptr) norms->setOnes(y.cols());
  if (normalize) {
    for (Index j = 0; j < y.cols(); ++j) {
      const double n = y.col(j).norm();
      if (n < kZeroNorm) throw Error(ErrorKind::ZeroImage, "W^T xi vanishes for pattern " + std::to_string(j));
      y.col(j) /= n;
      if (norms != nullptr) (*norms)(j) = n;
    }
  }
  return y;
}

inline double mean_row_lse(const Matrix& gram, double tau) {
  double total = 0.0;
  for (Index mu = 0; mu < gram.rows(); ++mu) total += log_sum_exp(gram.row(mu), 1.0 / tau);
  return total / static_cast<double>(gram.rows());
}

inline double max_off_diagonal(const Matrix& gram) {
  double best = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < gram.cols(); ++j) {
    for (Index i = 0; i < gram.rows(); ++i) {
      if (i != j) best = std::max(best, gram(i, j));
    }
  }
  return best;
}

inline double separation_loss_w(const Matrix& xi, const Matrix& w, double tau, bool normalize) {
  const Matrix f = feature_columns(xi, w, normalize);
  return mean_row_lse(f.transpose() * f, tau);
}

/// Separation loss minus its constant part. With unit features K_mu_mu = 1, so
///   L = 1/tau + mean_mu log1p(sum_{nu != mu} exp((K_mu_nu - 1) / tau)),
/// and the second term keeps full relative precision when it is tiny next to
/// 1/tau. Without normalization there is no constant part and L is returned.
inline double separation_excess_w(const Matrix& xi, const Matrix& w, double tau, bool normalize) {
  if (!normalize) return separation_loss_w(xi, w, tau, false);
  const Matrix f = feature_columns(xi, w, true);
  const Matrix gram = f.transpose() * f;
  const Index m = gram.rows();
  if (m < 2) return 0.0;
  double total = 0.0;
  Vector a(m - 1);
  for (Index mu = 0; mu < m; ++mu) {
    for (Index nu = 0, k = 0; nu < m; ++nu) {
      if (nu != mu) a(k++) = (gram(mu, nu) - 1.0) / tau;
    }
    const double s = log_sum_exp(a);
    total += s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  }
  return total / static_cast<double>(m);
}

/// Loss and dL/dW in one pass.
inline std::pair<double, Matrix> loss_and_gradient(const Matrix& xi, const Matrix& w, double tau, bool normalize) {
  Vector norms;
  const Matrix f = feature_columns(xi, w, normalize, &norms);
  const Index m = f.cols();
  const Matrix gram = f.transpose() * f;

  // S = dL/dG = rowsoftmax(G / tau) / (M tau)
  Matrix s(m, m);
  double loss = 0.0;
  for (Index mu = 0; mu < m; ++mu) {
    const double lse = log_sum_exp(gram.row(mu), 1.0 / tau);
    loss += lse;
    for (Index nu = 0; nu < m; ++nu) s(mu, nu) = std::exp(gram(mu, nu) / tau - lse);
  }
  loss /= static_cast<double>(m);
  s /= static_cast<double>(m) * tau;

  // dL/dF = F (S + S^T); then back through the normalization and W^T Xi.
  Matrix dy = f * (s + s.transpose());
  if (normalize) {
    for (Index mu = 0; mu < m; ++mu) {
      const double radial = f.col(mu).dot(dy.col(mu));
      dy.col(mu) = (dy.col(mu) - radial * f.col(mu)) / norms(mu);
    }
  }
  Matrix grad = xi * dy.transpose();
  return {loss, std::move(grad)};
}

inline Matrix project(const Matrix& w, Projection projection) {
  switch (projection) {
    case Projection::Frobenius: {
      const double n = w.norm();
      if (!(n > kZeroNorm)) throw Error(ErrorKind::ZeroMatrix, "cannot project a zero matrix onto the unit sphere");
      return w / n;
    }
    case Projection::ColumnOrthonormal: {
      if (w.cols() > w.rows()) throw Error(ErrorKind::InvalidArgument, "column-orthonormal projection needs D_phi <= d");
      if (!(w.norm() > kZeroNorm)) throw Error(ErrorKind::ZeroMatrix, "cannot orthonormalize a zero matrix");
      Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
      return svd.matrixU() * svd.matrixV().transpose();
    }
  }
  return w;
}

}  // namespace detail

/// L = (1/M) sum_mu log sum_nu exp(<Phi(xi_mu), Phi(xi_nu)> / tau)
inline double separation_loss(const PatternSet& xi, const FeatureMap& phi, double tau) {
  detail::require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
  return detail::separation_loss_w(xi.matrix(), phi.w(), tau, phi.output_normalize());
}

/// max_{mu != nu} <Phi(xi_mu), Phi(xi_nu)>
inline double hardmax_loss(const PatternSet& xi, const FeatureMap& phi) {
  if (xi.m() < 2) throw Error(ErrorKind::SinglePattern, "hardmax loss needs at least two patterns");
  const Matrix f = phi.features(xi);
  return detail::max_off_diagonal(f.transpose() * f);
}

/// Which per-pattern term enters L0 = tau * log sum_mu l_mu.
enum class HelperForm {
  /// l_mu = log(1 + sum_{nu != mu} exp((K_mu_nu - 1) / tau)), the self term
  /// 1/tau removed. This is the quantity sandwiched between
  /// hardmax - 1 - tau log M and hardmax - 1 + tau log(M(M-1)).
  Shifted,
  /// l_mu = log sum_nu exp(K_mu_nu / tau), the separation-loss term itself.
  AsWritten,
};

inline double helper_loss_l0(const PatternSet& xi, const FeatureMap& phi, double tau,
                             HelperForm form = HelperForm::Shifted) {
  detail::require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
  const Matrix f = phi.features(xi);
  const Matrix gram = f.transpose() * f;
  const Index m = gram.rows();
  if (form == HelperForm::AsWritten) {
    double sum = 0.0;
    for (Index mu = 0; mu < m; ++mu) sum += log_sum_exp(gram.row(mu), 1.0 / tau);
    return tau * std::log(sum);
  }
  // Sum of log1p(sum_{nu != mu} exp(a_mu_nu)) with a = (K - 1)/tau <= 0 is
  // evaluated in the log domain: log l_mu via log(log1p(e^s)) with s the
  // log-sum-exp of the off-diagonal row, then combined with another lse.
  if (m < 2) return -std::numeric_limits<double>::infinity();
  Vector log_terms(m);
  for (Index mu = 0; mu < m; ++mu) {
    Vector a(m - 1);
    for (Index nu = 0, k = 0; nu < m; ++nu) {
      if (nu != mu) a(k++) = (gram(mu, nu) - 1.0) / tau;
    }
    const double s = log_sum_exp(a);
    // log(log1p(e^s)): for s << 0, log1p(e^s) ~ e^s so the log is ~ s.
    log_terms(mu) = s < -30.0 ? s + std::log1p(-0.5 * std::exp(s)) : std::log(std::log1p(std::exp(s)));
  }
  return tau * log_sum_exp(log_terms);
}

/// dL/dW through the full composed map (including output normalization).
inline Matrix loss_gradient(const PatternSet& xi, const Matrix& w, double tau, bool output_normalize = true) {
  detail::require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
  return detail::loss_and_gradient(xi.matrix(), w, tau, output_normalize).second;
}

/// W' = (W - lr * grad L) / |W - lr * grad L|_F
inline Matrix pgd_step(const Matrix& w, double lr, const PatternSet& xi, double tau, bool output_normalize = true,
                       Projection projection = Projection::Frobenius) {
  detail::require(lr >= 0.0, ErrorKind::InvalidArgument, "learning rate must be non-negative");
  const Matrix g = loss_gradient(xi, w, tau, output_normalize);
  return detail::project(w - lr * g, projection);
}

/// Gaussian entries scaled to unit Frobenius norm.
inline Matrix initial_weights(Index d, Index d_phi, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w = gaussian_matrix(d, d_phi, rng);
  return w / w.norm();
}

/// U-Hop+: N projected gradient steps on the average separation loss.
///
/// Step size: with StepRule::Provided(G) the step is min(lr, 1/G). With
/// backtracking each iteration starts at lr and halves until
///   L(W') <= L(W) + c <grad, W' - W>  and  L(W') <= L(W),   c = 1e-4,
/// keeping W unchanged if 60 halvings do not succeed, so the logged loss is
/// non-increasing.
inline std::pair<FeatureMap, TrainLog> uhop_plus(const PatternSet& xi, const Matrix& w0, const TrainConfig& cfg) {
  cfg.validate();
  if (w0.rows() != xi.d()) throw Error(ErrorKind::DimensionMismatch, "W0 rows must equal pattern dimension");
  if (!FeatureMap::has_full_column_rank(w0)) throw Error(ErrorKind::RankDeficient, "W0 must have full column rank");

  const Matrix& x = xi.matrix();
  const bool norm = cfg.output_normalize;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;

  auto hardmax_and_delta = [&](const Matrix& w) -> std::pair<double, double> {
    if (xi.m() < 2) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const Matrix f = detail::feature_columns(x, w, norm);
    const double hm = detail::max_off_diagonal(f.transpose() * f);
    const SeparationStats st = separation_stats_of_features(f, norm);
    return {hm, st.delta_min};
  };

  // Line searches compare the excess loss; the logged loss adds the constant back.
  const double offset = norm ? 1.0 / cfg.tau : 0.0;
  auto objective = [&](const Matrix& w) { return detail::separation_excess_w(x, w, cfg.tau, norm); };

  Matrix w = detail::project(w0, cfg.projection);
  TrainLog log;
  double current = objective(w);
  log.initial_loss = offset + current;
  std::tie(log.initial_hardmax, log.initial_delta_min) = hardmax_and_delta(w);

  for (int t = 0; t < cfg.iters; ++t) {
    const Matrix grad = detail::loss_and_gradient(x, w, cfg.tau, norm).second;
    double step = 0.0;
    if (cfg.step_rule.kind == StepRule::Kind::Provided) {
      step = std::min(cfg.lr, 1.0 / cfg.step_rule.lipschitz);
      w = detail::project(w - step * grad, cfg.projection);
      current = objective(w);
    } else {
      double gamma = cfg.lr;
      for (int h = 0; h < kMaxHalvings; ++h, gamma *= 0.5) {
        Matrix cand = detail::project(w - gamma * grad, cfg.projection);
        const double cand_value = objective(cand);
        const double directional = (grad.array() * (cand - w).array()).sum();
        if (cand_value <= current + kArmijo * directional && cand_value <= current) {
          w = std::move(cand);
          current = cand_value;
          step = gamma;
          break;
        }
      }
    }
    const double new_loss = offset + current;
    const auto [hm, dm] = hardmax_and_delta(w);
    log.loss_per_iter.push_back(new_loss);
    log.hardmax_per_iter.push_back(hm);
    log.delta_min_per_iter.push_back(dm);
    log.step_size_per_iter.push_back(step);
  }
  return {FeatureMap(w, norm), std::move(log)};
}

}  // namespace uhop
