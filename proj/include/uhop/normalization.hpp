#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "uhop/core.hpp"
#include "uhop/error.hpp"

namespace uhop {

enum class NormalizationKind { Softmax, Sparsemax, Entmax15 };

constexpr std::string_view to_string(NormalizationKind k) {
  switch (k) {
    case NormalizationKind::Softmax: return "softmax";
    case NormalizationKind::Sparsemax: return "sparsemax";
    case NormalizationKind::Entmax15: return "entmax15";
  }
  return "?";
}

inline NormalizationKind parse_normalization(std::string_view s) {
  if (s == "softmax") return NormalizationKind::Softmax;
  if (s == "sparsemax") return NormalizationKind::Sparsemax;
  if (s == "entmax15" || s == "entmax" || s == "1.5-entmax") return NormalizationKind::Entmax15;
  throw Error(ErrorKind::InvalidArgument, "unknown normalization '" + std::string(s) + "'");
}

/// The probability map used by the update rule, plus the threshold under
/// which a softmax weight counts as zero when measuring support size.
struct Normalization {
  NormalizationKind kind = NormalizationKind::Softmax;
  double softmax_support_threshold = 0.01;

  void validate() const {
    detail::require(softmax_support_threshold > 0.0 && softmax_support_threshold < 1.0,
                    ErrorKind::InvalidArgument, "support threshold must lie in (0, 1)");
  }
};

template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& z, double beta) {
  detail::require(beta > 0.0, ErrorKind::InvalidArgument, "softmax: beta must be positive");
  detail::require(all_finite(z), ErrorKind::NonFinite, "softmax: non-finite input");
  Vector p = (beta * (z.array() - z.maxCoeff())).exp().matrix();
  p /= p.sum();
  return p;
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
/// Ties in the sort keep the original index order.
template <typename Derived>
Vector sparsemax(const Eigen::MatrixBase<Derived>& z) {
  detail::require(all_finite(z), ErrorKind::NonFinite, "sparsemax: non-finite input");
  const Index n = z.size();
  detail::require(n >= 1, ErrorKind::InvalidArgument, "sparsemax: empty input");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return z(a) > z(b); });

  double cumsum = 0.0;
  double tau = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double zk = z(order[static_cast<std::size_t>(k)]);
    cumsum += zk;
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (zk > t) tau = t;  // support condition 1 + k z_(k) > sum_{j<=k} z_(j)
    else break;
  }
  Vector p(n);
  for (Index i = 0; i < n; ++i) p(i) = std::max(z(i) - tau, 0.0);
  return p;
}

/// 1.5-entmax: p_i = max(0, z_i/2 - tau)^2 with tau found by bisection so
/// that sum(p) = 1 within 1e-10.
template <typename Derived>
Vector entmax15(const Eigen::MatrixBase<Derived>& z) {
  detail::require(all_finite(z), ErrorKind::NonFinite, "entmax15: non-finite input");
  const Index n = z.size();
  detail::require(n >= 1, ErrorKind::InvalidArgument, "entmax15: empty input");
  const Vector half = 0.5 * z;
  auto mass = [&](double tau) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double v = half(i) - tau;
      if (v > 0.0) s += v * v;
    }
    return s;
  };
  // mass(lo) >= 1 since the top entry contributes at least 1; mass(hi) = 0.
  double lo = half.minCoeff() - 1.0;
  double hi = half.maxCoeff();
  double tau = 0.5 * (lo + hi);
  bool done = false;
  for (int it = 0; it < 200; ++it) {
    tau = 0.5 * (lo + hi);
    const double s = mass(tau);
    if (std::abs(s - 1.0) <= 1e-12 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(tau))) {
      done = true;
      break;
    }
    if (s > 1.0) lo = tau;
    else hi = tau;
  }
  const double s = mass(tau);
  if (!done && std::abs(s - 1.0) > 1e-10) {
    throw Error(ErrorKind::BisectionNoConverge, "entmax15: threshold bisection did not converge");
  }
  if (std::abs(s - 1.0) > 1e-10) {
    throw Error(ErrorKind::BisectionNoConverge, "entmax15: bracket collapsed away from unit mass");
  }
  Vector p(n);
  for (Index i = 0; i < n; ++i) {
    const double v = half(i) - tau;
    p(i) = v > 0.0 ? v * v : 0.0;
  }
  p /= s;
  return p;
}

/// Applies the configured map to beta * z.
template <typename Derived>
Vector normalize(const Normalization& norm, const Eigen::MatrixBase<Derived>& z, double beta) {
  switch (norm.kind) {
    case NormalizationKind::Softmax: return softmax(z, beta);
    case NormalizationKind::Sparsemax: return sparsemax((beta * z).eval());
    case NormalizationKind::Entmax15: return entmax15((beta * z).eval());
  }
  return {};
}

}  // namespace uhop
