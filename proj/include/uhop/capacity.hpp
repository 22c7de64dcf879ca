#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/kernel.hpp"
#include "uhop/patterns.hpp"

namespace uhop {

// ---------------------------------------------------------------------------
// Lambert W, principal branch

/// W0(x) for x >= -1/e via Halley iteration. Initial guesses: branch-point
/// series near -1/e, x itself for small |x|, log x - log log x for large x.
inline double lambert_w0(double x) {
  constexpr double kInvE = 1.0 / std::numbers::e;
  if (std::isnan(x)) throw Error(ErrorKind::OutOfDomain, "lambert_w0: NaN");
  if (x < -kInvE) {
    // Tolerate rounding in callers computing -1/e themselves.
    if (x >= -kInvE * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) return -1.0;
    throw Error(ErrorKind::OutOfDomain, "lambert_w0 is only defined for x >= -1/e");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.32) {
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < 3.0) {
    w = std::log1p(x);
    if (x < 0.0) w = x * (1.0 - x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return std::max(w, -1.0);
}

/// W0(exp(y)) without forming exp(y); solves w + log w = y when exp(y)
/// would overflow.
inline double lambert_w0_exp(double y) {
  if (y < 700.0) return lambert_w0(std::exp(y));
  double w = y - std::log(y);
  for (int it = 0; it < 100; ++it) {
    const double f = w + std::log(w) - y;
    const double dw = f / (1.0 + 1.0 / w);
    w -= dw;
    if (std::abs(dw) <= 4.0 * std::numeric_limits<double>::epsilon() * w) break;
  }
  return w;
}

// ---------------------------------------------------------------------------
// High-probability capacity lower bound

struct CapacityInputs {
  int d_phi = 2;
  double beta = 1.0;
  double p_fail = 0.01;
  double r_phi = 0.5;

  void validate() const {
    detail::require(d_phi >= 2, ErrorKind::InvalidArgument, "d_phi must be >= 2");
    detail::require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
    detail::require(p_fail > 0.0 && p_fail < 1.0, ErrorKind::InvalidArgument, "p must lie in (0, 1)");
    detail::require(r_phi > 0.0, ErrorKind::InvalidArgument, "R_phi must be positive");
  }
};

enum class LogArgumentPolicy {
  /// Use |2(sqrt(p) - 1)| / R and flag the sign change.
  Guarded,
  /// Reject a non-positive argument with InvalidLogArgument.
  Strict,
};

struct CapacityBound {
  double bound = 0.0;  // sqrt(p) * C^{(D-1)/4}
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double raw_log_argument = 0.0;  // 2(sqrt(p) - 1) / R as printed
  std::vector<std::string> flags;
};

/// M >= sqrt(p) C^{(D-1)/4},  C = b / W0(exp(a + ln b)),
/// a = 4/(D-1) (ln(2(sqrt(p)-1)/R) + 1),  b = 4 beta / (5 (D-1)).
inline CapacityBound capacity_lower_bound(const CapacityInputs& in,
                                          LogArgumentPolicy policy = LogArgumentPolicy::Guarded) {
  in.validate();
  const double dm1 = static_cast<double>(in.d_phi - 1);
  const double sp = std::sqrt(in.p_fail);
  CapacityBound out;
  out.raw_log_argument = 2.0 * (sp - 1.0) / in.r_phi;
  double arg = out.raw_log_argument;
  if (!(arg > 0.0)) {
    if (policy == LogArgumentPolicy::Strict) {
      throw Error(ErrorKind::InvalidLogArgument, "2(sqrt(p)-1)/R_phi is not positive for p < 1");
    }
    arg = std::abs(arg);
    out.flags.emplace_back("log_argument_sign_guarded");
  }
  out.a = 4.0 / dm1 * (std::log(arg) + 1.0);
  out.b = 4.0 * in.beta / (5.0 * dm1);
  const double w = lambert_w0_exp(out.a + std::log(out.b));
  out.c = out.b / w;
  out.bound = sp * std::pow(out.c, dm1 / 4.0);
  return out;
}

/// The classical MHM bound: same formula in pattern dimension d with the
/// raw-pattern radius R.
inline CapacityBound mhm_capacity_lower_bound(int d, double beta, double p_fail, double r,
                                              LogArgumentPolicy policy = LogArgumentPolicy::Guarded) {
  return capacity_lower_bound({d, beta, p_fail, r}, policy);
}

/// R = sqrt(delta_min / 2) for unit patterns.
inline double radius_from_separation(double delta_min) { return 0.5 * std::sqrt(2.0 * delta_min); }

// ---------------------------------------------------------------------------
// Well-separation and memory codes

/// Threshold beta^{-1} ln(2(M-1)/R), plus 2R in the strict variant.
inline double well_separation_threshold(Index m, double r_phi, double beta, bool strict = false) {
  return std::log(2.0 * static_cast<double>(m - 1) / r_phi) / beta + (strict ? 2.0 * r_phi : 0.0);
}

namespace detail {

inline SeparationStats checked_stats_of_features(const Matrix& features, bool unit) {
  SeparationStats st = separation_stats_of_features(features, unit);
  if (!(st.r_phi > 0.0)) throw Error(ErrorKind::DegenerateRadius, "R_phi = 0: two memories share a feature vector");
  return st;
}

}  // namespace detail

inline bool well_separated(const PatternSet& xi, const FeatureMap& phi, double beta, Index mu, bool strict = false) {
  detail::require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
  if (mu < 0 || mu >= xi.m()) throw Error(ErrorKind::IndexOutOfRange, "pattern index out of range");
  if (xi.m() < 2) throw Error(ErrorKind::SinglePattern, "well-separation needs at least two patterns");
  const SeparationStats st = detail::checked_stats_of_features(phi.features(xi), phi.output_normalize());
  return st.delta_per_pattern(mu) >= well_separation_threshold(xi.m(), st.r_phi, beta, strict);
}

/// Every column of `features` (points on the sphere) is well separated.
inline bool is_memory_code(const Matrix& features, double beta, bool strict = false) {
  detail::require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
  if (features.cols() < 2) throw Error(ErrorKind::SinglePattern, "memory code needs at least two points");
  const SeparationStats st = detail::checked_stats_of_features(features, true);
  const double threshold = well_separation_threshold(features.cols(), st.r_phi, beta, strict);
  return (st.delta_per_pattern.array() >= threshold).all();
}

inline bool is_memory_code(const PatternSet& xi, const FeatureMap& phi, double beta, bool strict = false) {
  detail::require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
  if (xi.m() < 2) throw Error(ErrorKind::SinglePattern, "memory code needs at least two patterns");
  const SeparationStats st = detail::checked_stats_of_features(phi.features(xi), phi.output_normalize());
  const double threshold = well_separation_threshold(xi.m(), st.r_phi, beta, strict);
  return (st.delta_per_pattern.array() >= threshold).all();
}

// ---------------------------------------------------------------------------
// Separation sandwich and optimal-capacity estimates

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
  /// Asymptotic estimates drop o(1) factors and need not satisfy lower <= upper.
  bool asymptotic_estimate = false;

  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// Bounds on the best achievable delta_min for M* points on S^{D-1}:
///   lower = 1/2 (sqrt(pi)/M* * G((D+1)/2) / G(D/2 + 1))^{2/(D-1)}
///   upper = 2 (2 sqrt(pi)/M* * G((D+1)/2) / G(D/2))^{1/(D-1)}
/// evaluated through lgamma.
inline BoundPair separation_sandwich(long long m_star, int d_phi) {
  detail::require(m_star >= 2, ErrorKind::InvalidArgument, "M* must be >= 2");
  detail::require(d_phi >= 2, ErrorKind::InvalidArgument, "d_phi must be >= 2");
  const double d = d_phi;
  const double log_m = std::log(static_cast<double>(m_star));
  const double half_log_pi = 0.5 * std::log(std::numbers::pi);
  const double lg_num = std::lgamma(0.5 * (d + 1.0));
  const double log_lower_inner = half_log_pi - log_m + lg_num - std::lgamma(0.5 * d + 1.0);
  const double log_upper_inner = std::log(2.0) + half_log_pi - log_m + lg_num - std::lgamma(0.5 * d);
  BoundPair out;
  out.lower = 0.5 * std::exp(2.0 / (d - 1.0) * log_lower_inner);
  out.upper = 2.0 * std::exp(log_upper_inner / (d - 1.0));
  if (out.lower > out.upper) throw std::logic_error("separation_sandwich: lower > upper");
  return out;
}

/// Asymptotic estimates of the optimal capacity at angular separation theta:
///   lower = sqrt(2 pi D) cos(theta) / sin(theta)^{D-1}
///   upper = exp(D * phi(theta)),  phi(theta) = -log sin(theta)
inline BoundPair optimal_capacity_bounds(int d_phi, double theta) {
  detail::require(d_phi >= 2, ErrorKind::InvalidArgument, "d_phi must be >= 2");
  detail::require(theta > 0.0 && theta < 0.5 * std::numbers::pi, ErrorKind::InvalidArgument,
                  "theta must lie in (0, pi/2)");
  const double d = d_phi;
  const double log_sin = std::log(std::sin(theta));
  BoundPair out;
  out.lower = std::sqrt(2.0 * std::numbers::pi * d) * std::cos(theta) * std::exp(-(d - 1.0) * log_sin);
  out.upper = std::exp(-d * log_sin);
  out.asymptotic_estimate = true;
  return out;
}

}  // namespace uhop
