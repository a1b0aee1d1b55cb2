#pragma once

/// @file model.hpp
/// @brief SABR parameters and the coefficient functions of the effective
/// log-normal volatility process v_t = sigma_t S_t^(beta-1).
///
/// Under SABR, v_t solves the one-dimensional SDE
///
///     dv_t / v_t = sigma_V(v_t) dW_t + mu_V(v_t) dt
///
/// with
///
///     sigma_V(v) = sqrt(omega^2 + (beta-1)^2 v^2 + 2 rho (beta-1) omega v)
///     mu_V(v)    = v (beta-1) [ (beta-2) v / 2 + rho omega ].
///
/// The capped variant clamps sigma_V at `a` and mu_V to [-b, b], which removes
/// the finite-time explosion of the uncapped process.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vixsabr {

/// Model parameters. All levels are annualized.
struct SabrParams {
  double beta{0.5};   ///< CEV exponent, 0 <= beta < 1
  double rho{-0.7};   ///< spot/vol correlation, -1 < rho < 1
  double omega{1.0};  ///< vol-of-vol per sqrt(year), > 0
  double v0{0.1};     ///< initial effective volatility, > 0

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const {
    if (!(beta >= 0.0 && beta < 1.0))
      throw std::invalid_argument("beta must lie in [0, 1), got " + std::to_string(beta));
    if (!(rho > -1.0 && rho < 1.0))
      throw std::invalid_argument("rho must lie in (-1, 1), got " + std::to_string(rho));
    if (!(omega > 0.0 && std::isfinite(omega)))
      throw std::invalid_argument("omega must be positive, got " + std::to_string(omega));
    if (!(v0 > 0.0 && std::isfinite(v0)))
      throw std::invalid_argument("v0 must be positive, got " + std::to_string(v0));
  }

  static SabrParams make(double beta, double rho, double omega, double v0) {
    SabrParams p{beta, rho, omega, v0};
    p.validate();
    return p;
  }

  /// True when beta < 1 and rho < 0; the explosion analysis relies on it.
  [[nodiscard]] bool assumption_holds() const noexcept {
    return beta >= 0.0 && beta < 1.0 && rho < 0.0 && rho > -1.0;
  }

  /// sqrt(1 - rho^2)
  [[nodiscard]] double rho_perp() const noexcept { return std::sqrt((1.0 - rho) * (1.0 + rho)); }
};

/// Drift coefficients of dv = (alpha v^3 + delta v^2) dt + v sigma_V(v) dW.
struct DriftCoefficients {
  double alpha;
  double delta;
};

inline DriftCoefficients alpha_delta(const SabrParams& p) noexcept {
  const double one_minus_beta = 1.0 - p.beta;
  return {0.5 * one_minus_beta * (2.0 - p.beta), -one_minus_beta * p.rho * p.omega};
}

/// sigma_V(v)^2. Positive for every real v when |rho| < 1.
inline double sigma_v_squared(double v, const SabrParams& p) noexcept {
  const double bm1 = p.beta - 1.0;
  return p.omega * p.omega + bm1 * bm1 * v * v + 2.0 * p.rho * bm1 * p.omega * v;
}

inline double sigma_v(double v, const SabrParams& p) {
  const double radicand = sigma_v_squared(v, p);
  if (radicand < 0.0)
    throw std::domain_error("sigma_V radicand is negative; |rho| must be < 1");
  return std::sqrt(radicand);
}

inline double mu_v(double v, const SabrParams& p) noexcept {
  const double bm1 = p.beta - 1.0;
  return v * bm1 * (0.5 * (p.beta - 2.0) * v + p.rho * p.omega);
}

/// Caps on the volatility (a) and drift (b) of the capped process, plus the
/// level v_hat above which the volatility cap binds.
struct CapSpec {
  double a{2.0};
  double b{1.0};
  double v_hat{0.0};

  /// Builds a cap spec and derives v_hat. Requires a > omega and b > 0.
  static CapSpec make(double a, double b, const SabrParams& p) {
    if (!(a > p.omega))
      throw std::invalid_argument("volatility cap a must exceed omega, got a=" + std::to_string(a));
    if (!(b > 0.0))
      throw std::invalid_argument("drift cap b must be positive, got b=" + std::to_string(b));
    return CapSpec{a, b, switch_level(a, p)};
  }

  /// Level where sigma_V reaches a: (rho omega + sqrt(a^2 + (rho^2-1) omega^2)) / (1-beta).
  static double switch_level(double a, const SabrParams& p) noexcept {
    const double disc = a * a + (p.rho * p.rho - 1.0) * p.omega * p.omega;
    return (p.rho * p.omega + std::sqrt(disc)) / (1.0 - p.beta);
  }
};

/// min(a, sigma_V(v)); equals sigma_V below v_hat and a at or above it.
inline double capped_sigma_v(double v, const SabrParams& p, const CapSpec& c) {
  if (v >= c.v_hat) return c.a;
  return std::min(c.a, sigma_v(v, p));
}

/// mu_V clamped to [-b, b], sign preserved.
inline double capped_mu_v(double v, const SabrParams& p, const CapSpec& c) noexcept {
  const double m = mu_v(v, p);
  return m > 0.0 ? std::min(c.b, m) : std::max(-c.b, m);
}

}  // namespace vixsabr
