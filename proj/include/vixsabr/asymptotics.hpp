#pragma once

/// @file asymptotics.hpp
/// @brief Short-maturity VIX smile of the capped model.
///
/// As T, tau -> 0, OTM VIX option prices decay like exp(-J_V(K)/T) with
///
///     J_V(K) = 1/2 (int_{v0}^K dz / (z sigma_hat_V(z)))^2
///
/// and the implied volatility tends to log(K/v0) / int_{v0}^K dz/(z sigma_hat_V(z)).

#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "vixsabr/model.hpp"

namespace vixsabr {

namespace detail {

// sigma_V^2 = A(z)^2 + d z^2 with A(z) = omega + rho (beta-1) z and
// d = (beta-1)^2 (1 - rho^2). g = A / sigma_V lies in (-1, 1] for z >= 0.
struct ArctanhTerm {
  double g;          // A / S
  double one_minus;  // 1 - g, cancellation-free
  double one_plus;   // 1 + g, cancellation-free
  double a;          // A
  double s;          // S = sigma_V
};

inline ArctanhTerm arctanh_term(double z, const SabrParams& p) {
  const double bm1 = p.beta - 1.0;
  const double d = bm1 * bm1 * (1.0 - p.rho) * (1.0 + p.rho);
  const double a = p.omega + p.rho * bm1 * z;
  const double s = sigma_v(z, p);
  const double dz2 = d * z * z;
  ArctanhTerm t{a / s, 0.0, 0.0, a, s};
  t.one_minus = a > 0.0 ? dz2 / (s * (s + a)) : (s - a) / s;
  t.one_plus = a < 0.0 ? dz2 / (s * (s - a)) : (s + a) / s;
  assert(t.g > -1.0 && t.g <= 1.0);
  return t;
}

}  // namespace detail

/// int_lo^hi dz / (z sigma_V(z)) for 0 < lo <= hi, uncapped, via
/// (1/omega) [artanh(g(lo)) - artanh(g(hi))] evaluated without cancellation.
inline double uncapped_rate_integral(double lo, double hi, const SabrParams& p) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::domain_error("rate integral: limits must be positive");
  if (lo == hi) return 0.0;
  if (hi < lo) return -uncapped_rate_integral(hi, lo, p);
  const auto L = detail::arctanh_term(lo, p);
  const auto H = detail::arctanh_term(hi, p);
  // g(lo) - g(hi) = (A_l S_h - A_h S_l) / (S_l S_h); the numerator collapses to
  // d omega (h - l) (A_l h + A_h l) / (A_l S_h + A_h S_l) when A_l, A_h share a sign.
  double diff;
  if (L.a * H.a > 0.0) {
    const double bm1 = p.beta - 1.0;
    const double d = bm1 * bm1 * (1.0 - p.rho) * (1.0 + p.rho);
    const double num = d * p.omega * (hi - lo) * (L.a * hi + H.a * lo);
    diff = num / ((L.a * H.s + H.a * L.s) * L.s * H.s);
  } else {
    diff = L.g - H.g;
  }
  return std::log1p(2.0 * diff / (L.one_minus * H.one_plus)) / (2.0 * p.omega);
}

/// int_lo^hi dz / (z sigma_hat_V(z)): closed form below v_hat, log(hi/lo)/a above,
/// split at v_hat when the range straddles it. hi < lo returns the negated value.
inline double rate_integral(double lo, double hi, const SabrParams& p, const CapSpec& c) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::domain_error("rate integral: limits must be positive");
  if (lo == hi) return 0.0;
  if (hi < lo) return -rate_integral(hi, lo, p, c);
  const double vh = c.v_hat;
  if (hi <= vh) return uncapped_rate_integral(lo, hi, p);
  if (lo >= vh) return std::log(hi / lo) / c.a;
  return uncapped_rate_integral(lo, vh, p) + std::log(hi / vh) / c.a;
}

/// Rate function J_V(K), written branch by branch for calls (K > v0) and puts (K < v0).
inline double rate_function_jv(double K, const SabrParams& p, const CapSpec& c) {
  if (!(K > 0.0)) throw std::domain_error("rate_function_jv: strike must be positive");
  const double v0 = p.v0, vh = c.v_hat, a = c.a;
  double I = 0.0;
  if (K == v0) return 0.0;
  if (K > v0) {
    if (vh >= K)
      I = uncapped_rate_integral(v0, K, p);
    else if (vh > v0)
      I = uncapped_rate_integral(v0, vh, p) + std::log(K / vh) / a;
    else
      I = std::log(K / v0) / a;
  } else {
    if (vh <= K)
      I = std::log(K / v0) / a;
    else if (vh < v0)
      I = uncapped_rate_integral(K, vh, p) + std::log(v0 / vh) / a;
    else
      I = uncapped_rate_integral(K, v0, p);
  }
  return 0.5 * I * I;
}

/// |log(K/v0)| below which the limit smile returns its ATM value.
inline constexpr double kAtmLogStrikeThreshold = 1e-8;

/// Limiting (T -> 0) VIX implied volatility log(K/v0) / int_{v0}^K dz/(z sigma_hat_V).
inline double implied_vol_limit(double K, const SabrParams& p, const CapSpec& c) {
  if (!(K > 0.0)) throw std::domain_error("implied_vol_limit: strike must be positive");
  const double x = std::log(K / p.v0);
  if (std::abs(x) < kAtmLogStrikeThreshold) return capped_sigma_v(p.v0, p, c);
  return x / rate_integral(p.v0, K, p, c);
}

/// ATM level, skew and convexity of the limiting smile in x = log(K/v0):
/// sigma(x) = atm + skew x + convexity x^2 / 2 + O(x^3).
struct SmileExpansion {
  double atm_level;
  double skew;
  /// d^2 sigma / dx^2 at x = 0.
  double convexity;
  /// v0 (beta-1) P / (3 sigma_V^4). Often quoted as the curvature, but it is
  /// `convexity` times 2 / sigma_V(v0).
  double convexity_sigma4;
};

inline SmileExpansion smile_expansion(const SabrParams& p) {
  p.validate();
  const double v0 = p.v0, w = p.omega, r = p.rho, bm1 = p.beta - 1.0;
  const double s = sigma_v(v0, p);
  const double poly = 2.0 * w * w * w * r + bm1 * w * w * (4.0 + r * r) * v0 +
                      4.0 * bm1 * bm1 * w * r * v0 * v0 + bm1 * bm1 * bm1 * v0 * v0 * v0;
  SmileExpansion e{};
  e.atm_level = s;
  e.skew = v0 * bm1 * (r * w + bm1 * v0) / (2.0 * s);
  e.convexity = v0 * bm1 * poly / (6.0 * s * s * s);
  e.convexity_sigma4 = v0 * bm1 * poly / (3.0 * s * s * s * s);
  return e;
}

/// Same as smile_expansion(p) but insists the volatility cap does not bind at v0.
inline SmileExpansion smile_expansion(const SabrParams& p, const CapSpec& c) {
  if (!(c.v_hat > p.v0)) throw std::domain_error("smile_expansion: cap binds at v0 (v_hat <= v0)");
  return smile_expansion(p);
}

struct AsymptoticSmilePoint {
  double log_strike;
  double strike;
  double implied_vol;
  double jv;
};

inline std::vector<AsymptoticSmilePoint> asymptotic_smile(std::span<const double> strikes,
                                                          const SabrParams& p, const CapSpec& c) {
  std::vector<AsymptoticSmilePoint> out;
  out.reserve(strikes.size());
  for (double K : strikes)
    out.push_back({std::log(K / p.v0), K, implied_vol_limit(K, p, c), rate_function_jv(K, p, c)});
  return out;
}

}  // namespace vixsabr
