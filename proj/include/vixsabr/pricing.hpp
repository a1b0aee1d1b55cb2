#pragma once

/// @file pricing.hpp
/// @brief Black (forward) pricing, implied-volatility inversion and the MC VIX smile.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vixsabr/asymptotics.hpp"
#include "vixsabr/mc.hpp"
#include "vixsabr/model.hpp"
#include "vixsabr/parallel.hpp"

namespace vixsabr {

inline double norm_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double norm_pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Undiscounted Black price with forward F. vol = 0 gives the intrinsic value.
inline double bs_price(double K, double T, double F, double vol, OptionKind kind) {
  if (!(K > 0.0) || !(T > 0.0) || !(F > 0.0) || !(vol >= 0.0))
    throw std::invalid_argument("bs_price: K, T, F must be positive and vol non-negative");
  const double s = vol * std::sqrt(T);
  if (s == 0.0) return payoff(F, K, kind);
  const double d1 = std::log(F / K) / s + 0.5 * s;
  const double d2 = d1 - s;
  if (kind == OptionKind::Call) return F * norm_cdf(d1) - K * norm_cdf(d2);
  return K * norm_cdf(-d2) - F * norm_cdf(-d1);
}

inline double bs_vega(double K, double T, double F, double vol) {
  const double s = vol * std::sqrt(T);
  if (s == 0.0) return 0.0;
  const double d1 = std::log(F / K) / s + 0.5 * s;
  return F * norm_pdf(d1) * std::sqrt(T);
}

enum class PriceBound { Below, Above };

/// Raised when a price lies outside the no-arbitrage range of the Black model.
class ImpliedVolOutOfBounds : public std::domain_error {
 public:
  ImpliedVolOutOfBounds(PriceBound b, const std::string& what) : std::domain_error(what), bound_(b) {}
  [[nodiscard]] PriceBound bound() const noexcept { return bound_; }

 private:
  PriceBound bound_;
};

/// Inverts bs_price for the volatility: bracketed Newton with bisection
/// fallback. Residual |bs_price(result) - price| <= 1e-12 F.
inline double implied_vol(double price, double K, double T, double F, OptionKind kind) {
  if (!(K > 0.0) || !(T > 0.0) || !(F > 0.0)) throw std::invalid_argument("implied_vol: K, T, F must be positive");
  const double lower = payoff(F, K, kind);
  const double upper = kind == OptionKind::Call ? F : K;
  if (!(price > lower))
    throw ImpliedVolOutOfBounds(PriceBound::Below, "implied_vol: price at or below intrinsic value");
  if (!(price < upper))
    throw ImpliedVolOutOfBounds(PriceBound::Above, "implied_vol: price at or above the upper bound");

  const double tol = 1e-12 * F;
  double lo = 0.0, hi = 1.0;
  while (bs_price(K, T, F, hi, kind) < price) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw ImpliedVolOutOfBounds(PriceBound::Above, "implied_vol: volatility unbounded");
  }
  // Brenner-Subrahmanyam start, kept inside the bracket
  double vol = std::sqrt(2.0 * std::numbers::pi / T) * (price - lower) / F;
  if (!(vol > lo && vol < hi)) vol = 0.5 * (lo + hi);

  for (int it = 0; it < 200; ++it) {
    const double f = bs_price(K, T, F, vol, kind) - price;
    if (std::abs(f) <= 0.5 * tol) return vol;
    if (f < 0.0)
      lo = vol;
    else
      hi = vol;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double vega = bs_vega(K, T, F, vol);
    double next = vega > 0.0 ? vol - f / vega : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    vol = next;
  }
  return vol;
}

// ---------------------------------------------------------------------------
// Smile from Monte Carlo paths
// ---------------------------------------------------------------------------

enum class SmileStatus { Ok, BelowIntrinsic, AboveUpperBound };

inline std::string_view to_string(SmileStatus s) noexcept {
  switch (s) {
    case SmileStatus::Ok: return "ok";
    case SmileStatus::BelowIntrinsic: return "below_intrinsic";
    case SmileStatus::AboveUpperBound: return "above_upper_bound";
  }
  return "?";
}

struct SmilePoint {
  double strike{0.0};
  double log_strike{0.0};  ///< log(K / F)
  OptionKind kind{OptionKind::Call};
  McEstimate price;  ///< discounted
  double implied_vol{std::numeric_limits<double>::quiet_NaN()};
  double iv_lo{std::numeric_limits<double>::quiet_NaN()};  ///< from price - 1 se
  double iv_hi{std::numeric_limits<double>::quiet_NaN()};  ///< from price + 1 se
  SmileStatus status{SmileStatus::Ok};
};

/// Prices the OTM side (call for K > F, put for K <= F), inverts with forward F,
/// and maps price -/+ one standard error to an implied-vol band. Failed
/// inversions leave NaN and a status instead of throwing.
inline std::vector<SmilePoint> smile_from_paths(const PathSet& paths, std::span<const double> strikes,
                                                double T, double r, double F, unsigned threads = 1) {
  if (!(F > 0.0)) throw std::invalid_argument("smile_from_paths: forward must be positive");
  std::vector<SmilePoint> out(strikes.size());
  const double growth = std::exp(r * T);
  parallel_for(strikes.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SmilePoint& pt = out[i];
      pt.strike = strikes[i];
      pt.log_strike = std::log(pt.strike / F);
      pt.kind = pt.strike > F ? OptionKind::Call : OptionKind::Put;
      pt.price = price_vix_option(paths, pt.strike, pt.kind, r, T);
      const double undiscounted = pt.price.value * growth;
      const double se = pt.price.std_error * growth;
      try {
        pt.implied_vol = implied_vol(undiscounted, pt.strike, T, F, pt.kind);
      } catch (const ImpliedVolOutOfBounds& e) {
        pt.status = e.bound() == PriceBound::Below ? SmileStatus::BelowIntrinsic : SmileStatus::AboveUpperBound;
        continue;
      }
      try {
        pt.iv_lo = implied_vol(undiscounted - se, pt.strike, T, F, pt.kind);
      } catch (const ImpliedVolOutOfBounds&) {
        pt.iv_lo = 0.0;
      }
      try {
        pt.iv_hi = implied_vol(undiscounted + se, pt.strike, T, F, pt.kind);
      } catch (const ImpliedVolOutOfBounds&) {
        pt.iv_hi = std::numeric_limits<double>::infinity();
      }
    }
  });
  return out;
}

/// n log-spaced strikes in [lo, hi].
inline std::vector<double> log_spaced_strikes(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw std::invalid_argument("log_spaced_strikes: bad range");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return out;
}

/// 25 log-spaced strikes in [0.05, 0.25].
inline std::vector<double> default_strike_grid() { return log_spaced_strikes(0.05, 0.25, 25); }

// ---------------------------------------------------------------------------
// Large-deviation convergence
// ---------------------------------------------------------------------------

struct RateConvergenceRow {
  double T{0.0};
  double strike{0.0};
  McEstimate price;
  double neg_t_log_price{std::numeric_limits<double>::quiet_NaN()};
  double jv{0.0};
  double gap{std::numeric_limits<double>::quiet_NaN()};
  /// Price within two standard errors of zero at this path budget.
  bool statistically_zero{false};
};

/// For each T, MC-prices the OTM option at K and reports -T log C against J_V(K).
inline std::vector<RateConvergenceRow> rate_convergence_study(double K, const SabrParams& p, const CapSpec& c,
                                                              std::span<const double> maturities,
                                                              const McConfig& m, double r = 0.0) {
  if (K == p.v0) throw std::invalid_argument("rate_convergence_study: K must differ from v0");
  if (!(K > 0.0)) throw std::invalid_argument("rate_convergence_study: K must be positive");
  for (std::size_t i = 1; i < maturities.size(); ++i)
    if (!(maturities[i] < maturities[i - 1]))
      throw std::invalid_argument("rate_convergence_study: maturities must be decreasing");
  const double jv = rate_function_jv(K, p, c);
  const OptionKind kind = K > p.v0 ? OptionKind::Call : OptionKind::Put;
  std::vector<RateConvergenceRow> rows;
  for (double T : maturities) {
    McConfig mt = m;
    mt.horizon = T;
    mt.store_paths = false;
    const auto paths = simulate_capped_paths(p, c, mt);
    RateConvergenceRow row;
    row.T = T;
    row.strike = K;
    row.jv = jv;
    row.price = price_vix_option(paths, K, kind, r, T);
    row.statistically_zero = !(row.price.value > 2.0 * row.price.std_error);
    if (!row.statistically_zero) {
      row.neg_t_log_price = -T * std::log(row.price.value);
      row.gap = std::abs(row.neg_t_log_price - jv);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace vixsabr
