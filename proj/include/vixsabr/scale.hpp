#pragma once

/// @file scale.hpp
/// @brief Natural-scale analysis of the uncapped volatility process.
///
/// For dv = b(v) dt + s(v) dW with b(v) = alpha v^3 + delta v^2 and
/// s(v) = v sigma_V(v), the scale function (base point 0) is
///
///     p(x) = int_0^x exp(-2 F(xi)) dxi,   F(x) = int_0^x (alpha y + delta) / R(y) dy,
///
/// where R = sigma_V^2. p is bounded (p_inf < inf), so Y = p(v) lives on
/// [0, p_inf] and v explodes when Y reaches p_inf. Whether that happens with
/// positive probability is settled by Feller's test function nu.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "vixsabr/model.hpp"
#include "vixsabr/quadrature.hpp"

namespace vixsabr {

class TailFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// R(x) = omega^2 + 2 omega_bar (1-beta) x + (1-beta)^2 x^2 with omega_bar = -rho omega.
/// For rho < 0, omega_bar = omega |rho|.
inline double radicand(double x, const SabrParams& p) noexcept {
  const double omb = 1.0 - p.beta;
  const double omega_bar = -p.rho * p.omega;
  return p.omega * p.omega + 2.0 * omega_bar * omb * x + omb * omb * x * x;
}

/// alpha / (1-beta)^2 = (2-beta) / (2 (1-beta)), the power in the e^{-2F} envelope.
inline double envelope_power(const SabrParams& p) noexcept {
  return (2.0 - p.beta) / (2.0 * (1.0 - p.beta));
}

/// Upper envelope constant exp(pi/2 * beta/(1-beta) * |rho|/rho_perp); 1 at beta = 0.
inline double kappa(const SabrParams& p) noexcept {
  return std::exp(0.5 * std::numbers::pi * p.beta / (1.0 - p.beta) * std::abs(p.rho) / p.rho_perp());
}

/// F(x) = int_0^x (alpha y + delta) / R(y) dy in closed form. Written with the
/// signed rho so that it holds for any |rho| < 1; for rho < 0 it is the
/// familiar log + arctan expression with |rho|.
inline double scale_exponent(double x, const SabrParams& p) {
  const double rp = p.rho_perp();
  if (!(rp > 0.0)) throw std::domain_error("scale_exponent: rho_perp must be positive");
  const double omb = 1.0 - p.beta;
  const double alpha = alpha_delta(p).alpha;
  const double w2 = p.omega * p.omega;
  const double omega_bar = -p.rho * p.omega;
  // log(R/omega^2) without cancellation near x = 0
  const double log_ratio = std::log1p((2.0 * omega_bar * omb * x + omb * omb * x * x) / w2);
  // atan(u) - atan(u0) with u - u0 = (1-beta) x / (omega rho_perp)
  const double u0 = omega_bar / (p.omega * rp);
  const double u = (omb * x + omega_bar) / (p.omega * rp);
  const double datan = std::atan2(u - u0, 1.0 + u * u0);
  return (0.5 * alpha * log_ratio + 0.5 * p.beta * omb * (p.rho / rp) * datan) / (omb * omb);
}

/// p'(x) = exp(-2 F(x))
inline double scale_density(double x, const SabrParams& p) { return std::exp(-2.0 * scale_exponent(x, p)); }

struct BoundsCheck {
  bool holds{true};
  std::optional<double> violating_x;
  /// Largest violation on the log scale (<= 0 when the bounds hold).
  double worst_log_gap{-std::numeric_limits<double>::infinity()};
};

/// Checks (omega^2/R)^k <= e^{-2F} <= kappa (omega^2/R)^k at each grid point,
/// k = alpha/(1-beta)^2, on the log scale with tolerance `log_tol`.
inline BoundsCheck exp_f_bounds_check(std::span<const double> xs, const SabrParams& p,
                                      double log_tol = 1e-12) {
  BoundsCheck out;
  const double k = envelope_power(p);
  const double log_kappa = std::log(kappa(p));
  const double omb = 1.0 - p.beta;
  const double omega_bar = -p.rho * p.omega;
  for (double x : xs) {
    const double lower = -k * std::log1p((2.0 * omega_bar * omb * x + omb * omb * x * x) /
                                         (p.omega * p.omega));
    const double mid = -2.0 * scale_exponent(x, p);
    const double gap = std::max(lower - mid, mid - (lower + log_kappa));
    if (gap > out.worst_log_gap) out.worst_log_gap = gap;
    if (gap > log_tol && out.holds) {
      out.holds = false;
      out.violating_x = x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scale function
// ---------------------------------------------------------------------------

/// Result of extrapolating p(X) -> p_inf with the tail p_inf - c1 X^{-1/(1-beta)}.
struct PInfinityFit {
  double p_infinity{0.0};
  double c1{0.0};
  /// c1 from the two-parameter regression (NaN when the tail is below resolution).
  double c1_regression{std::numeric_limits<double>::quiet_NaN()};
  /// c1 from the directly integrated tail at the largest grid point.
  double c1_tail{0.0};
  bool c1_from_regression{false};
  double max_rel_residual{0.0};
  bool stabilized{false};
  std::vector<double> grid_x;
  std::vector<double> grid_p;
};

/// Scale function p with its limit, tail and inverse. Construction integrates
/// p on a geometric grid up to cfg.large_x and fits the tail.
class ScaleFunction {
 public:
  ScaleFunction(const SabrParams& params, const QuadratureConfig& cfg, std::stop_token stop = {})
      : p_(params), cfg_(cfg), stop_(std::move(stop)) {
    p_.validate();
    cfg_.validate();
    fit_ = fit_limit();
  }

  [[nodiscard]] const SabrParams& params() const noexcept { return p_; }
  [[nodiscard]] const QuadratureConfig& config() const noexcept { return cfg_; }

  [[nodiscard]] double derivative(double x) const { return scale_density(x, p_); }

  /// p(x) = int_0^x p'(xi) dxi
  [[nodiscard]] double operator()(double x) const {
    if (x < 0.0) throw std::domain_error("scale_p: x must be >= 0");
    return integrate([this](double t) { return derivative(t); }, 0.0, x, cfg_, stop_).value;
  }

  /// int_x^inf p'(xi) dxi = p_inf - p(x), integrated directly.
  [[nodiscard]] double tail(double x) const {
    if (x < 0.0) throw std::domain_error("scale tail: x must be >= 0");
    return integrate_to_infinity([this](double t) { return derivative(t); }, x, cfg_, stop_).value;
  }

  [[nodiscard]] double p_infinity() const noexcept { return fit_.p_infinity; }
  [[nodiscard]] double c1() const noexcept { return fit_.c1; }
  [[nodiscard]] const PInfinityFit& fit() const noexcept { return fit_; }
  [[nodiscard]] double tail_exponent() const noexcept { return 1.0 / (1.0 - p_.beta); }

  /// q(y): the x with p(x) = y, for 0 <= y < p_inf.
  [[nodiscard]] double inverse(double y) const {
    const double pinf = p_infinity();
    if (!(y >= 0.0) || !(y < pinf))
      throw std::domain_error("q_inverse: y must lie in [0, p_inf), got " + std::to_string(y));
    if (y == 0.0) return 0.0;

    const double gap = pinf - y;
    // Near p_inf the residual is formed from the tail so p_inf - y keeps its digits.
    const bool use_tail = gap < 1e-4 * pinf;
    auto residual = [&](double x) { return use_tail ? gap - tail(x) : (*this)(x) - y; };

    double lo = 0.0, hi = 1.0;
    while (residual(hi) < 0.0) {
      lo = hi;
      hi *= 4.0;
      if (!std::isfinite(hi)) throw std::domain_error("q_inverse: failed to bracket root");
    }
    if (lo == 0.0 && use_tail) lo = std::numeric_limits<double>::min();
    std::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(
        residual, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (a + b);
  }

  /// sigma_bar(y) = p'(q(y)) q(y) sigma_V(q(y)) on (0, p_inf), 0 elsewhere.
  [[nodiscard]] double natural_scale_sigma(double y) const {
    if (!(y > 0.0) || !(y < p_infinity())) return 0.0;
    const double x = inverse(y);
    return derivative(x) * x * sigma_v(x, p_);
  }

 private:
  PInfinityFit fit_limit() const {
    PInfinityFit f;
    constexpr int kGrid = 9;  // ratio sqrt(10): large_x / 1e4 ... large_x
    constexpr int kFit = 5;
    f.grid_x.resize(kGrid);
    for (int k = 0; k < kGrid; ++k)
      f.grid_x[k] = cfg_.large_x * std::pow(10.0, -0.5 * (kGrid - 1 - k));
    f.grid_p.resize(kGrid);
    auto dens = [this](double t) { return derivative(t); };
    double acc = integrate(dens, 0.0, f.grid_x[0], cfg_, stop_).value;
    f.grid_p[0] = acc;
    for (int k = 1; k < kGrid; ++k) {
      acc += integrate(dens, f.grid_x[k - 1], f.grid_x[k], cfg_, stop_).value;
      f.grid_p[k] = acc;
    }

    const double gamma = tail_exponent();
    const double x_max = f.grid_x.back();
    f.c1_tail = tail(x_max) * std::pow(x_max, gamma);

    std::vector<double> z(kFit), y(kFit);
    for (int i = 0; i < kFit; ++i) {
      z[i] = std::pow(f.grid_x[kGrid - kFit + i], -gamma);
      y[i] = f.grid_p[kGrid - kFit + i];
    }
    double zm = 0.0, ym = 0.0;
    for (int i = 0; i < kFit; ++i) {
      zm += z[i] / kFit;
      ym += y[i] / kFit;
    }
    double szz = 0.0, szy = 0.0;
    for (int i = 0; i < kFit; ++i) {
      szz += (z[i] - zm) * (z[i] - zm);
      szy += (z[i] - zm) * (y[i] - ym);
    }
    const double signal = f.c1_tail * (z.front() - z.back());
    if (szz > 0.0) f.c1_regression = -szy / szz;
    // Regression c1 only when the tail varies well above quadrature noise on the fit window.
    f.c1_from_regression = signal > 1e-9 * std::abs(ym) && std::isfinite(f.c1_regression);
    f.c1 = f.c1_from_regression ? f.c1_regression : f.c1_tail;
    f.p_infinity = ym + f.c1 * zm;

    for (int i = 0; i < kFit; ++i) {
      const double r = std::abs(y[i] - (f.p_infinity - f.c1 * z[i])) / f.p_infinity;
      f.max_rel_residual = std::max(f.max_rel_residual, r);
    }
    if (!(f.max_rel_residual <= 1e-6) || !std::isfinite(f.p_infinity))
      throw TailFitError("p_inf tail fit residual " + std::to_string(f.max_rel_residual) +
                         " exceeds 1e-6");

    // |p(10X) - p(X)| for X = large_x/100 and large_x/10 (two grid steps = one decade)
    f.stabilized = true;
    for (int k : {kGrid - 5, kGrid - 3}) {
      const double d = std::abs(f.grid_p[k + 2] - f.grid_p[k]);
      if (!(d < std::max(cfg_.abs_tol, 1e-4 * f.grid_p[k]))) f.stabilized = false;
    }
    return f;
  }

  SabrParams p_;
  QuadratureConfig cfg_;
  std::stop_token stop_;
  PInfinityFit fit_;
};

inline double scale_p(double x, const SabrParams& p, const QuadratureConfig& cfg) {
  if (x < 0.0) throw std::domain_error("scale_p: x must be >= 0");
  return integrate([&](double t) { return scale_density(t, p); }, 0.0, x, cfg).value;
}

inline PInfinityFit p_infinity(const SabrParams& p, const QuadratureConfig& cfg) {
  return ScaleFunction(p, cfg).fit();
}

inline double q_inverse(double y, const SabrParams& p, const QuadratureConfig& cfg) {
  return ScaleFunction(p, cfg).inverse(y);
}

inline double natural_scale_sigma(double y, const SabrParams& p, const QuadratureConfig& cfg) {
  return ScaleFunction(p, cfg).natural_scale_sigma(y);
}

// ---------------------------------------------------------------------------
// Feller test
// ---------------------------------------------------------------------------

/// 2 / (p'(z) sigma^2(z)) with sigma(z) = z sigma_V(z).
inline double feller_weight(double z, const SabrParams& p) {
  return 2.0 * std::exp(2.0 * scale_exponent(z, p)) / (z * z * sigma_v_squared(z, p));
}

/// Default base point of the Feller integrals: 1% of v0.
inline double feller_base_point(const SabrParams& p) noexcept { return 0.01 * p.v0; }

/// int_lo^hi p'(y) int_c^y w(z) dz dy by nested adaptive quadrature.
inline double feller_nu_increment(double lo, double hi, double c, const SabrParams& p,
                                  const QuadratureConfig& cfg, std::stop_token stop = {}) {
  auto weight = [&](double z) { return feller_weight(z, p); };
  auto outer = [&](double y) {
    const double inner = integrate(weight, c, y, cfg, stop).value;
    return scale_density(y, p) * inner;
  };
  return integrate(outer, lo, hi, cfg, stop).value;
}

/// nu(x) = int_c^x p'(y) int_c^y 2 dz / (p'(z) sigma^2(z)) dy, nested quadrature.
/// c defaults to 0.01 v0; x < c is allowed and gives the branch towards 0.
inline double feller_nu(double x, const SabrParams& p, const QuadratureConfig& cfg,
                        std::optional<double> c = std::nullopt, std::stop_token stop = {}) {
  const double base = c.value_or(feller_base_point(p));
  if (!(x > 0.0) || !(base > 0.0)) throw std::domain_error("feller_nu: x and c must be positive");
  return feller_nu_increment(base, x, base, p, cfg, stop);
}

/// nu(x) by exchanging the order of integration:
/// int_c^x w(z) (p(x) - p(z)) dz. Independent route used to cross-check feller_nu.
inline double feller_nu_fubini(double x, const ScaleFunction& s, std::optional<double> c = std::nullopt) {
  const auto& p = s.params();
  const double base = c.value_or(feller_base_point(p));
  const double px = s(x);
  auto f = [&](double z) { return feller_weight(z, p) * (px - s(z)); };
  return integrate(f, base, x, s.config()).value;
}

/// nu(inf-) = int_c^inf w(z) (p_inf - p(z)) dz with the tail integrated directly.
inline double feller_nu_infinity(const ScaleFunction& s, std::optional<double> c = std::nullopt) {
  const auto& p = s.params();
  const double base = c.value_or(feller_base_point(p));
  auto f = [&](double z) { return feller_weight(z, p) * s.tail(z); };
  return integrate(f, base, 1.0, s.config()).value +
         integrate_to_infinity(f, 1.0, s.config()).value;
}

// ---------------------------------------------------------------------------
// Boundary classification
// ---------------------------------------------------------------------------

enum class BoundaryClass { Regular, Exit, Natural, Unclassified };

inline std::string_view to_string(BoundaryClass b) noexcept {
  switch (b) {
    case BoundaryClass::Regular: return "Regular";
    case BoundaryClass::Exit: return "Exit";
    case BoundaryClass::Natural: return "Natural";
    case BoundaryClass::Unclassified: return "Unclassified";
  }
  return "?";
}

/// Classification of the natural-scale process Y = p(v) on [0, p_inf].
struct BoundaryClassification {
  BoundaryClass lower{BoundaryClass::Natural};  ///< y = 0, GBM-like
  BoundaryClass upper{BoundaryClass::Unclassified};  ///< y = p_inf, CEV-origin-like
};

/// Upper end: Regular for beta in (0, 1/2), Exit for beta in [1/2, 1), and
/// Unclassified at beta = 0.
inline BoundaryClassification classify_boundary(const SabrParams& p) {
  p.validate();
  BoundaryClassification out;
  if (p.beta == 0.0)
    out.upper = BoundaryClass::Unclassified;
  else if (p.beta < 0.5)
    out.upper = BoundaryClass::Regular;
  else
    out.upper = BoundaryClass::Exit;
  return out;
}

// ---------------------------------------------------------------------------
// Explosion verdict
// ---------------------------------------------------------------------------

struct ScaleReport {
  double p_infinity{0.0};
  double c1_fit{0.0};
  double kappa{0.0};
  double nu_at_large_x{0.0};
  bool explosion_flag{false};
  BoundaryClassification boundary;

  PInfinityFit p_fit;
  double feller_c{0.0};
  std::vector<std::pair<double, double>> nu_samples;  ///< (X, nu(X))
  bool nu_stabilized{false};
  /// nu(0+) = inf: near 0 the inner integrand is ~ 2/(omega^2 z^2).
  bool nu_zero_divergent{false};
  /// nu(c 10^-k) - nu(c 10^-(k-1)) at the smallest probe; tends to 2 ln10 / omega^2.
  double nu_zero_decade_increment{0.0};
};

/// Runs the Feller test. Requires rho < 0.
inline ScaleReport explosion_verdict(const SabrParams& p, const QuadratureConfig& cfg,
                                     std::stop_token stop = {}) {
  if (!p.assumption_holds())
    throw std::domain_error("explosion analysis requires 0 <= beta < 1 and -1 < rho < 0");
  ScaleFunction scale(p, cfg, stop);

  ScaleReport r;
  r.p_fit = scale.fit();
  r.p_infinity = scale.p_infinity();
  r.c1_fit = scale.c1();
  r.kappa = kappa(p);
  r.boundary = classify_boundary(p);
  r.feller_c = feller_base_point(p);

  // nu at large_x/100, large_x/10, large_x, accumulated piecewise.
  const double L = cfg.large_x;
  const double xs[] = {L / 100.0, L / 10.0, L};
  double nu = 0.0, prev = r.feller_c;
  for (double x : xs) {
    nu += feller_nu_increment(prev, x, r.feller_c, p, cfg, stop);
    r.nu_samples.emplace_back(x, nu);
    prev = x;
  }
  r.nu_at_large_x = nu;
  r.nu_stabilized = true;
  for (std::size_t i = 0; i + 1 < r.nu_samples.size(); ++i) {
    const double a = r.nu_samples[i].second, b = r.nu_samples[i + 1].second;
    if (!(std::abs(b - a) < std::max(cfg.abs_tol, 1e-4 * a))) r.nu_stabilized = false;
  }

  r.nu_zero_divergent = p.omega > 0.0 && sigma_v(0.0, p) > 0.0;
  const double c = r.feller_c;
  r.nu_zero_decade_increment =
      feller_nu_increment(c * 1e-4, c * 1e-5, c, p, cfg, stop);

  r.explosion_flag = r.nu_stabilized && std::isfinite(r.nu_at_large_x);
  return r;
}

// ---------------------------------------------------------------------------
// Martingale diagnostic
// ---------------------------------------------------------------------------

/// hat F(xi) = 2 beta int_0^xi ((1-beta) y / 2 - rho omega) / sigma_V^2(y) dy in closed form.
inline double aux_scale_exponent(double xi, const SabrParams& p) {
  const double omb = 1.0 - p.beta;
  const double rp = p.rho_perp();
  const double w2 = p.omega * p.omega;
  const double log_ratio = std::log1p((omb * omb * xi * xi - 2.0 * p.rho * p.omega * omb * xi) / w2);
  const double u0 = -p.rho / rp;
  const double u = (omb * xi - p.rho * p.omega) / (p.omega * rp);
  const double datan = std::atan2(u - u0, 1.0 + u * u0);
  return 2.0 * p.beta * (log_ratio / (4.0 * omb) - p.rho / (2.0 * omb * rp) * datan);
}

/// hat p(x) = int_0^x exp(hat F(xi)) dxi, any real x.
inline double aux_scale_p(double x, const SabrParams& p, const QuadratureConfig& cfg) {
  return integrate([&](double t) { return std::exp(aux_scale_exponent(t, p)); }, 0.0, x, cfg).value;
}

struct MartingaleReport {
  bool verdict{false};
  bool upper_diverges{false};
  bool lower_diverges{false};
  /// hat p at (X/100, X/10, X) and at the mirrored negative points.
  std::vector<std::pair<double, double>> upper_samples;
  std::vector<std::pair<double, double>> lower_samples;
};

/// True iff hat p(+-inf) = +-inf, checked as non-shrinking decade increments
/// of |hat p| up to +-large_x.
inline MartingaleReport martingale_diagnostic(const SabrParams& p, const QuadratureConfig& cfg) {
  p.validate();
  MartingaleReport r;
  const double L = cfg.large_x;
  auto grows = [&](double sign, std::vector<std::pair<double, double>>& samples) {
    auto integrand = [&](double t) { return std::exp(aux_scale_exponent(t, p)); };
    double acc = 0.0, prev = 0.0;
    for (double x : {L / 100.0, L / 10.0, L}) {
      acc += integrate(integrand, sign * prev, sign * x, cfg).value;
      samples.emplace_back(sign * x, acc);
      prev = x;
    }
    const double d0 = std::abs(samples[1].second - samples[0].second);
    const double d1 = std::abs(samples[2].second - samples[1].second);
    return std::isfinite(d1) && d1 >= d0 && d0 > 0.0;
  };
  r.upper_diverges = grows(+1.0, r.upper_samples);
  r.lower_diverges = grows(-1.0, r.lower_samples);
  r.verdict = r.upper_diverges && r.lower_diverges;
  return r;
}

}  // namespace vixsabr
