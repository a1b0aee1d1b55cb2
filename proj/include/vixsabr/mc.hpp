#pragma once

/// @file mc.hpp
/// @brief Monte Carlo for the capped volatility process and the 2-D SABR system.
///
/// The capped process is stepped in log space,
///
///     log v_{k+1} = log v_k + (mu_hat(v_k) - sigma_hat(v_k)^2 / 2) dt + sigma_hat(v_k) sqrt(dt) xi_k,
///
/// which keeps v > 0 and makes the exponential bounds used for the VIX
/// sandwich hold step by step. Path i always draws from stream (seed, i).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vixsabr/model.hpp"
#include "vixsabr/parallel.hpp"
#include "vixsabr/rng.hpp"

namespace vixsabr {

enum class Scheme { LogEuler, LevelEuler };

struct McConfig {
  std::size_t n_paths{100'000};
  std::size_t n_steps{100};
  double horizon{0.1};     ///< T, years
  double vix_window{0.0};  ///< tau, years
  std::uint64_t seed{42};
  std::size_t inner_paths{0};
  std::size_t inner_steps{0};
  unsigned threads{0};  ///< 0 = hardware concurrency
  Scheme scheme{Scheme::LogEuler};
  bool store_paths{false};

  void validate() const {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(vix_window >= 0.0)) throw std::invalid_argument("vix_window must be >= 0");
  }
};

struct McEstimate {
  double value{0.0};
  double std_error{0.0};
  std::size_t n_effective{0};
};

/// Sample mean and standard error (sample sd / sqrt(n)).
inline McEstimate mean_estimate(std::span<const double> xs) {
  McEstimate e;
  e.n_effective = xs.size();
  if (xs.empty()) return e;
  // two-pass in index order keeps the result independent of threading
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  e.value = mean;
  if (xs.size() > 1)
    e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return e;
}

struct PathSet {
  std::vector<double> terminal_values;
  /// (n_steps + 1) x n_paths, step-major; empty unless McConfig::store_paths.
  std::vector<double> paths;
  std::size_t n_paths{0};
  std::size_t n_steps{0};
  double horizon{0.0};

  [[nodiscard]] double at(std::size_t step, std::size_t path) const { return paths.at(step * n_paths + path); }
};

namespace detail {

/// One step of the capped SDE. Level-Euler paths that reach 0 stay there.
inline double capped_step(double v, double dt, double sqdt, double xi, const SabrParams& p,
                          const CapSpec& c, Scheme scheme) {
  const double s = capped_sigma_v(v, p, c);
  const double m = capped_mu_v(v, p, c);
  if (scheme == Scheme::LogEuler) return v * std::exp((m - 0.5 * s * s) * dt + s * sqdt * xi);
  if (v <= 0.0) return 0.0;
  return std::max(0.0, v + v * (m * dt + s * sqdt * xi));
}

}  // namespace detail

inline PathSet simulate_capped_paths(const SabrParams& p, const CapSpec& c, const McConfig& m) {
  p.validate();
  m.validate();
  PathSet out;
  out.n_paths = m.n_paths;
  out.n_steps = m.n_steps;
  out.horizon = m.horizon;
  out.terminal_values.resize(m.n_paths);
  if (m.store_paths) out.paths.resize((m.n_steps + 1) * m.n_paths);

  const double dt = m.horizon / static_cast<double>(m.n_steps);
  const double sqdt = std::sqrt(dt);
  parallel_for(m.n_paths, m.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PathRng rng(m.seed, i);
      double v = p.v0;
      if (m.store_paths) out.paths[i] = v;
      for (std::size_t k = 0; k < m.n_steps; ++k) {
        v = detail::capped_step(v, dt, sqdt, rng.normal(), p, c, m.scheme);
        if (m.store_paths) out.paths[(k + 1) * m.n_paths + i] = v;
      }
      out.terminal_values[i] = v;
    }
  });
  return out;
}

/// F_V(T, a) = E[v_T]
inline McEstimate estimate_forward(const PathSet& paths) {
  if (paths.terminal_values.empty()) throw std::invalid_argument("estimate_forward: empty path set");
  return mean_estimate(paths.terminal_values);
}

enum class OptionKind { Call, Put };

inline double payoff(double v, double K, OptionKind kind) noexcept {
  return kind == OptionKind::Call ? std::max(v - K, 0.0) : std::max(K - v, 0.0);
}

/// e^{-rT} E[(v_T - K)^+] or e^{-rT} E[(K - v_T)^+] over the terminal values.
inline McEstimate price_vix_option(const PathSet& paths, double K, OptionKind kind, double r, double T) {
  if (!(K > 0.0)) throw std::invalid_argument("price_vix_option: strike must be positive");
  if (paths.terminal_values.empty()) throw std::invalid_argument("price_vix_option: empty path set");
  std::vector<double> pay(paths.terminal_values.size());
  std::transform(paths.terminal_values.begin(), paths.terminal_values.end(), pay.begin(),
                 [&](double v) { return payoff(v, K, kind); });
  auto e = mean_estimate(pay);
  const double df = std::exp(-r * T);
  e.value *= df;
  e.std_error *= df;
  return e;
}

// ---------------------------------------------------------------------------
// Nested VIX_T estimator
// ---------------------------------------------------------------------------

struct NestedVixResult {
  std::vector<double> v_T;
  std::vector<McEstimate> vix;  ///< per outer path, inner-MC standard error
  double lower_factor{1.0};     ///< e^{-b tau}
  double upper_factor{1.0};     ///< e^{b tau + a^2 tau / 2}
  std::size_t violations{0};
  double violation_fraction{0.0};
};

/// Number of inner standard errors a VIX estimate may sit outside the sandwich
/// before it counts as a violation.
inline constexpr double kSandwichSigmas = 3.0;

/// VIX_T^2 = E[(1/tau) int_T^{T+tau} v_t^2 dt | F_T] by inner simulation from
/// each outer v_T, trapezoid rule over inner steps.
inline NestedVixResult estimate_vix_nested(const SabrParams& p, const CapSpec& c, const McConfig& m,
                                           double T, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("estimate_vix_nested: tau must be positive");
  if (m.inner_paths < 2) throw std::invalid_argument("estimate_vix_nested: inner_paths must be >= 2");
  if (m.inner_steps < 1) throw std::invalid_argument("estimate_vix_nested: inner_steps must be >= 1");
  McConfig outer = m;
  outer.horizon = T;
  outer.store_paths = false;
  const auto outer_paths = simulate_capped_paths(p, c, outer);

  NestedVixResult r;
  r.v_T = outer_paths.terminal_values;
  r.vix.resize(m.n_paths);
  r.lower_factor = std::exp(-c.b * tau);
  r.upper_factor = std::exp(c.b * tau + 0.5 * c.a * c.a * tau);

  const double dt = tau / static_cast<double>(m.inner_steps);
  const double sqdt = std::sqrt(dt);
  const std::uint64_t inner_seed = stream_key(m.seed, 0x5649584E45535445ULL);  // "VIXNESTE"
  std::vector<unsigned char> violated(m.n_paths, 0);

  parallel_for(m.n_paths, m.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> averages(m.inner_paths);
    for (std::size_t i = begin; i < end; ++i) {
      const double vT = r.v_T[i];
      for (std::size_t j = 0; j < m.inner_paths; ++j) {
        PathRng rng(inner_seed, i, j);
        double v = vT;
        double acc = 0.5 * v * v;
        for (std::size_t k = 0; k < m.inner_steps; ++k) {
          v = detail::capped_step(v, dt, sqdt, rng.normal(), p, c, m.scheme);
          acc += (k + 1 == m.inner_steps ? 0.5 : 1.0) * v * v;
        }
        averages[j] = acc / static_cast<double>(m.inner_steps);
      }
      const auto var = mean_estimate(averages);
      const double vix = std::sqrt(var.value);
      const double se = var.std_error / (2.0 * vix);
      r.vix[i] = McEstimate{vix, se, m.inner_paths};
      const double lo = vT * r.lower_factor - kSandwichSigmas * se;
      const double hi = vT * r.upper_factor + kSandwichSigmas * se;
      violated[i] = (vix < lo || vix > hi) ? 1 : 0;
    }
  });
  r.violations = static_cast<std::size_t>(std::count(violated.begin(), violated.end(), 1));
  r.violation_fraction = static_cast<double>(r.violations) / static_cast<double>(m.n_paths);
  return r;
}

// ---------------------------------------------------------------------------
// 2-D SABR
// ---------------------------------------------------------------------------

struct Sabr2dSample {
  std::vector<double> s_T;
  std::vector<double> sigma_T;
  /// sigma_T S_T^{beta-1}; NaN on absorbed paths.
  std::vector<double> v_T;
  std::size_t absorbed{0};
  double absorbed_fraction{0.0};

  [[nodiscard]] std::vector<double> surviving_v() const {
    std::vector<double> out;
    out.reserve(v_T.size() - absorbed);
    for (double v : v_T)
      if (std::isfinite(v)) out.push_back(v);
    return out;
  }
};

/// dS = S^beta sigma dB (Euler, absorbed at 0), d sigma = omega sigma dZ (exact),
/// corr(dB, dZ) = rho, sigma_0 = v0 S0^{1-beta}.
inline Sabr2dSample simulate_sabr_2d(const SabrParams& p, double S0, const McConfig& m) {
  p.validate();
  m.validate();
  if (!(S0 > 0.0)) throw std::invalid_argument("simulate_sabr_2d: S0 must be positive");
  Sabr2dSample out;
  out.s_T.resize(m.n_paths);
  out.sigma_T.resize(m.n_paths);
  out.v_T.resize(m.n_paths);
  const double dt = m.horizon / static_cast<double>(m.n_steps);
  const double sqdt = std::sqrt(dt);
  const double rp = p.rho_perp();
  const double sigma0 = p.v0 * std::pow(S0, 1.0 - p.beta);
  const double vol_drift = -0.5 * p.omega * p.omega * dt;
  const std::uint64_t seed = stream_key(m.seed, 0x5341425232440000ULL);  // "SABR2D"

  parallel_for(m.n_paths, m.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PathRng rng(seed, i);
      double S = S0, sigma = sigma0;
      bool absorbed = false;
      for (std::size_t k = 0; k < m.n_steps; ++k) {
        const double z = rng.normal();
        const double zp = rng.normal();
        if (absorbed) continue;  // keep the draw count fixed per path
        const double dB = p.rho * z + rp * zp;
        S += std::pow(S, p.beta) * sigma * sqdt * dB;
        sigma *= std::exp(vol_drift + p.omega * sqdt * z);
        if (S <= 0.0) {
          S = 0.0;
          absorbed = true;
        }
      }
      out.s_T[i] = S;
      out.sigma_T[i] = sigma;
      out.v_T[i] = absorbed ? std::numeric_limits<double>::quiet_NaN() : sigma * std::pow(S, p.beta - 1.0);
    }
  });
  out.absorbed = static_cast<std::size_t>(
      std::count_if(out.v_T.begin(), out.v_T.end(), [](double v) { return !std::isfinite(v); }));
  out.absorbed_fraction = static_cast<double>(out.absorbed) / static_cast<double>(m.n_paths);
  return out;
}

// ---------------------------------------------------------------------------
// Weak-error study with common random numbers
// ---------------------------------------------------------------------------

struct WeakErrorPoint {
  std::size_t n_steps;
  McEstimate bias;  ///< E[v_T^(n)] - E[v_T^(ref)], same Brownian paths
};

/// Forward bias of the n-step scheme against a `ref_steps` reference. Coarse
/// increments are sums of fine ones, so every scheme sees the same Brownian
/// path. Each entry of step_counts must divide ref_steps.
inline std::vector<WeakErrorPoint> weak_error_study(const SabrParams& p, const CapSpec& c,
                                                    const McConfig& m,
                                                    std::span<const std::size_t> step_counts,
                                                    std::size_t ref_steps) {
  for (auto n : step_counts)
    if (n == 0 || ref_steps % n != 0)
      throw std::invalid_argument("weak_error_study: step counts must divide ref_steps");
  const std::size_t n_schemes = step_counts.size();
  std::vector<std::vector<double>> diffs(n_schemes, std::vector<double>(m.n_paths));
  const double T = m.horizon;

  parallel_for(m.n_paths, m.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> xi(ref_steps);
    for (std::size_t i = begin; i < end; ++i) {
      PathRng rng(m.seed, i);
      for (auto& x : xi) x = rng.normal();
      const double dt_ref = T / static_cast<double>(ref_steps);
      double v_ref = p.v0;
      for (std::size_t k = 0; k < ref_steps; ++k)
        v_ref = detail::capped_step(v_ref, dt_ref, std::sqrt(dt_ref), xi[k], p, c, m.scheme);
      for (std::size_t s = 0; s < n_schemes; ++s) {
        const std::size_t n = step_counts[s];
        const std::size_t ratio = ref_steps / n;
        const double dt = T / static_cast<double>(n);
        const double norm = 1.0 / std::sqrt(static_cast<double>(ratio));
        double v = p.v0;
        for (std::size_t k = 0; k < n; ++k) {
          double sum = 0.0;
          for (std::size_t j = 0; j < ratio; ++j) sum += xi[k * ratio + j];
          v = detail::capped_step(v, dt, std::sqrt(dt), sum * norm, p, c, m.scheme);
        }
        diffs[s][i] = v - v_ref;
      }
    }
  });
  std::vector<WeakErrorPoint> out;
  for (std::size_t s = 0; s < n_schemes; ++s) out.push_back({step_counts[s], mean_estimate(diffs[s])});
  return out;
}

}  // namespace vixsabr
