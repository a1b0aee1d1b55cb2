#pragma once

/// @file quadrature.hpp
/// @brief Globally adaptive 21-point Gauss-Kronrod integration.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate satisfies err <= max(abs_tol, rel_tol * |I|). Semi-infinite ranges
/// are mapped to [0, 1) with x = lo + s t / (1 - t).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

namespace vixsabr {

struct QuadratureConfig {
  double abs_tol{1e-12};
  double rel_tol{1e-10};
  std::size_t max_subdivisions{1'000'000};
  /// Proxy for infinity in the tail / explosion diagnostics.
  double large_x{1e6};

  void validate() const {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("abs_tol must be positive");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    if (max_subdivisions < 1) throw std::invalid_argument("max_subdivisions must be >= 1");
    if (!(large_x > 0.0)) throw std::invalid_argument("large_x must be positive");
  }
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureCancelled : public QuadratureError {
 public:
  QuadratureCancelled() : QuadratureError("quadrature cancelled") {}
};

struct QuadratureResult {
  double value{0.0};
  double abs_error{0.0};
  std::size_t subdivisions{0};
};

namespace detail {

// QUADPACK qk21 abscissae/weights. Odd indices of kXgk are the 10-point Gauss nodes.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& o) const noexcept { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_21(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double res_k = fc * kWgk[10];
  double res_g = 0.0;
  double res_abs = std::abs(res_k);
  std::array<double, 10> f1{}, f2{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    res_k += kWgk[j] * sum;
    res_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) res_g += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j)
    res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double abs_half = std::abs(half);
  res_asc *= abs_half;
  res_abs *= abs_half;
  double err = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double uflow = std::numeric_limits<double>::min();
  if (res_abs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * res_abs, err);
  return Segment{lo, hi, res_k * half, err};
}

}  // namespace detail

/// Integrates f over [lo, hi]. hi < lo yields the negated integral over [hi, lo].
/// Throws QuadratureError when max_subdivisions is exhausted, QuadratureCancelled
/// when `stop` is signalled between subdivisions.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureConfig& cfg,
                           std::stop_token stop = {}) {
  if (lo == hi) return {};
  if (hi < lo) {
    auto r = integrate(f, hi, lo, cfg, stop);
    r.value = -r.value;
    return r;
  }
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("integrate: finite limits required");

  std::priority_queue<detail::Segment> heap;
  auto first = detail::gauss_kronrod_21(f, lo, hi);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);

  // Segments too narrow to bisect further are parked here.
  double frozen_value = 0.0, frozen_err = 0.0;
  std::size_t n = 1;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)) && !heap.empty()) {
    if (stop.stop_requested()) throw QuadratureCancelled();
    if (!std::isfinite(total))
      throw QuadratureError("integrate: non-finite integrand on [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
    if (n >= cfg.max_subdivisions)
      throw QuadratureError("integrate: no convergence after " + std::to_string(n) +
                            " subdivisions (error estimate " + std::to_string(total_err) + ")");
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (worst.hi - worst.lo <= 100.0 * eps * std::max(std::abs(mid), 1e-300)) {
      frozen_value += worst.value;
      frozen_err += worst.error;
      continue;
    }
    auto left = detail::gauss_kronrod_21(f, worst.lo, mid);
    auto right = detail::gauss_kronrod_21(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
  }

  // Re-sum from the pieces to shed accumulated cancellation in `total`.
  double value = frozen_value, err = frozen_err;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(value)) throw QuadratureError("integrate: non-finite result");
  return {value, err, n};
}

/// Integrates f over [lo, +inf) via x = lo + scale * t / (1 - t). The default
/// scale max(1, |lo|) keeps a decade of the tail near the middle of [0, 1).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double lo, const QuadratureConfig& cfg,
                                       std::stop_token stop = {}, double scale = 0.0) {
  if (scale <= 0.0) scale = std::max(1.0, std::abs(lo));
  auto mapped = [&](double t) {
    const double one_minus = 1.0 - t;
    const double x = lo + scale * t / one_minus;
    const double fx = f(x);
    if (fx == 0.0) return 0.0;
    return fx * scale / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, cfg, stop);
}

}  // namespace vixsabr
