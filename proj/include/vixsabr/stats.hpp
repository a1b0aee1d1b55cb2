#pragma once

/// @file stats.hpp
/// @brief Sample quantiles and a bootstrap test for equality of two
/// distributions on a set of quantile levels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vixsabr/rng.hpp"

namespace vixsabr {

/// Linear-interpolation quantile (Hyndman-Fan type 7) of a sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("sorted_quantile: empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline std::vector<double> quantiles(std::vector<double> sample, std::span<const double> levels) {
  std::sort(sample.begin(), sample.end());
  std::vector<double> out;
  out.reserve(levels.size());
  for (double q : levels) out.push_back(sorted_quantile(sample, q));
  return out;
}

/// Levels 0.05, 0.10, ..., 0.95.
inline std::vector<double> standard_quantile_levels() {
  std::vector<double> out;
  for (int k = 1; k <= 19; ++k) out.push_back(0.05 * k);
  return out;
}

namespace detail {

// Type-7 quantiles of a with-replacement resample of `sorted`, given the
// multiplicity of each original element. `levels` must be ascending.
inline void resampled_quantiles(std::span<const double> sorted, std::span<const std::uint32_t> counts,
                                std::span<const double> levels, std::span<double> out) {
  const std::size_t n = sorted.size();
  std::size_t level = 0;
  std::size_t cum = 0;  // resample positions consumed before element i
  // position lookup: element holding resample position `pos`
  auto value_at = [&](std::size_t pos, std::size_t start_i, std::size_t start_cum) {
    std::size_t i = start_i, c = start_cum;
    while (c + counts[i] <= pos) c += counts[i++];
    return sorted[i];
  };
  std::size_t i = 0;
  while (level < levels.size()) {
    const double h = (static_cast<double>(n) - 1.0) * levels[level];
    const auto pos = static_cast<std::size_t>(std::floor(h));
    while (cum + counts[i] <= pos) cum += counts[i++];
    const double lo = sorted[i];
    const double hi = pos + 1 < n ? value_at(pos + 1, i, cum) : lo;
    out[level] = lo + (h - static_cast<double>(pos)) * (hi - lo);
    ++level;
  }
}

}  // namespace detail

struct QuantileGapTest {
  std::vector<double> levels;
  std::vector<double> gaps;  ///< Q_a(q) - Q_b(q)
  double max_gap{0.0};
  double critical_value{0.0};  ///< `confidence` quantile of the centred bootstrap max gap
  bool within_band{false};
};

/// Compares max_q |Q_a(q) - Q_b(q)| with the bootstrap distribution of
/// max_q |(Q*_a - Q*_b) - (Q_a - Q_b)|, which gives a simultaneous band over
/// all levels.
inline QuantileGapTest bootstrap_quantile_gap(std::vector<double> a, std::vector<double> b,
                                              std::span<const double> levels, std::size_t n_boot,
                                              double confidence, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("bootstrap_quantile_gap: empty sample");
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw std::invalid_argument("bootstrap_quantile_gap: levels must be ascending");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  QuantileGapTest t;
  t.levels.assign(levels.begin(), levels.end());
  for (double q : levels) {
    t.gaps.push_back(sorted_quantile(a, q) - sorted_quantile(b, q));
    t.max_gap = std::max(t.max_gap, std::abs(t.gaps.back()));
  }

  std::vector<double> stats(n_boot);
  std::vector<std::uint32_t> ca(a.size()), cb(b.size());
  std::vector<double> qa(levels.size()), qb(levels.size());
  for (std::size_t r = 0; r < n_boot; ++r) {
    Xoshiro256 eng(stream_key(seed, r));
    std::fill(ca.begin(), ca.end(), 0);
    std::fill(cb.begin(), cb.end(), 0);
    std::uniform_int_distribution<std::size_t> ia(0, a.size() - 1), ib(0, b.size() - 1);
    for (std::size_t k = 0; k < a.size(); ++k) ++ca[ia(eng)];
    for (std::size_t k = 0; k < b.size(); ++k) ++cb[ib(eng)];
    detail::resampled_quantiles(a, ca, levels, qa);
    detail::resampled_quantiles(b, cb, levels, qb);
    double m = 0.0;
    for (std::size_t l = 0; l < levels.size(); ++l) m = std::max(m, std::abs(qa[l] - qb[l] - t.gaps[l]));
    stats[r] = m;
  }
  std::sort(stats.begin(), stats.end());
  t.critical_value = sorted_quantile(stats, confidence);
  t.within_band = t.max_gap <= t.critical_value;
  return t;
}

}  // namespace vixsabr
