#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vixsabr/asymptotics.hpp"

using namespace vixsabr;

namespace {

const SabrParams kBase{0.5, -0.7, 1.0, 0.1};

double rate_oracle(double lo, double hi, const SabrParams& p, const CapSpec& c) {
  auto g = [&](double z) { return 1.0 / (z * capped_sigma_v(z, p, c)); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  // split at v_hat where the integrand has a kink
  if (lo < c.v_hat && c.v_hat < hi) return GK::integrate(g, lo, c.v_hat, 12, 1e-14) + GK::integrate(g, c.v_hat, hi, 12, 1e-14);
  return GK::integrate(g, lo, hi, 12, 1e-14);
}

CapSpec caps(const SabrParams& p, double a = 2.0) { return CapSpec::make(a, 1.0, p); }

}  // namespace

TEST(RateIntegral, EmptyRange) { EXPECT_EQ(rate_integral(0.3, 0.3, kBase, caps(kBase)), 0.0); }

TEST(RateIntegral, MatchesOracle) {
  const auto c = caps(kBase);
  EXPECT_NEAR(rate_integral(0.05, 0.5, kBase, c), rate_oracle(0.05, 0.5, kBase, c), 1e-10);
  EXPECT_NEAR(rate_integral(0.5, 0.05, kBase, c), -rate_oracle(0.05, 0.5, kBase, c), 1e-10);
}

TEST(RateIntegral, CapBindingEverywhere) {
  // a slightly above omega puts v_hat just above 0 for rho < 0
  const SabrParams p{0.5, -0.7, 1.0, 0.1};
  const auto c = CapSpec::make(1.0 + 1e-12, 1.0, p);
  EXPECT_LT(c.v_hat, 1e-9);
  EXPECT_NEAR(rate_integral(0.05, 0.3, p, c), std::log(6.0) / c.a, 1e-14);
}

// 20-point (beta, rho, K) grid plus both cap regimes.
TEST(RateIntegral, OracleGrid) {
  const double betas[] = {0.0, 0.5, 0.9, 0.3};
  const double rhos[] = {-0.9, -0.7, 0.0, 0.5, 0.7};
  const double strikes[] = {0.01, 0.05, 0.15, 0.6, 4.0};
  int n = 0;
  for (int i = 0; i < 20; ++i) {
    const SabrParams p{betas[i % 4], rhos[i % 5], 1.0, 0.1};
    const auto c = caps(p);
    const double K = strikes[(i / 4) % 5];
    const double oracle = rate_oracle(std::min(p.v0, K), std::max(p.v0, K), p, c) * (K >= p.v0 ? 1 : -1);
    EXPECT_NEAR(rate_integral(p.v0, K, p, c), oracle, 1e-10) << "beta=" << p.beta << " rho=" << p.rho << " K=" << K;
    ++n;
  }
  EXPECT_EQ(n, 20);
}

TEST(RateIntegral, StableForTinyIntervals) {
  const auto c = caps(kBase);
  for (double h : {1e-3, 1e-6, 1e-9}) {
    const double v = rate_integral(0.1, 0.1 + h, kBase, c);
    // first order: h / (v sigma_V(v))
    const double lead = h / (0.1 * sigma_v(0.1, kBase));
    EXPECT_NEAR(v / lead, 1.0, 10 * h);
  }
}

TEST(RateFunction, ZeroAtSpot) { EXPECT_EQ(rate_function_jv(0.1, kBase, caps(kBase)), 0.0); }

TEST(RateFunction, ShapeOnGrid) {
  for (double rho : {-0.7, 0.0, 0.7}) {
    SabrParams p = kBase;
    p.rho = rho;
    const auto c = caps(p);
    double prev = 0.0;
    for (double K = 0.1 * 1.05; K < 30.0; K *= 1.05) {
      const double j = rate_function_jv(K, p, c);
      EXPECT_GT(j, prev);
      prev = j;
    }
    prev = 0.0;
    for (double K = 0.1 / 1.05; K > 1e-4; K /= 1.05) {
      const double j = rate_function_jv(K, p, c);
      EXPECT_GT(j, prev);
      prev = j;
    }
  }
}

TEST(RateFunction, ContinuousAtSwitchLevel) {
  const auto c = caps(kBase);
  EXPECT_NEAR(c.v_hat, 2.336, 1e-3);
  const double left = rate_function_jv(std::nextafter(c.v_hat, 0.0), kBase, c);
  const double at = rate_function_jv(c.v_hat, kBase, c);
  const double right = rate_function_jv(std::nextafter(c.v_hat, 10.0), kBase, c);
  EXPECT_NEAR(left, at, 1e-12);
  EXPECT_NEAR(right, at, 1e-12);
}

TEST(RateFunction, PutBranchesContinuousWhenCapBindsBelowSpot) {
  // v0 above v_hat: puts cross the switch level
  const SabrParams p{0.5, -0.7, 1.0, 4.0};
  const auto c = caps(p);
  ASSERT_LT(c.v_hat, p.v0);
  const double left = rate_function_jv(std::nextafter(c.v_hat, 0.0), p, c);
  const double right = rate_function_jv(std::nextafter(c.v_hat, 10.0), p, c);
  EXPECT_NEAR(left, right, 1e-12);
  EXPECT_NEAR(rate_function_jv(3.0, p, c), 0.5 * std::pow(std::log(3.0 / 4.0) / c.a, 2), 1e-14);
}

TEST(RateFunction, DegenerateCapCallBranch) {
  const SabrParams p{0.5, -0.7, 1.0, 4.0};
  const auto c = caps(p);
  for (double K : {5.0, 9.0}) EXPECT_NEAR(rate_function_jv(K, p, c), 0.5 * std::pow(std::log(K / p.v0) / c.a, 2), 1e-14);
}

TEST(ImpliedVolLimit, AtmLevel) {
  const auto c = caps(kBase);
  EXPECT_NEAR(implied_vol_limit(0.1, kBase, c), std::sqrt(1.0725), 1e-15);
  EXPECT_NEAR(implied_vol_limit(0.1, kBase, c), 1.0356, 1e-4);
  // continuous through the ATM switch
  EXPECT_NEAR(implied_vol_limit(0.1 * (1 + 2e-8), kBase, c), std::sqrt(1.0725), 1e-7);
}

TEST(ImpliedVolLimit, ConsistentWithRateFunction) {
  const auto c = caps(kBase);
  for (double K : {0.05, 0.08, 0.15, 0.3}) {
    const double x = std::log(K / kBase.v0);
    const double s = implied_vol_limit(K, kBase, c);
    EXPECT_NEAR(x * x / (2.0 * rate_function_jv(K, kBase, c)), s * s, 1e-12);
    EXPECT_NEAR(s * rate_integral(kBase.v0, K, kBase, c), x, 1e-12);
  }
}

TEST(ImpliedVolLimit, RhoZeroPinnedByOracle) {
  SabrParams p = kBase;
  p.rho = 0.0;
  const auto c = caps(p);
  EXPECT_NEAR(implied_vol_limit(0.2, p, c), std::log(2.0) / rate_oracle(0.1, 0.2, p, c), 1e-10);
}

TEST(SmileExpansion, SignsAndLimits) {
  const auto e = smile_expansion(kBase, caps(kBase));
  EXPECT_GT(e.skew, 0.0);
  EXPECT_GT(e.convexity, 0.0);
  EXPECT_GT(e.convexity_sigma4, 0.0);
  EXPECT_DOUBLE_EQ(e.atm_level, sigma_v(0.1, kBase));
  const auto near_one = smile_expansion(SabrParams{1.0 - 1e-9, -0.7, 1.0, 0.1});
  EXPECT_NEAR(near_one.skew, 0.0, 1e-9);
  EXPECT_NEAR(near_one.convexity, 0.0, 1e-9);
}

TEST(SmileExpansion, RejectsBindingCap) {
  const SabrParams p{0.5, -0.7, 1.0, 4.0};
  EXPECT_THROW(smile_expansion(p, caps(p)), std::domain_error);
}

// Central differences of the limit smile in x = log(K/v0), h = 1e-4.
TEST(SmileExpansion, FiniteDifferences) {
  const double h = 1e-4;
  for (double rho : {-0.7, -0.3, 0.0, 0.4})
    for (double beta : {0.2, 0.5, 0.8}) {
      const SabrParams p{beta, rho, 1.0, 0.1};
      const auto c = caps(p);
      auto sig = [&](double x) { return implied_vol_limit(p.v0 * std::exp(x), p, c); };
      const double s0 = sig(0.0), sp = sig(h), sm = sig(-h);
      const auto e = smile_expansion(p, c);
      EXPECT_NEAR((sp - sm) / (2 * h), e.skew, 1e-6) << "beta=" << beta << " rho=" << rho;
      EXPECT_NEAR((sp - 2 * s0 + sm) / (h * h), e.convexity, 1e-4) << "beta=" << beta << " rho=" << rho;
      EXPECT_NEAR(e.convexity_sigma4, e.convexity * 2.0 / e.atm_level, 1e-14);
    }
}

TEST(SmileExpansion, CubicTaylorRemainder) {
  const auto c = caps(kBase);
  const auto e = smile_expansion(kBase, c);
  auto max_residual = [&](double L) {
    double m = 0.0;
    for (int i = -20; i <= 20; ++i) {
      const double x = L * i / 20.0;
      const double s = implied_vol_limit(kBase.v0 * std::exp(x), kBase, c);
      m = std::max(m, std::abs(s - (e.atm_level + e.skew * x + 0.5 * e.convexity * x * x)));
    }
    return m;
  };
  double prev = max_residual(0.3);
  for (double L : {0.15, 0.075, 0.0375}) {
    const double r = max_residual(L);
    EXPECT_NEAR(prev / r, 8.0, 1.0) << "L=" << L;
    prev = r;
  }
}

TEST(AsymptoticSmile, IncreasingAndConvexForNegativeRho) {
  const auto c = caps(kBase);
  std::vector<double> ks;
  for (int i = 0; i < 25; ++i) ks.push_back(0.05 * std::pow(5.0, i / 24.0));
  const auto pts = asymptotic_smile(ks, kBase, c);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i].implied_vol, pts[i - 1].implied_vol);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    // convex in log-strike (equal spacing)
    EXPECT_GT(pts[i + 1].implied_vol - 2 * pts[i].implied_vol + pts[i - 1].implied_vol, 0.0);
  }
}

TEST(AsymptoticSmile, RhoZeroSkewSign) {
  SabrParams p = kBase;
  p.rho = 0.0;
  const auto e = smile_expansion(p, caps(p));
  EXPECT_GT(e.skew, 0.0);
  EXPECT_NEAR(e.skew, (p.beta - 1) * p.v0 * (p.beta - 1) * p.v0 / (2 * sigma_v(p.v0, p)), 1e-15);
}
