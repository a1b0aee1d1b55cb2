#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "vixsabr/pricing.hpp"

using namespace vixsabr;

namespace {
const SabrParams kBase{0.5, -0.7, 1.0, 0.1};
}

TEST(BlackPrice, ZeroVolIsIntrinsic) {
  EXPECT_DOUBLE_EQ(bs_price(0.08, 0.1, 0.1, 0.0, OptionKind::Call), 0.1 - 0.08);
  EXPECT_DOUBLE_EQ(bs_price(0.12, 0.1, 0.1, 0.0, OptionKind::Call), 0.0);
  EXPECT_NEAR(bs_price(0.08, 0.1, 0.1, 1e-9, OptionKind::Call), 0.02, 1e-15);
}

TEST(BlackPrice, AtmLeadingTerm) {
  const double F = 0.1, T = 0.1, vol = 1e-3;
  const double s = vol * std::sqrt(T);
  const double lead = F * s / std::sqrt(2 * std::numbers::pi);
  // F (2 N(s/2) - 1) = lead (1 - s^2/24 + O(s^4))
  EXPECT_NEAR(bs_price(F, T, F, vol, OptionKind::Call), lead * (1 - s * s / 24), 1e-10 * lead);
  EXPECT_NEAR(lead / (F * vol * std::sqrt(T)), 0.3989, 1e-4);
}

TEST(BlackPrice, ParityAndMonotone) {
  for (double K : {0.05, 0.1, 0.2})
    for (double vol : {0.1, 1.0, 3.0}) {
      const double c = bs_price(K, 0.25, 0.1, vol, OptionKind::Call);
      const double p = bs_price(K, 0.25, 0.1, vol, OptionKind::Put);
      EXPECT_NEAR(c - p, 0.1 - K, 1e-15);
      EXPECT_GE(bs_price(K, 0.25, 0.1, vol * 1.01, OptionKind::Call), c);
    }
}

TEST(BlackPrice, Preconditions) {
  EXPECT_THROW(bs_price(0.0, 0.1, 0.1, 0.2, OptionKind::Call), std::invalid_argument);
  EXPECT_THROW(bs_price(0.1, 0.1, 0.1, -0.2, OptionKind::Call), std::invalid_argument);
}

TEST(ImpliedVol, RoundTrip) {
  for (double sigma : {0.1, 1.0, 3.0})
    for (double K : {0.06, 0.1, 0.16})
      for (auto kind : {OptionKind::Call, OptionKind::Put}) {
        const double F = 0.1, T = 0.1;
        const double price = bs_price(K, T, F, sigma, kind);
        const double time_value = price - payoff(F, K, kind);
        if (!(time_value > 1e-10 * F)) continue;  // vol not identifiable from the price
        const double iv = implied_vol(price, K, T, F, kind);
        EXPECT_NEAR(iv, sigma, 1e-10) << "sigma=" << sigma << " K=" << K;
        EXPECT_LE(std::abs(bs_price(K, T, F, iv, kind) - price), 1e-12 * F);
      }
}

TEST(ImpliedVol, OutOfBounds) {
  try {
    implied_vol(0.02, 0.08, 0.1, 0.1, OptionKind::Call);
    FAIL() << "expected OutOfBounds";
  } catch (const ImpliedVolOutOfBounds& e) {
    EXPECT_EQ(e.bound(), PriceBound::Below);
  }
  try {
    implied_vol(0.1, 0.08, 0.1, 0.1, OptionKind::Call);
    FAIL() << "expected OutOfBounds";
  } catch (const ImpliedVolOutOfBounds& e) {
    EXPECT_EQ(e.bound(), PriceBound::Above);
  }
  try {
    implied_vol(0.0, 0.08, 0.1, 0.1, OptionKind::Put);
    FAIL() << "expected OutOfBounds";
  } catch (const ImpliedVolOutOfBounds& e) {
    EXPECT_EQ(e.bound(), PriceBound::Below);
  }
}

// Property: inversion residual over a dense (K, vol, T) grid.
TEST(ImpliedVol, ResidualOnGrid) {
  const double F = 0.1;
  for (double K = 0.02; K < 0.5; K *= 1.3)
    for (double vol : {0.05, 0.3, 1.0, 2.0, 4.0})
      for (double T : {0.01, 0.1, 1.0}) {
        const auto kind = K > F ? OptionKind::Call : OptionKind::Put;
        const double price = bs_price(K, T, F, vol, kind);
        if (!(price > payoff(F, K, kind) * (1 + 1e-14) + 1e-300)) continue;  // below double resolution
        const double iv = implied_vol(price, K, T, F, kind);
        EXPECT_LE(std::abs(bs_price(K, T, F, iv, kind) - price), 1e-12 * F) << "K=" << K << " vol=" << vol;
      }
}

TEST(StrikeGrid, Default) {
  const auto g = default_strike_grid();
  ASSERT_EQ(g.size(), 25u);
  EXPECT_DOUBLE_EQ(g.front(), 0.05);
  EXPECT_NEAR(g.back(), 0.25, 1e-15);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}

class SmileFromPaths : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    McConfig m;
    m.n_paths = 100000;
    m.n_steps = 100;
    m.horizon = 0.1;
    m.threads = 2;
    caps_ = CapSpec::make(2.0, 1.0, kBase);
    paths_ = new PathSet(simulate_capped_paths(kBase, caps_, m));
  }
  static void TearDownTestSuite() { delete paths_; }
  static inline PathSet* paths_ = nullptr;
  static inline CapSpec caps_{};
};

TEST_F(SmileFromPaths, BandsContainPointAndOtmSides) {
  const auto F = estimate_forward(*paths_).value;
  const auto strikes = default_strike_grid();
  const auto pts = smile_from_paths(*paths_, strikes, 0.1, 0.0, F, 2);
  ASSERT_EQ(pts.size(), strikes.size());
  for (const auto& p : pts) {
    ASSERT_EQ(p.status, SmileStatus::Ok) << p.strike;
    EXPECT_EQ(p.kind, p.strike > F ? OptionKind::Call : OptionKind::Put);
    EXPECT_LE(p.iv_lo, p.implied_vol);
    EXPECT_GE(p.iv_hi, p.implied_vol);
    const double undiscounted = p.price.value;
    EXPECT_LE(std::abs(bs_price(p.strike, 0.1, F, p.implied_vol, p.kind) - undiscounted), 1e-12 * F);
  }
}

TEST_F(SmileFromPaths, AtmNearSigmaV) {
  const auto F = estimate_forward(*paths_).value;
  const std::vector<double> k{kBase.v0};
  const auto p = smile_from_paths(*paths_, k, 0.1, 0.0, F)[0];
  EXPECT_NEAR(p.implied_vol, sigma_v(kBase.v0, kBase), 3 * (p.iv_hi - p.iv_lo) / 2);
}

TEST_F(SmileFromPaths, IncreasingAndConvex) {
  const auto F = estimate_forward(*paths_).value;
  const auto strikes = log_spaced_strikes(0.06, 0.18, 7);
  const auto pts = smile_from_paths(*paths_, strikes, 0.1, 0.0, F);
  // slope and curvature of a least-squares quadratic in log-strike
  double sx = 0, sx2 = 0, sx3 = 0, sx4 = 0, sy = 0, sxy = 0, sx2y = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const double x = p.log_strike, y = p.implied_vol;
    sx += x, sx2 += x * x, sx3 += x * x * x, sx4 += x * x * x * x;
    sy += y, sxy += x * y, sx2y += x * x * y;
  }
  // normal equations for y = c0 + c1 x + c2 x^2 (Cramer's rule)
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  };
  const double D = det3(n, sx, sx2, sx, sx2, sx3, sx2, sx3, sx4);
  const double c1 = det3(n, sy, sx2, sx, sxy, sx3, sx2, sx2y, sx4) / D;
  const double c2 = det3(n, sx, sy, sx, sx2, sxy, sx2, sx3, sx2y) / D;
  EXPECT_GT(c1, 0.0);
  EXPECT_GT(c2, 0.0);
}

TEST(SmileDegenerate, FlatAtOmegaForGbm) {
  const auto c = CapSpec::make(1.0 + 1e-12, 1e-12, kBase);
  McConfig m;
  m.n_paths = 100000;
  m.n_steps = 10;
  m.horizon = 0.1;
  m.threads = 2;
  const auto ps = simulate_capped_paths(kBase, c, m);
  const auto F = estimate_forward(ps).value;
  const auto pts = smile_from_paths(ps, log_spaced_strikes(0.07, 0.14, 9), 0.1, 0.0, F);
  for (const auto& p : pts) {
    ASSERT_EQ(p.status, SmileStatus::Ok);
    const double band = p.iv_hi - p.iv_lo;
    EXPECT_NEAR(p.implied_vol, 1.0, 1.5 * band) << "K=" << p.strike;
  }
}

TEST(SmileStatus, GapsInsteadOfFailure) {
  PathSet ps;
  ps.terminal_values = std::vector<double>(100, 0.1);  // no dispersion: every OTM price is 0
  ps.n_paths = 100;
  const std::vector<double> strikes{0.05, 0.2};
  const auto pts = smile_from_paths(ps, strikes, 0.1, 0.0, 0.1);
  for (const auto& p : pts) {
    EXPECT_EQ(p.status, SmileStatus::BelowIntrinsic);
    EXPECT_TRUE(std::isnan(p.implied_vol));
  }
}

TEST(RateConvergence, Preconditions) {
  const auto c = CapSpec::make(2.0, 1.0, kBase);
  McConfig m;
  m.n_paths = 100;
  const std::vector<double> ok{0.2, 0.1}, bad{0.1, 0.2};
  EXPECT_THROW(rate_convergence_study(kBase.v0, kBase, c, ok, m), std::invalid_argument);
  EXPECT_THROW(rate_convergence_study(0.15, kBase, c, bad, m), std::invalid_argument);
}

TEST(RateConvergence, PositiveAndSharedJv) {
  const auto c = CapSpec::make(2.0, 1.0, kBase);
  McConfig m;
  m.n_paths = 20000;
  m.n_steps = 50;
  m.threads = 2;
  const std::vector<double> Ts{0.2, 0.1};
  const auto rows = rate_convergence_study(0.15, kBase, c, Ts, m);
  for (const auto& r : rows) {
    EXPECT_EQ(r.jv, rate_function_jv(0.15, kBase, c));
    ASSERT_FALSE(r.statistically_zero);
    EXPECT_GT(r.neg_t_log_price, 0.0);
  }
  // deep OTM at tiny T with few paths: flagged rather than logged
  m.n_paths = 200;
  const std::vector<double> tiny{1e-4};
  const auto z = rate_convergence_study(0.3, kBase, c, tiny, m);
  EXPECT_TRUE(z[0].statistically_zero);
  EXPECT_TRUE(std::isnan(z[0].gap));
}
