#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mrc/errors.hpp"
#include "mrc/mrc_rp.hpp"

namespace {

constexpr double kLn2 = std::numbers::ln2;

mrc::SlaveParams slave(double h, double p_c = 0.0) {
  mrc::SlaveParams p;
  p.id = 1;
  p.e_s = 1e-9;
  p.p_s = 0.1;
  p.C = 500;
  p.U = 1e9;
  p.p_cmp = 3e-9;
  p.p_c = p_c;
  p.B = 1e7;
  p.N = 1e-12;
  p.h = h;
  p.E_init = 3.0;
  return p;
}

mrc::TimeBudget budget(mrc::LocalWindow w = mrc::LocalWindow::kCycleCount) {
  return {0.04, 0.04, 0.04, w};
}

// Direct energy of processing D with split (x, t); no closed forms involved.
double direct_energy(const mrc::OffloadChannel& ch, double D, double x, double t) {
  double e = (D - x) * ch.c;
  if (x > 0.0) e += t / ch.h * ch.N * (std::pow(2.0, x / (ch.B * t)) - 1.0) + ch.p_c * t;
  return e;
}

// Brute-force 2-D grid over (D_off, t_off).
double grid_energy(const mrc::OffloadChannel& ch, double D, int n = 400) {
  const double lo = std::max(D - ch.local_bits, 0.0);
  double best = lo == 0.0 ? D * ch.c : INFINITY;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (D - lo) * i / n;
    if (x == 0.0) continue;
    for (int j = 1; j <= n; ++j) {
      const double t = ch.T * j / n;
      best = std::min(best, direct_energy(ch, D, x, t));
    }
  }
  return best;
}

}  // namespace

TEST(FairnessWeights, Examples) {
  auto b = mrc::fairness_weights({3.0, 2.5, 0.5});
  EXPECT_NEAR(b[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(b[1], 0.2, 1e-15);
  EXPECT_EQ(b[2], 1.0);
  b = mrc::fairness_weights({1.0, 2.0});
  EXPECT_EQ(b[0], 1.0);
  EXPECT_EQ(b[1], 0.5);
  b = mrc::fairness_weights({2.0, 2.0, 2.0});
  for (double v : b) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(mrc::fairness_weights({1.0, 0.0}), mrc::InvalidParameter);
}

TEST(PriorityIndicator, Examples) {
  EXPECT_NEAR(mrc::priority_indicator(1e7, 1e-6, 500, 3e-9, 1e-12), 1.5e-5 / (1e-12 * kLn2), 1e-3);
  EXPECT_NEAR(mrc::priority_indicator(1e7, 1e-6, 500, 3e-9, 1e-12), 2.1640e7, 1e3);
  EXPECT_NEAR(mrc::priority_indicator(1e7, 1e-12, 500, 3e-9, 1e-12), 21.640, 1e-3);
  EXPECT_NEAR(mrc::priority_indicator(1e7, 1e-14, 500, 3e-9, 1e-12), 0.21640, 1e-5);
}

TEST(ThresholdGamma, Examples) {
  EXPECT_EQ(mrc::threshold_gamma(1.0, 1e-12, 1e-6), 0.0);
  EXPECT_EQ(mrc::threshold_gamma(0.5, 1e-12, 1e-6), 0.0);
  EXPECT_NEAR(mrc::threshold_gamma(std::numbers::e, 1e-12, 1e-6), 1e-6, 1e-20);
}

TEST(ThresholdGamma, MonotoneInParameters) {
  const double B = 1e7, N = 1e-12;
  auto g = [&](double h, double C, double p) {
    return mrc::threshold_gamma(mrc::priority_indicator(B, h, C, p, N), N, h);
  };
  for (double h : {1e-12, 1e-9, 1e-6}) {
    for (double C : {200.0, 500.0, 1000.0}) {
      for (double p : {1e-9, 3e-9, 1e-8}) {
        const double base = g(h, C, p);
        EXPECT_GE(g(h * 1.001, C, p) - base, -1e-12);
        EXPECT_GE(g(h, C * 1.001, p) - base, -1e-12);
        EXPECT_GE(g(h, C, p * 1.001) - base, -1e-12);
      }
    }
  }
}

TEST(OffloadRatio, Examples) {
  const double B = 1e7, N = 1e-12, h = 1e-6;
  EXPECT_EQ(mrc::offload_ratio(0.0, B, N, h), 0.0);
  EXPECT_NEAR(mrc::offload_ratio(N / h, B, N, h), B / kLn2, 1e-6 * B);
  EXPECT_NEAR(B / kLn2, 1.442695e7, 1.0);
  EXPECT_THROW(mrc::offload_ratio(-1.0, B, N, h), mrc::DomainError);
  double prev = 0.0;
  for (double phi = 1e-9; phi < 1.0; phi *= 3.0) {
    const double r = mrc::offload_ratio(phi, B, N, h);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(OffloadRatio, ThresholdIdentity) {
  const double B = 1e7, N = 1e-12, h = 1e-6;
  for (double O = 1.0 + 1e-6; O < 1e9; O *= 1.37) {
    const double r = mrc::offload_ratio(mrc::threshold_gamma(O, N, h), B, N, h);
    EXPECT_NEAR(r, B * std::log2(O), 1e-9 * B * std::log2(O)) << O;
  }
}

TEST(OffloadRatio, MultiplierRoundTrip) {
  const double B = 1e7, N = 1e-12, h = 1e-8;
  for (double r = 1e3; r < 1e9; r *= 4.1) {
    EXPECT_NEAR(mrc::offload_ratio(mrc::multiplier_for_ratio(r, B, N, h), B, N, h), r, 1e-9 * r);
  }
}

TEST(SolveP5, NoOffloadWhenChannelPoor) {
  const auto d = mrc::solve_p5_per_slave(slave(1e-14), 5e4, budget());
  EXPECT_EQ(d.tag, mrc::OffloadCase::kNoOffload);
  EXPECT_EQ(d.D_off, 0.0);
  EXPECT_EQ(d.t_off, 0.0);
  EXPECT_EQ(d.phi, 0.0);
}

TEST(SolveP5, MandatoryMinimumWhenChannelPoor) {
  const auto p = slave(1e-14);
  const auto d = mrc::solve_p5_per_slave(p, 4e5, budget());
  EXPECT_EQ(d.tag, mrc::OffloadCase::kMandatoryMinimum);
  EXPECT_DOUBLE_EQ(d.D_off, 4e5 - 8e4);
  EXPECT_EQ(d.t_off, 0.04);
  EXPECT_GT(d.phi, 0.0);
  // phi agrees with the closed form -g(D_off/T)/h.
  const double closed = mrc::multiplier_for_ratio(d.D_off / 0.04, p.B, p.N, p.h);
  EXPECT_NEAR(d.phi, closed, 1e-9 * closed);
}

TEST(SolveP5, FullOffloadOnGoodChannel) {
  const auto p = slave(1e-6);
  const auto d = mrc::solve_p5_per_slave(p, 4e6, budget());
  EXPECT_EQ(d.tag, mrc::OffloadCase::kFullOffload);
  EXPECT_EQ(d.D_off, 4e6);
  // Stretching transmission to the full window is cheaper than B log2 O.
  EXPECT_EQ(d.t_off, 0.04);
  const auto ch = mrc::OffloadChannel::for_slave(p, budget());
  const double at_ratio = direct_energy(ch, 4e6, 4e6, 4e6 / (1e7 * std::log2(ch.priority())));
  EXPECT_LT(direct_energy(ch, 4e6, d.D_off, d.t_off), at_ratio);
  EXPECT_LT(d.phi, ch.profile().gamma);
}

TEST(SolveP5, WindowClampedSplit) {
  // O ~ 21.6: offloading pays only up to B*T*log2(O) ~ 1.78e6 bits.
  const auto p = slave(1e-12);
  const auto tb = budget(mrc::LocalWindow::kBitRate);
  const auto d = mrc::solve_p5_per_slave(p, 4e6, tb);
  EXPECT_EQ(d.tag, mrc::OffloadCase::kWindowClamped);
  const auto ch = mrc::OffloadChannel::for_slave(p, tb);
  EXPECT_NEAR(d.D_off, 1e7 * 0.04 * std::log2(ch.priority()), 1e-6);
  EXPECT_EQ(d.t_off, 0.04);
  EXPECT_NEAR(d.phi, ch.profile().gamma, 1e-9 * ch.profile().gamma);
}

TEST(SolveP5, ZeroData) {
  const auto d = mrc::solve_p5_per_slave(slave(1e-6), 0.0, budget());
  EXPECT_EQ(d.tag, mrc::OffloadCase::kNoOffload);
  EXPECT_EQ(d.D_off, 0.0);
  const auto all = mrc::solve_p5({slave(1e-6), slave(1e-9)}, {0.0, 0.0}, budget());
  for (const auto& x : all) EXPECT_EQ(x.D_off, 0.0);
}

TEST(SolveP5, CircuitPowerUsesShortBurst) {
  // With circuit power a small payload is sent at the per-bit optimal ratio.
  const auto p = slave(1e-6, 0.05);
  const auto tb = budget(mrc::LocalWindow::kBitRate);
  const auto ch = mrc::OffloadChannel::for_slave(p, tb);
  const double rho = ch.min_ratio();
  ASSERT_GT(rho, 0.0);
  const double D = 0.25 * rho * tb.T_s_cmp;
  const auto d = mrc::solve_p5_per_slave(p, D, tb);
  if (d.D_off > 0.0) {
    EXPECT_NEAR(d.t_off, d.D_off / rho, 1e-12);
    EXPECT_EQ(d.phi, 0.0);
  }
  EXPECT_LE(mrc::kkt_residuals(ch, D, d).max(), 1e-6);
}

TEST(SolveP5, MatchesGridOracleAndKkt) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 150; ++i) {
    auto p = slave(std::pow(10.0, -14.0 + 8.0 * u(rng)), u(rng) < 0.3 ? 0.02 * u(rng) : 0.0);
    p.C = 200 + 800 * u(rng);
    p.p_cmp = 1e-9 + 9e-9 * u(rng);
    p.U = 1e8 + 9e8 * u(rng);
    const auto tb = budget(u(rng) < 0.5 ? mrc::LocalWindow::kBitRate : mrc::LocalWindow::kCycleCount);
    const double D = 1e5 + 4e6 * u(rng);
    const auto ch = mrc::OffloadChannel::for_slave(p, tb);
    const auto d = mrc::solve_p5_channel(ch, D);
    const double e = direct_energy(ch, D, d.D_off, d.t_off);
    EXPECT_NEAR(e, ch.processing_energy(D), 1e-9 * e);
    const double g = grid_energy(ch, D, 200);
    EXPECT_LE(e, g * (1.0 + 1e-9)) << i;
    EXPECT_GE(e, g * 0.9) << i;
    const auto r = mrc::kkt_residuals(ch, D, d);
    EXPECT_LE(r.max(), 1e-6) << i << " " << r.offload_stationarity << " "
                             << r.time_stationarity << " " << r.complementary;
    if (d.phi > 0.0) EXPECT_EQ(d.t_off, tb.T_s_cmp);
    EXPECT_LE(d.t_off, tb.T_s_cmp);
  }
}

TEST(SolveP5, BinaryStructure) {
  // Interior splits only appear with the window binding and phi > 0.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    auto p = slave(std::pow(10.0, -15.0 + 9.0 * u(rng)));
    p.C = 200 + 800 * u(rng);
    const double D = 1e4 + 4e6 * u(rng);
    const auto d = mrc::solve_p5_per_slave(p, D, budget());
    if (d.tag == mrc::OffloadCase::kWindowClamped) {
      EXPECT_EQ(d.t_off, 0.04);
      EXPECT_GT(d.phi, 0.0);
    }
  }
}

TEST(ProcessingEnergy, DerivativeMatchesFiniteDifference) {
  for (double h : {1e-14, 1e-12, 1e-9, 1e-6}) {
    for (double p_c : {0.0, 0.01}) {
      const auto ch = mrc::OffloadChannel::for_slave(slave(h, p_c), budget());
      for (double D = 2e4; D < 5e6; D *= 1.9) {
        const double step = 1e-4 * D;
        const double fd = (ch.processing_energy(D + step) - ch.processing_energy(D - step)) / (2 * step);
        EXPECT_NEAR(ch.processing_marginal(D), fd, 1e-4 * std::abs(fd) + 1e-18) << h << " " << D;
      }
    }
  }
}

TEST(SolveP4, AllOnCheapestWithinCapacity) {
  std::vector<mrc::SlaveParams> s{slave(1e-6), slave(1e-6)};
  s[1].p_s = 0.2;
  s[1].e_s = 2e-9;
  const auto plan = mrc::solve_p4(s, {30.0, 30.0}, {1.0, 1.0}, 2e6, 0.04);
  EXPECT_NEAR(plan.D[0], 2e6, 1e-3);
  EXPECT_NEAR(plan.D[1], 0.0, 1e-3);
  EXPECT_NEAR(plan.t_s[0], 0.02, 1e-12);
}

TEST(SolveP4, OverflowSpillsInCostOrder) {
  std::vector<mrc::SlaveParams> s{slave(1e-6), slave(1e-6), slave(1e-6)};
  s[1].p_s = 0.3;  // costs 3x per bit
  s[1].e_s = 3e-9;
  s[2].p_s = 0.2;
  s[2].e_s = 2e-9;
  // Reserve of SR1 caps it at well under the demand.
  const double burn = 0.1 + 0.1 / 1e-9 * 500 * 3e-9;
  const double r0 = 0.01 * burn;
  const auto plan = mrc::solve_p4(s, {r0, 30.0, 30.0}, {1.0, 1.0, 1.0}, 3e6, 0.04);
  EXPECT_NEAR(plan.D[0], 1e6, 1.0);
  EXPECT_NEAR(plan.D[2], 2e6, 1.0);
  EXPECT_NEAR(plan.D[1], 0.0, 1.0);
  // Reserve covers sensing plus full local compute.
  for (std::size_t k = 0; k < 3; ++k) {
    const double need = s[k].p_s * plan.t_s[k] + plan.D[k] * s[k].C * s[k].p_cmp;
    EXPECT_GE((k == 0 ? r0 : 30.0) - need, -1e-12);
  }
}

TEST(SolveP4, EqualCostGoesToLowerIndex) {
  std::vector<mrc::SlaveParams> s{slave(1e-6), slave(1e-6)};
  const auto plan = mrc::solve_p4(s, {30.0, 30.0}, {1.0, 1.0}, 1e6, 0.04);
  EXPECT_NEAR(plan.D[0], 1e6, 1e-3);
  EXPECT_NEAR(plan.D[1], 0.0, 1e-3);
}

TEST(SolveP4, ZeroDemandAndShortfall) {
  std::vector<mrc::SlaveParams> s{slave(1e-6)};
  const auto plan = mrc::solve_p4(s, {3.0}, {1.0}, 0.0, 0.04);
  EXPECT_EQ(plan.D[0], 0.0);
  EXPECT_THROW(mrc::solve_p4(s, {3.0}, {1.0}, 1e8, 0.04), mrc::Infeasible);
}

TEST(SolveMasterRp, Cases) {
  mrc::MasterParams m{100, 1e9, 1e-8, 0.0, 1e7, 1e-12, 1e-14, 10.0};
  const auto tb = budget();
  EXPECT_EQ(mrc::solve_master_rp(m, 0.0, tb).D_off, 0.0);
  // O_M = 1e7*1e-14*1e-6/(1e-12 ln2) < 1: only the mandatory amount leaves.
  const auto d = mrc::solve_master_rp(m, 1e6, tb);
  EXPECT_DOUBLE_EQ(d.D_off, 1e6 - 1e9 * 0.04 / 100);
  EXPECT_EQ(d.tag, mrc::OffloadCase::kMandatoryMinimum);
  m.h_M = 1e-9;
  const auto ch = mrc::OffloadChannel::for_master(m, tb);
  const auto g = mrc::solve_master_rp(m, 1e6, tb);
  const double e = direct_energy(ch, 1e6, g.D_off, g.t_off);
  EXPECT_LE(e, grid_energy(ch, 1e6) * (1.0 + 1e-9));
  EXPECT_GE(e, grid_energy(ch, 1e6) * 0.99);
}
