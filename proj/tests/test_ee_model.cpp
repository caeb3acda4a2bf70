#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "aoeecc/ee_model.hpp"

using namespace aoeecc;

TEST(Rate, HandValue) {
  LinkParams l;
  l.W = 2.0;
  l.gain_self = 1.0;
  l.noise_power = 1.0;
  EXPECT_NEAR(instant_rate(l, 3.0), 2.772588722239781, 1e-14);  // 2 ln 4
  EXPECT_DOUBLE_EQ(instant_rate(l, 0.0), 0.0);
}

TEST(Rate, InterferenceLowersRate) {
  LinkParams l;
  const double clean = instant_rate(l, 1.0);
  l.jammer_interference = 2.0;
  EXPECT_LT(instant_rate(l, 1.0), clean);
  EXPECT_NEAR(instant_rate(l, 1.0), std::log1p(1.0 / 3.0), 1e-15);
}

TEST(Rate, Errors) {
  LinkParams l;
  EXPECT_THROW(instant_rate(l, -1.0), std::domain_error);
  l.noise_power = 0.0;
  EXPECT_THROW(instant_rate(l, 1.0), std::domain_error);
  EXPECT_THROW(channel_ee(1.0, 0.0, 0.0), std::domain_error);
  EXPECT_THROW(strategy_ee(std::vector<double>{}), std::invalid_argument);
}

TEST(Ee, ChannelStrategyAndAggregate) {
  EXPECT_DOUBLE_EQ(channel_ee(3.0, 0.5, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(strategy_ee(std::vector<double>{1.0, 2.0, 6.0}), 3.0);
  const std::vector<double> r{2.0, 2.0}, pc{0.5, 0.5}, ptx{0.5, 0.5};
  EXPECT_DOUBLE_EQ(aggregate_ee(r, pc, ptx), 2.0);
}

TEST(Ee, EqualChannelsCollapseTheChain) {
  const std::vector<double> r{1.5, 1.5, 1.5}, pc{0.2, 0.2, 0.2}, ptx{0.3, 0.3, 0.3};
  std::vector<double> per;
  for (int i = 0; i < 3; ++i) per.push_back(channel_ee(r[i], pc[i], ptx[i]));
  EXPECT_NEAR(strategy_ee(per), aggregate_ee(r, pc, ptx), 1e-15);
}

TEST(Ee, OuterBoundsOfTheChain) {
  // Both averages lie between the extreme per-channel EEs.
  Rng rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = 1 + static_cast<int>(uniform_index(rng, 5));
    std::vector<double> r(k), pc(k), ptx(k), per(k);
    for (int i = 0; i < k; ++i) {
      r[i] = 5 * uniform01(rng);
      pc[i] = 0.01 + uniform01(rng);
      ptx[i] = uniform01(rng);
      per[i] = channel_ee(r[i], pc[i], ptx[i]);
    }
    const double lo = *std::min_element(per.begin(), per.end());
    const double hi = *std::max_element(per.begin(), per.end());
    const double mean = strategy_ee(per), agg = aggregate_ee(r, pc, ptx);
    EXPECT_LE(mean, hi * (1 + 1e-12));
    EXPECT_GE(mean, lo * (1 - 1e-12));
    EXPECT_LE(agg, hi * (1 + 1e-12));
    EXPECT_GE(agg, lo * (1 - 1e-12));
  }
}

TEST(Timing, BudgetClosedForm) {
  TimingParams t;  // 0.01 + 0.01 sensing/probing, 2 s access
  EXPECT_DOUBLE_EQ(time_budget(100, 1.0, t), 202.0);
  EXPECT_DOUBLE_EQ(time_budget(100, 0.5, t), 102.0);
  EXPECT_DOUBLE_EQ(t.alpha(), 100.0);
}

TEST(Timing, LowerBoundHandValue) {
  TimingParams t;
  EXPECT_NEAR(ee_lower_bound(1.0, 10000, 8, 2, 1.0, t), 0.6670362011346348, 1e-14);
  EXPECT_THROW(ee_lower_bound(1.0, 0, 8, 2, 1.0, t), std::domain_error);
}

TEST(Timing, SensingBoundReducesToPerfectSensing) {
  // With P_fa = 0 and T = n t_sp (1 + alpha eps), both floors coincide.
  TimingParams t;
  const long long n = 50000;
  const double eps = 0.7;
  const double T = n * t.t_sp() * (1 + t.alpha() * eps);
  EXPECT_NEAR(ee_lower_bound_sensing(0.9, T, 8, 2, eps, t, 0.0), ee_lower_bound(0.9, n, 8, 2, eps, t), 1e-12);
  EXPECT_LT(ee_lower_bound_sensing(0.9, T, 8, 2, eps, t, 0.3), ee_lower_bound(0.9, n, 8, 2, eps, t));
}

TEST(Sensing, QFunctionAndFalseAlarm) {
  EXPECT_DOUBLE_EQ(q_function(0.0), 0.5);
  EXPECT_NEAR(q_function(1.96), 0.024997895148220435, 1e-15);
  // (1.05 - 1) sqrt(0.01 * 1e4) = 0.5
  EXPECT_NEAR(false_alarm(0.01, 1e4, 1.05), 0.3085375387259869, 1e-14);
  EXPECT_THROW(false_alarm(0.0, 1.0, 1.0), std::domain_error);
}

namespace {

// Independent derivation: choose T so SPA and SA tie exactly at t_p = t_s.
// With u = 1/sqrt(T): (G - c_p u)/D_p = (G - c_s u)/D_s.
double tie_horizon(double ts, double ta, int K, int k, double eps, double G) {
  const double tsp = 2 * ts;
  const double ap = ta / tsp, as = ta / ts;
  const double kl = K * std::log(double(K));
  const double cp = 4.0 * k * std::sqrt((1 + ap * eps) * tsp * kl);
  const double cs = 4.0 * k * std::sqrt((1 + as * eps) * ts * kl / eps);
  const double Dp = 1 / (ap * eps) + 1, Ds = 1 / (as * eps) + 1;
  const double u = G * (Ds - Dp) / (cp * Ds - cs * Dp);
  return 1.0 / (u * u);
}

}  // namespace

TEST(Crossover, RecoversConstructedTie) {
  CrossoverInputs in;
  in.t_s = 0.01;
  in.t_a = 2.0;
  in.K = 8;
  in.k = 2;
  in.eps = 0.5;
  in.G_max = 1.0;
  in.T = tie_horizon(in.t_s, in.t_a, in.K, in.k, in.eps, in.G_max);
  ASSERT_GT(in.T, 0.0);
  const auto t = probing_crossover(in);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, in.t_s, 1e-9);
  EXPECT_LE(std::fabs(probing_advantage(in, *t)), 1e-9);
}

TEST(Crossover, PartialAccessMakesProbingWorthSomething) {
  CrossoverInputs in{0.01, 2.0, 16, 4, 0.3, 1e5, 1.0};
  const auto t = probing_crossover(in);
  ASSERT_TRUE(t.has_value());
  EXPECT_GT(*t, 0.0);
  EXPECT_GT(probing_advantage(in, *t / 2), 0.0);
  EXPECT_LT(probing_advantage(in, *t * 2), 0.0);
}

TEST(Crossover, FullAccessHasNoCrossover) {
  CrossoverInputs in{0.01, 2.0, 8, 2, 1.0, 1e4, 1.0};
  EXPECT_FALSE(probing_crossover(in).has_value());
  in.T = -1.0;
  EXPECT_THROW(probing_crossover(in), std::domain_error);
}

TEST(Fading, MeansArePreserved) {
  Rng rng(21);
  for (auto kind : {FadingKind::rayleigh, FadingKind::rician}) {
    FadingModel f{kind, 4.0};
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = f.draw(2.0, rng);
      ASSERT_GE(g, 0.0);
      s += g;
      s2 += g * g;
    }
    const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
    EXPECT_NEAR(mean, 2.0, 4 * sd / std::sqrt(double(n)));
  }
  FadingModel none;
  EXPECT_DOUBLE_EQ(none.draw(3.0, rng), 3.0);
}

TEST(Physical, GainsNormalizedToUnitInterval) {
  PhysicalChannelModel m;
  for (int f = 0; f < 4; ++f) {
    LinkParams l;
    l.gain_self = 1.0 + f;
    l.P_c = 0.2;
    l.pu_interference = 0.1 * f;
    m.links.push_back(l);
    m.success.push_back(SuccessModel{0.1});
  }
  const std::vector<double> power{0.5, 0.5, 0.25, 0.0};
  Rng rng(1);
  const auto g = m.gains(power, 2, rng);
  for (double x : g) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  EXPECT_DOUBLE_EQ(g[3], 0.0);  // no transmit power, no rate
  // channel 3 at full power and no interference defines the normalizer
  LinkParams best = m.links[3];
  best.pu_interference = 0.0;
  EXPECT_NEAR(m.default_normalizer(2), channel_ee(instant_rate(best, 0.5), 0.2, 0.5), 1e-15);
}

TEST(Physical, InterruptionDiscountsGain) {
  EXPECT_DOUBLE_EQ(channel_gain(0.8, SuccessModel{0.25}, true), 0.6);
  EXPECT_DOUBLE_EQ(channel_gain(0.8, SuccessModel{0.25}, false), 0.0);
}
