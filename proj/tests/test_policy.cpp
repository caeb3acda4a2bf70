#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "aoeecc/baselines.hpp"
#include "aoeecc/policy.hpp"

using namespace aoeecc;

namespace {

PolicyConfig avg_config(int K, int k, double P_o = 0.5) {
  PolicyConfig c;
  c.schedule = ScheduleParams{K, k, ExplorationMode::avg};
  c.P_o = P_o;
  return c;
}

// Feeds `rounds` deterministic rounds so the state is not the trivial prior.
void warm_up(AoeeccPolicy& p, int rounds, Rng& rng, const std::vector<double>& loss,
             const std::vector<double>& power) {
  for (int i = 0; i < rounds; ++i) {
    const auto sel = p.select(rng);
    Observation o;
    for (int f : sel.strategy) {
      o.channels.push_back(f);
      o.loss.push_back(loss[f]);
      o.power.push_back(power[f]);
    }
    p.update(sel, o);
  }
}

}  // namespace

TEST(Gaps, EmpiricalGapHandValues) {
  const std::vector<double> L{10, 4, 7};
  const auto g = estimate_gaps(L, 10);
  EXPECT_DOUBLE_EQ(g[0], 0.6);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 0.3);
  // capped at 1
  EXPECT_DOUBLE_EQ(estimate_gaps(std::vector<double>{0, 50}, 10)[1], 1.0);
  EXPECT_THROW(estimate_gaps(L, 0), std::domain_error);
}

TEST(Lagrange, HandStep) {
  Schedule s;
  s.eta = 0.1;
  s.gamma = 0.04;
  s.delta = 1.0;
  // step = 0.1 * 0.2 = 0.02; (1 - 0.02) 0.5 - 0.02 (0.5 - 0.3) = 0.486
  EXPECT_NEAR(update_lagrange(0.5, s, 0.3, 0.5), 0.486, 1e-15);
  // projection onto [0, inf)
  EXPECT_DOUBLE_EQ(update_lagrange(0.0, s, 0.0, 0.5), 0.0);
  // overshoot pushes lambda up from 0: -0.02 * (0.5 - 0.9) = 0.008
  EXPECT_NEAR(update_lagrange(0.0, s, 0.9, 0.5), 0.008, 1e-15);
}

TEST(Weights, ShiftInvariantAndClamped) {
  const std::vector<double> psi{100.0, 101.0, 1e6};
  const auto w = policy_weights(psi, 0.5);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_NEAR(w[1], std::exp(-0.5), 1e-15);
  EXPECT_NEAR(w[2], std::exp(-700.0), 1e-310);
}

TEST(Mixture, MarginalsSumToK) {
  const auto cover = build_covering_set(7, 3);
  const std::vector<double> q{0.2, 0.5, 0.4, 0.6, 0.3, 0.5, 0.5};  // sums to 3
  const std::vector<double> eps{0.01, 0.02, 0.03, 0.01, 0.02, 0.03, 0.04};
  const double gamma = std::accumulate(eps.begin(), eps.end(), 0.0);
  const auto rho = mixture_marginals(q, cover, eps, gamma);
  EXPECT_NEAR(std::accumulate(rho.begin(), rho.end(), 0.0), 3.0, 1e-14);
  // channel 0 lies in blocks 0 and 2 (padding); block 2 carries eps[6]
  EXPECT_NEAR(rho[0], (1 - gamma) * 0.2 + (0.01 + 0.02 + 0.03) + 0.04, 1e-15);
  // mass per block
  const auto mass = covering_mass(cover, eps);
  EXPECT_NEAR(mass[2], 0.04, 1e-15);
}

TEST(Policy, SelectionFrequenciesMatchReportedMarginals) {
  AoeeccPolicy p(avg_config(7, 3));
  Rng rng(3);
  warm_up(p, 50, rng, {0.1, 0.9, 0.5, 0.3, 0.7, 0.2, 0.6}, std::vector<double>(7, 0.1));
  std::vector<double> count(7, 0.0);
  std::vector<double> rho;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto sel = p.select(rng);
    rho = sel.rho;
    for (int f : sel.strategy) count[f] += 1.0;
  }
  for (int f = 0; f < 7; ++f) {
    const double sd = std::sqrt(rho[f] * (1 - rho[f]) / draws);
    EXPECT_NEAR(count[f] / draws, rho[f], 4 * sd + 1e-12) << "channel " << f;
  }
}

TEST(Policy, ImportanceWeightedUpdate) {
  AoeeccPolicy p(avg_config(4, 2));
  Selection sel;
  sel.strategy = Strategy({0, 2});
  sel.rho = {0.5, 0.5, 0.8, 0.2};
  sel.schedule = p.schedule();
  Observation o{{0, 2}, {0.4, 1.0}, {0.1, 0.2}};
  p.update(sel, o);
  const auto& s = p.state();
  EXPECT_DOUBLE_EQ(s.Ltilde[0], 0.8);
  EXPECT_DOUBLE_EQ(s.Ltilde[2], 1.25);
  EXPECT_DOUBLE_EQ(s.Ltilde[1], 0.0);
  EXPECT_DOUBLE_EQ(s.Gammatilde[2], 0.25);
  EXPECT_EQ(s.n, 1);
  // lambda was 0 before the round, so Psi equals the loss estimate
  EXPECT_DOUBLE_EQ(s.Psitilde[2], 1.25);
  // p.P = 0.5 * 0.2 + 0.8 * 0.25 = 0.3 < P_o: lambda stays at 0
  EXPECT_DOUBLE_EQ(s.lambda, 0.0);
}

TEST(Policy, ZeroMarginalOnObservedChannelIsInvariantViolation) {
  AoeeccPolicy p(avg_config(3, 1));
  Selection sel;
  sel.strategy = Strategy({1});
  sel.rho = {0.5, 0.0, 0.5};
  sel.schedule = p.schedule();
  EXPECT_THROW(p.update(sel, Observation{{1}, {0.5}, {0.1}}), InvariantViolation);
}

TEST(Policy, LambdaRisesUnderPersistentOverspend) {
  AoeeccPolicy p(avg_config(4, 1, 0.1));
  Rng rng(5);
  warm_up(p, 2000, rng, {0.2, 0.4, 0.6, 0.8}, std::vector<double>(4, 1.0));
  EXPECT_GT(p.state().lambda, 0.0);
  EXPECT_TRUE(std::isfinite(p.state().lambda));
}

TEST(Policy, UnconstrainedKeepsLambdaZero) {
  AoeeccPolicy p(exp3_config(avg_config(4, 1, 0.0)));
  Rng rng(5);
  warm_up(p, 500, rng, {0.2, 0.4, 0.6, 0.8}, std::vector<double>(4, 1.0));
  EXPECT_DOUBLE_EQ(p.state().lambda, 0.0);
}

TEST(Policy, ConcentratesOnBestChannels) {
  AoeeccPolicy p(avg_config(6, 2));
  Rng rng(11);
  warm_up(p, 20000, rng, {0.1, 0.1, 0.9, 0.9, 0.9, 0.9}, std::vector<double>(6, 0.1));
  const auto sel = p.select(rng);
  EXPECT_GT(sel.rho[0], 0.9);
  EXPECT_GT(sel.rho[1], 0.9);
}

TEST(Policy, KnownGapModeNeedsGaps) {
  PolicyConfig c = avg_config(4, 2);
  c.schedule.mode = ExplorationMode::known_gap;
  EXPECT_THROW(AoeeccPolicy{c}, std::invalid_argument);
}

TEST(Access, ProbabilityAndDomain) {
  Rng rng(2);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += access_decision(0.3, rng);
  EXPECT_NEAR(hits / 1e5, 0.3, 4 * std::sqrt(0.21 / 1e5));
  EXPECT_TRUE(access_decision(1.0, rng));
  EXPECT_THROW(access_decision(0.0, rng), std::domain_error);
}

namespace {

// Inner learner that records what it is told.
class Recorder : public Learner {
 public:
  const Decision& decide(Rng&) override {
    ++decisions;
    d.played = Strategy({decisions % 2, 2});
    d.observed = d.played.channels();
    d.rho = {0.5, 0.5, 1.0};
    return d;
  }
  void learn(const Feedback& fb) override { seen.emplace_back(fb.loss.begin(), fb.loss.end()); }
  std::string name() const override { return "rec"; }

  int decisions = 0;
  Decision d;
  std::vector<std::vector<double>> seen;
};

}  // namespace

TEST(Minibatch, ReplaysAndAverages) {
  auto rec = std::make_unique<Recorder>();
  auto* raw = rec.get();
  MinibatchLearner mb(std::move(rec), 3);
  Rng rng(1);
  std::vector<int> ch;
  for (int t = 0; t < 6; ++t) {
    const auto& d = mb.decide(rng);
    ch.push_back(d.played[0]);
    const std::vector<double> loss{double(t), 1.0};
    const std::vector<double> power{0.0, 0.0};
    mb.learn(Feedback{d.observed, loss, power});
  }
  EXPECT_EQ(raw->decisions, 2);
  EXPECT_EQ(ch, (std::vector<int>{1, 1, 1, 0, 0, 0}));
  ASSERT_EQ(raw->seen.size(), 2u);
  EXPECT_DOUBLE_EQ(raw->seen[0][0], 1.0);  // mean of 0, 1, 2
  EXPECT_DOUBLE_EQ(raw->seen[1][0], 4.0);
}

TEST(Minibatch, BatchSizeFormula) {
  EXPECT_EQ(minibatch_size(8, 2, 100000), 15);  // 14.53 rounded
  EXPECT_EQ(minibatch_size(32, 4, 1000000), 18);
  EXPECT_EQ(minibatch_size(8, 2, 1), 1);
  EXPECT_THROW(MinibatchLearner(std::make_unique<Recorder>(), 0), std::domain_error);
}
