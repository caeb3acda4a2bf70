#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "aoeecc/schedule.hpp"

using namespace aoeecc;

TEST(Schedule, FirstRoundTwoChannels) {
  ScheduleParams p{2, 1, ExplorationMode::adversarial_only};
  const auto s = make_schedule(1, p, {});
  EXPECT_NEAR(s.beta, 0.29435250562886867, 1e-15);
  EXPECT_DOUBLE_EQ(s.eta, s.beta);
  // eps is capped by 1/(2K) = 0.25
  EXPECT_DOUBLE_EQ(s.eps[0], 0.25);
  EXPECT_DOUBLE_EQ(s.gamma, 0.5);
}

TEST(Schedule, HandValuesKnownGap) {
  ScheduleParams p{8, 2, ExplorationMode::known_gap, XiForm::experiment};
  std::vector<double> gaps(8, 0.5);
  gaps[0] = 0.0;
  const auto s = make_schedule(100, p, gaps);
  EXPECT_NEAR(s.beta, 0.025491674754220223, 1e-15);
  EXPECT_NEAR(s.delta, 1.6314671842700943, 1e-13);
  EXPECT_TRUE(std::isinf(s.xi[0]));
  EXPECT_NEAR(s.xi[1], 0.00402359478108525, 1e-15);
  EXPECT_DOUBLE_EQ(s.eps[0], s.beta);
  EXPECT_DOUBLE_EQ(s.eps[1], s.xi[1]);
  EXPECT_NEAR(s.gamma, s.beta + 7 * s.xi[1], 1e-15);
}

TEST(Schedule, TheoryAverageForm) {
  ScheduleParams p{8, 2, ExplorationMode::avg, XiForm::theory, 18.0};
  std::vector<double> gaps(8, 0.5);
  const auto s = make_schedule(100, p, gaps);
  EXPECT_NEAR(s.xi[3], 15.26946655817779, 1e-12);
  // large xi leaves the adversarial cap in charge
  EXPECT_DOUBLE_EQ(s.eps[3], std::min(1.0 / 16, s.beta));
}

TEST(Schedule, SingularGapsFallBackToExp3) {
  ScheduleParams p{4, 1, ExplorationMode::avg};
  const std::vector<double> gaps{0.0, 0.01, 0.0, 0.0};
  const auto s = make_schedule(5, p, gaps);  // 5 * 0.01^2 < 1
  for (double x : s.xi) EXPECT_TRUE(std::isinf(x));
  const auto exp3 = make_schedule(5, ScheduleParams{4, 1, ExplorationMode::adversarial_only}, {});
  EXPECT_EQ(s.eps, exp3.eps);
}

TEST(Schedule, ProbingRateDividesXiAndDelta) {
  std::vector<double> gaps(8, 0.5);
  ScheduleParams one{8, 2, ExplorationMode::known_gap};
  ScheduleParams four = one;
  four.m = 4.0;
  const auto a = make_schedule(1000, one, gaps);
  const auto b = make_schedule(1000, four, gaps);
  EXPECT_NEAR(b.xi[1], a.xi[1] / 4.0, 1e-18);
  EXPECT_NEAR(b.delta, a.delta / 4.0, 1e-15);
  EXPECT_DOUBLE_EQ(a.beta, b.beta);
}

TEST(Schedule, EpsilonNeverExceedsCaps) {
  std::vector<double> gaps{0.0, 0.9, 0.3, 0.05, 0.6, 0.2};
  ScheduleParams p{6, 2, ExplorationMode::avg};
  for (long long n : {1LL, 10LL, 1000LL, 1000000LL}) {
    const auto s = make_schedule(n, p, gaps);
    double sum = 0.0;
    for (double e : s.eps) {
      EXPECT_LE(e, 1.0 / 12.0);
      EXPECT_LE(e, s.beta);
      EXPECT_GT(e, 0.0);
      sum += e;
    }
    EXPECT_NEAR(s.gamma, sum, 1e-15);
    EXPECT_LE(s.gamma, 0.5);
  }
}

TEST(Schedule, Errors) {
  std::vector<double> gaps(4, 0.1);
  EXPECT_THROW(make_schedule(0, ScheduleParams{4, 1, ExplorationMode::adversarial_only}, {}), std::domain_error);
  EXPECT_THROW(make_schedule(10, ScheduleParams{4, 1, ExplorationMode::avg, XiForm::theory, 17.9}, gaps),
               std::domain_error);
  EXPECT_THROW(make_schedule(10, ScheduleParams{4, 1, ExplorationMode::avg}, std::vector<double>(3, 0.1)),
               std::invalid_argument);
  ScheduleParams bad_m{4, 1, ExplorationMode::adversarial_only};
  bad_m.m = 0.5;
  EXPECT_THROW(make_schedule(10, bad_m, {}), std::domain_error);
}
