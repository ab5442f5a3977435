#include "curriculum/regret_bench.h"

#include <numeric>
#include <stdexcept>

#include "gtest/gtest.h"

namespace curriculum {
namespace {

TEST(RegretBenchTest, InstanceIsUnitNormAndBestIsMax) {
  RegretBenchConfig cfg;
  cfg.seed = 3;
  const auto inst = MakeLinearBanditInstance(cfg);
  ASSERT_EQ(inst.arms.size(), 20u);
  EXPECT_NEAR(inst.theta_star.norm(), 1.0, 1e-12);
  double best = -2.0;
  for (std::size_t a = 0; a < inst.arms.size(); ++a) {
    EXPECT_NEAR(inst.arms[a].norm(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(inst.expected_rewards[a], inst.theta_star.dot(inst.arms[a]));
    best = std::max(best, inst.expected_rewards[a]);
  }
  EXPECT_EQ(inst.best_reward, best);
}

TEST(RegretBenchTest, LinUcbBeatsUniformAndIsSublinear) {
  for (std::uint64_t seed : {1, 2, 3}) {
    RegretBenchConfig cfg;
    cfg.seed = seed;
    const auto r = RunRegretBench(cfg);
    ASSERT_EQ(r.linucb.size(), 10000u);
    EXPECT_LT(r.linucb.back(), 0.1 * r.uniform_random.back()) << seed;
    const double first = r.linucb[4999];
    EXPECT_LT(r.linucb.back() - first, first) << seed;
  }
}

TEST(RegretBenchTest, UniformRegretMatchesExpectation) {
  RegretBenchConfig cfg;
  cfg.seed = 4;
  cfg.horizon = 40000;
  const auto inst = MakeLinearBanditInstance(cfg);
  const double mean = std::accumulate(inst.expected_rewards.begin(),
                                      inst.expected_rewards.end(), 0.0) /
                      static_cast<double>(inst.arms.size());
  const auto curve = RunUniformRandomRegret(inst, cfg);
  const double per_round = curve.back() / cfg.horizon;
  EXPECT_NEAR(per_round, inst.best_reward - mean, 0.02);
}

TEST(RegretBenchTest, CumulativeRegretIsNonDecreasing) {
  RegretBenchConfig cfg;
  cfg.seed = 5;
  cfg.horizon = 2000;
  const auto r = RunRegretBench(cfg);
  for (std::size_t t = 1; t < r.linucb.size(); ++t) {
    EXPECT_GE(r.linucb[t], r.linucb[t - 1]);
    EXPECT_GE(r.uniform_random[t], r.uniform_random[t - 1]);
  }
  EXPECT_GE(r.linucb.front(), 0.0);
}

TEST(RegretBenchTest, GreedyNoiselessCommitsToOneArm) {
  // With alpha = 0 and exact rewards the estimate stops moving once one arm
  // keeps winning, so per-round regret becomes constant.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RegretBenchConfig cfg;
    cfg.alpha = 0.0;
    cfg.noise = 0.0;
    cfg.horizon = 3000;
    cfg.seed = seed;
    const auto curve = RunRegretBench(cfg).linucb;
    const double step = curve[2000] - curve[1999];
    for (std::size_t t = 2001; t < curve.size(); ++t) {
      EXPECT_NEAR(curve[t] - curve[t - 1], step, 1e-12) << "seed " << seed << " t " << t;
    }
  }
}

TEST(RegretBenchTest, SameSeedSameCurve) {
  RegretBenchConfig cfg;
  cfg.seed = 8;
  cfg.horizon = 500;
  EXPECT_EQ(RegretCurveCsv(RunRegretBench(cfg).linucb),
            RegretCurveCsv(RunRegretBench(cfg).linucb));
}

TEST(RegretBenchTest, CsvFormat) {
  EXPECT_EQ(RegretCurveCsv({0.5, 1.25}), "t,cumulative_regret\n1,0.5\n2,1.25\n");
}

TEST(RegretBenchTest, RejectsInvalidConfig) {
  RegretBenchConfig cfg;
  cfg.horizon = 0;
  EXPECT_THROW(RunRegretBench(cfg), std::invalid_argument);
  cfg = {};
  cfg.noise = -1.0;
  EXPECT_THROW(RunRegretBench(cfg), std::invalid_argument);
  cfg = {};
  cfg.arms = 0;
  EXPECT_THROW(RunRegretBench(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace curriculum
