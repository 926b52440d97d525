// Copyright 2026 The MPMI Shared Control Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mpmi/environment.h"
#include "mpmi/mpmi.h"
#include "mpmi/predictor.h"
#include "mpmi/rollout.h"
#include "mpmi/sampling.h"
#include "mpmi/worker_pool.h"
#include "toy.h"

namespace mpmi {
namespace {

std::span<const double> Span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Exhaustive reference for the selection rule.
int BruteForceSelect(const RolloutBatch& batch, const SampleSet& samples,
                     std::span<const double> u_h) {
  int best_steps = 0;
  for (int i = 0; i < batch.size(); ++i) best_steps = std::max(best_steps, batch.safe_steps(i));
  const int eligible = batch.fully_safe_count() > 0 ? batch.steps() : best_steps;
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < batch.size(); ++i) {
    if (batch.safe_steps(i) != eligible) continue;
    double d2 = 0;
    for (int j = 0; j < samples.dims(); ++j) {
      const double e = samples.sample(i)[j] - u_h[j];
      d2 += e * e;
    }
    if (std::sqrt(d2) < best_cost) {
      best_cost = std::sqrt(d2);
      best = i;
    }
  }
  return best;
}

class ToyTest : public ::testing::Test {
 protected:
  ToyTest()
      : env_(std::make_shared<ToyEnvironment>(0.5)),
        model_(env_),
        samples_(SampleSet::Grid(ControlSpace::BalanceBot(), {101})) {
    horizon_.steps = 5;
  }

  SharedControlDecision Step(double u_h) {
    const Eigen::VectorXd uh = Eigen::VectorXd::Constant(1, u_h);
    return MpmiStep(0, Span(x_), Span(uh), model_, *env_, samples_, horizon_, pool_, &batch_);
  }

  std::shared_ptr<ToyEnvironment> env_;
  GroundTruthPredictor model_;
  SampleSet samples_;
  HorizonConfig horizon_;
  WorkerPool pool_{1};
  RolloutBatch batch_;
  Eigen::Vector3d x_{1, 0, 0};
};

TEST_F(ToyTest, UnsafeInputMovesToSafeSetEdge) {
  const SharedControlDecision d = Step(-1.0);
  EXPECT_NEAR(d.u_r[0], 0.5, 1e-12);
  EXPECT_NEAR(d.deviation, 1.5, 1e-12);
  EXPECT_EQ(d.deviation, d.deviation_to_closest_safe);
  EXPECT_FALSE(d.fallback_used);
  EXPECT_FALSE(d.nearest_safe);
  EXPECT_EQ(d.n_safe, 26);
  EXPECT_DOUBLE_EQ(d.percent_safe, 26.0 / 101.0);
  EXPECT_EQ(d.selected_index, BruteForceSelect(batch_, samples_, Span(d.u_h)));
}

TEST_F(ToyTest, SafeInputPassesThrough) {
  for (int k = 75; k <= 100; ++k) {
    const double u = samples_.coordinate(0, k);
    const SharedControlDecision d = Step(u);
    EXPECT_EQ(d.u_r[0], u);
    EXPECT_EQ(d.deviation, 0.0);
    EXPECT_TRUE(d.nearest_safe);
  }
}

TEST_F(ToyTest, MatchesBruteForceOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (int trial = 0; trial < 500; ++trial) {
    const SharedControlDecision d = Step(dist(rng));
    EXPECT_EQ(d.selected_index, BruteForceSelect(batch_, samples_, Span(d.u_h)));
    EXPECT_GE(d.u_r[0], 0.5 - 1e-12);
  }
}

TEST_F(ToyTest, ClampsOutOfBoxInput) {
  const SharedControlDecision d = Step(3.0);
  EXPECT_TRUE(d.input_clamped);
  EXPECT_EQ(d.u_h[0], 1.0);
  EXPECT_EQ(d.u_r[0], 1.0);
  EXPECT_EQ(d.deviation, 0.0);
  EXPECT_FALSE(Step(0.9).input_clamped);
}

TEST_F(ToyTest, CostScaleDoesNotChangeSelection) {
  const Eigen::VectorXd uh = Eigen::VectorXd::Constant(1, -0.3);
  RunRolloutBatch(model_, *env_, Span(x_), samples_, horizon_, 0, pool_, &batch_);
  const Selection a = SelectMinimalIntervention(batch_, Span(uh));
  for (double scale : {1e-6, 0.5, 3.0, 1e6}) {
    const Selection b = SelectMinimalIntervention(batch_, Span(uh), scale);
    EXPECT_EQ(b.index, a.index);
    EXPECT_DOUBLE_EQ(b.cost, a.cost * scale);
  }
}

TEST_F(ToyTest, TiesResolveToLowerIndex) {
  // Every sample safe; u_h midway between two grid points.
  auto always = std::make_shared<AlwaysSafeEnvironment>(env_);
  const SampleSet coarse = SampleSet::Grid(ControlSpace::BalanceBot(), {5});
  RunRolloutBatch(model_, *always, Span(x_), coarse, horizon_, 0, pool_, &batch_);
  const std::vector<double> uh = {0.25};
  EXPECT_EQ(SelectMinimalIntervention(batch_, uh).index, 2);
}

TEST(SelectionTest, FallbackPicksLongestSurvivors) {
  // Past the inflated band nothing is fully safe, but the push back toward
  // upright survives longest.
  const EnvSpec spec = EnvSpec::Defaults(EnvId::kBalanceBot);
  auto env = MakeEnvironment(spec, 1);
  GroundTruthPredictor model(env);
  const SampleSet samples = SampleSet::Grid(spec.control_space, {201});
  WorkerPool pool(1);
  RolloutBatch batch;
  const Eigen::Vector3d x(0.4, 2.5, 0.0);
  const Eigen::VectorXd uh = Eigen::VectorXd::Constant(1, -1.0);
  const SharedControlDecision d = MpmiStep(0, Span(x), Span(uh), model, *env, samples,
                                           HorizonConfig::Defaults(EnvId::kBalanceBot), pool,
                                           &batch);
  ASSERT_TRUE(d.fallback_used);
  EXPECT_EQ(d.n_safe, 0);
  EXPECT_EQ(d.percent_safe, 0.0);
  EXPECT_EQ(d.selected_index, BruteForceSelect(batch, samples, Span(d.u_h)));
  const auto& steps = batch.all_safe_steps();
  EXPECT_EQ(batch.safe_steps(d.selected_index), *std::max_element(steps.begin(), steps.end()));
  EXPECT_LT(*std::min_element(steps.begin(), steps.end()), batch.safe_steps(d.selected_index));
  EXPECT_EQ(d.deviation_to_closest_safe, DeviationToClosestSafe(batch, Span(d.u_h)));
}

TEST(SelectionTest, AlwaysSafeWithinHalfSpacing) {
  for (EnvId id : {EnvId::kBalanceBot, EnvId::kRaceCar}) {
    const EnvSpec spec = EnvSpec::Defaults(id);
    auto env = MakeEnvironment(spec, 3, /*always_safe=*/true);
    GroundTruthPredictor model(env);
    const SampleSet samples = SampleSet::Grid(
        spec.control_space, id == EnvId::kBalanceBot ? std::vector<int>{64}
                                                     : std::vector<int>{6, 5, 4});
    HorizonConfig horizon;
    horizon.steps = 2;
    WorkerPool pool(2);
    RolloutBatch batch;
    const double half = GridHalfSpacing(samples).worst_case;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0, 1);
    const Eigen::VectorXd x = env->InitialState(3);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd uh(spec.control_dim());
      for (int j = 0; j < uh.size(); ++j) {
        const Interval& iv = spec.control_space.intervals()[j];
        uh[j] = iv.low + (iv.high - iv.low) * dist(rng);
      }
      const SharedControlDecision d =
          MpmiStep(trial, Span(x), Span(uh), model, *env, samples, horizon, pool, &batch);
      EXPECT_EQ(d.n_safe, samples.size());
      EXPECT_LE(d.deviation, half + 1e-12);
      const NearestSample nearest = FindNearestSample(samples, Span(uh));
      EXPECT_DOUBLE_EQ(d.deviation, nearest.distance);
      EXPECT_TRUE(d.nearest_safe);
    }
  }
}

TEST(SelectionTest, DeviationToClosestSafeIsZeroOnSafeGridPoint) {
  auto env = std::make_shared<ToyEnvironment>(0.5);
  GroundTruthPredictor model(env);
  const SampleSet samples = SampleSet::Grid(ControlSpace::BalanceBot(), {5});
  HorizonConfig horizon;
  horizon.steps = 3;
  WorkerPool pool(1);
  const Eigen::Vector3d x(1, 0, 0);
  const RolloutBatch batch = RolloutBatchFor(model, *env, Span(x), samples, horizon, 0, pool);
  EXPECT_EQ(DeviationToClosestSafe(batch, std::vector<double>{1.0}), 0.0);
  EXPECT_DOUBLE_EQ(DeviationToClosestSafe(batch, std::vector<double>{0.0}), 0.5);
  EXPECT_DOUBLE_EQ(DeviationToClosestSafe(batch, std::vector<double>{-1.0}), 1.5);
}

TEST(OracleTest, PassesSafeInputThrough) {
  const EnvSpec spec = EnvSpec::Defaults(EnvId::kBalanceBot);
  auto env = MakeEnvironment(spec, 1);
  WorkerPool pool(1);
  const Eigen::Vector3d x(0, 0, 0);
  const std::vector<double> uh = {0.0};
  const OracleResult r = SmiOracle(Span(x), uh, env, {1001}, 30, pool);
  EXPECT_TRUE(r.any_safe);
  EXPECT_EQ(r.u_r[0], 0.0);
  EXPECT_GT(r.n_safe, 0);
}

TEST(OracleTest, ReportsNoSafeControlInsideBand) {
  const EnvSpec spec = EnvSpec::Defaults(EnvId::kBalanceBot);
  auto env = MakeEnvironment(spec, 1);
  WorkerPool pool(1);
  const Eigen::Vector3d x(0.5, 1.0, 0.0);
  const OracleResult r = SmiOracle(Span(x), std::vector<double>{0.0}, env, {1001}, 30, pool);
  EXPECT_FALSE(r.any_safe);
  EXPECT_EQ(r.n_safe, 0);
}

TEST(OracleTest, AgreesWithFilterOnTheSameGrid) {
  const EnvSpec spec = EnvSpec::Defaults(EnvId::kBalanceBot);
  auto env = MakeEnvironment(spec, 1);
  GroundTruthPredictor model(env);
  WorkerPool pool(1);
  const SampleSet samples = SampleSet::Grid(spec.control_space, {257});
  const HorizonConfig horizon = HorizonConfig::Defaults(EnvId::kBalanceBot);
  RolloutBatch batch;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::VectorXd x = env->RandomSafeState(seed);
    const std::vector<double> uh = {seed % 2 ? 1.0 : -1.0};
    const SharedControlDecision d =
        MpmiStep(0, Span(x), uh, model, *env, samples, horizon, pool, &batch);
    const OracleResult r = SmiOracle(Span(x), uh, env, {257}, horizon.steps, pool);
    EXPECT_EQ(r.index, d.selected_index);
    EXPECT_EQ(r.any_safe, !d.fallback_used);
  }
}

}  // namespace
}  // namespace mpmi
