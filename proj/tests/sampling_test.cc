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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mpmi/errors.h"
#include "mpmi/sampling.h"

namespace mpmi {
namespace {

TEST(ControlSpaceTest, EnvironmentBoxes) {
  const ControlSpace bb = ControlSpace::BalanceBot();
  ASSERT_EQ(bb.dims(), 1);
  EXPECT_EQ(bb.intervals()[0].low, -1.0);
  EXPECT_EQ(bb.intervals()[0].high, 1.0);
  EXPECT_EQ(bb.measure(), 2.0);

  const ControlSpace rc = ControlSpace::RaceCar();
  ASSERT_EQ(rc.dims(), 3);
  EXPECT_EQ(rc.intervals()[0].low, -1.0);
  EXPECT_EQ(rc.intervals()[0].high, 1.0);
  EXPECT_EQ(rc.intervals()[1].low, 0.0);
  EXPECT_EQ(rc.intervals()[1].high, 1.0);
  EXPECT_EQ(rc.intervals()[2].low, -1.0);
  EXPECT_EQ(rc.intervals()[2].high, 0.0);
  // Product of the widths 2 * 1 * 1.
  EXPECT_EQ(rc.measure(), 2.0);
}

TEST(ControlSpaceTest, RejectsDegenerateIntervals) {
  EXPECT_THROW(ControlSpace({{1.0, 1.0}}), ConfigError);
  EXPECT_THROW(ControlSpace({{0.0, std::numeric_limits<double>::infinity()}}), ConfigError);
  EXPECT_THROW(ControlSpace(std::vector<Interval>{}), ConfigError);
}

TEST(ControlSpaceTest, ClampFlagsMovedComponents) {
  const ControlSpace rc = ControlSpace::RaceCar();
  bool clamped = false;
  const std::vector<double> inside = {0.2, 0.5, -0.5};
  Eigen::VectorXd out = rc.Clamp(inside, &clamped);
  EXPECT_FALSE(clamped);
  EXPECT_EQ(out[0], 0.2);
  const std::vector<double> outside = {-3.0, 0.5, 0.5};
  out = rc.Clamp(outside, &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_EQ(out[0], -1.0);
  EXPECT_EQ(out[2], 0.0);
  EXPECT_TRUE(rc.Contains(std::vector<double>{out[0], out[1], out[2]}));
}

TEST(SampleSetTest, OneDimensionalFive) {
  const SampleSet s = SampleSet::Grid(ControlSpace::BalanceBot(), {5});
  ASSERT_EQ(s.size(), 5);
  const double expected[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(s.sample(i)[0], expected[i]);
}

TEST(SampleSetTest, UnitSquareCorners) {
  const SampleSet s = SampleSet::Grid(ControlSpace({{0.0, 1.0}, {0.0, 1.0}}), {2, 2});
  ASSERT_EQ(s.size(), 4);
  // Last dimension varies fastest.
  const double expected[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(s.sample(i)[0], expected[i][0]);
    EXPECT_EQ(s.sample(i)[1], expected[i][1]);
  }
}

TEST(SampleSetTest, RaceCarTenThousand) {
  const SampleSet s = SampleSet::Grid(ControlSpace::RaceCar(), {23, 22, 20});
  EXPECT_EQ(s.size(), 10120);
  // Endpoints exact on every axis.
  for (int d = 0; d < 3; ++d) {
    EXPECT_EQ(s.coordinate(d, 0), s.space().intervals()[d].low);
    EXPECT_EQ(s.coordinate(d, s.per_dim_counts()[d] - 1), s.space().intervals()[d].high);
  }
  const int idx[3] = {4, 7, 19};
  const int flat = s.FlatIndex(idx);
  EXPECT_EQ(flat, (4 * 22 + 7) * 20 + 19);
  EXPECT_EQ(s.sample(flat)[0], s.coordinate(0, 4));
  EXPECT_EQ(s.sample(flat)[1], s.coordinate(1, 7));
  EXPECT_EQ(s.sample(flat)[2], s.coordinate(2, 19));
}

TEST(SampleSetTest, InvariantsHoldForRandomGrids) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 3);
    std::vector<Interval> box;
    std::vector<int> counts;
    for (int d = 0; d < m; ++d) {
      const double lo = std::uniform_real_distribution<double>(-3, 1)(rng);
      box.push_back({lo, lo + std::uniform_real_distribution<double>(0.1, 4)(rng)});
      counts.push_back(2 + static_cast<int>(rng() % 9));
    }
    const SampleSet s = SampleSet::Grid(ControlSpace(box), counts);
    int n = 1;
    for (int c : counts) n *= c;
    ASSERT_EQ(s.size(), n);
    for (int i = 0; i < s.size(); ++i) {
      EXPECT_TRUE(s.space().Contains(s.sample(i)));
    }
    // Equal spacing along each axis.
    for (int d = 0; d < m; ++d) {
      const double step = (box[d].high - box[d].low) / (counts[d] - 1);
      for (int k = 1; k < counts[d]; ++k) {
        EXPECT_NEAR(s.coordinate(d, k) - s.coordinate(d, k - 1), step, 1e-12);
      }
    }
  }
}

TEST(SampleSetTest, RejectsBadCounts) {
  EXPECT_THROW(SampleSet::Grid(ControlSpace::BalanceBot(), {1}), ConfigError);
  EXPECT_THROW(SampleSet::Grid(ControlSpace::BalanceBot(), {3, 3}), ConfigError);
  EXPECT_THROW(SampleSet::Grid(ControlSpace::RaceCar(), {3, 3}), ConfigError);
}

TEST(DeviationBoundTest, ReferenceValues) {
  EXPECT_NEAR(DeviationBound(2.0, 10000), 1e-4, 1e-12);
  EXPECT_NEAR(DeviationBound(4.0, 10120), 1.97628458498e-4, 1e-12);
  EXPECT_NEAR(DeviationBound(ControlSpace::BalanceBot(), 10000), 1e-4, 1e-12);
  EXPECT_NEAR(DeviationBound(ControlSpace::RaceCar(), 10120), 2.0 / 20240.0, 1e-15);
  EXPECT_EQ(DeviationBound(2.0, 1), 1.0);
  EXPECT_THROW(DeviationBound(2.0, 0), ConfigError);
}

TEST(HalfSpacingTest, ReferenceValues) {
  const HalfSpacing five = GridHalfSpacing(SampleSet::Grid(ControlSpace::BalanceBot(), {5}));
  EXPECT_DOUBLE_EQ(five.per_dim[0], 0.25);
  EXPECT_DOUBLE_EQ(five.worst_case, 0.25);
  const HalfSpacing fine = GridHalfSpacing(SampleSet::Grid(ControlSpace::BalanceBot(), {10000}));
  EXPECT_NEAR(fine.worst_case, 1.0 / 9999.0, 1e-15);
  const HalfSpacing square =
      GridHalfSpacing(SampleSet::Grid(ControlSpace({{0.0, 1.0}, {0.0, 1.0}}), {2, 2}));
  EXPECT_NEAR(square.worst_case, std::sqrt(0.5), 1e-15);
}

TEST(NearestSampleTest, GridPointAndTie) {
  const SampleSet s = SampleSet::Grid(ControlSpace::BalanceBot(), {5});
  NearestSample n = FindNearestSample(s, std::vector<double>{0.5});
  EXPECT_EQ(n.index, 3);
  EXPECT_EQ(n.distance, 0.0);
  EXPECT_FALSE(n.clamped);
  // Midpoint between -0.5 and 0: the lower index wins.
  n = FindNearestSample(s, std::vector<double>{-0.25});
  EXPECT_EQ(n.index, 1);
  EXPECT_DOUBLE_EQ(n.distance, 0.25);
  n = FindNearestSample(s, std::vector<double>{7.0});
  EXPECT_EQ(n.index, 4);
  EXPECT_TRUE(n.clamped);
}

TEST(NearestSampleTest, MatchesExhaustiveScan) {
  const SampleSet s = SampleSet::Grid(ControlSpace::RaceCar(), {7, 5, 4});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> wide(-1.5, 1.5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::vector<double> u = {wide(rng), wide(rng), wide(rng)};
    const Eigen::VectorXd c = s.space().Clamp(u);
    int best = -1;
    double best_d = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      double d2 = 0.0;
      for (int k = 0; k < 3; ++k) d2 += (s.sample(i)[k] - c[k]) * (s.sample(i)[k] - c[k]);
      if (best < 0 || d2 < best_d) {
        best = i;
        best_d = d2;
      }
    }
    const NearestSample n = FindNearestSample(s, u);
    EXPECT_EQ(n.index, best);
    EXPECT_NEAR(n.distance, std::sqrt(best_d), 1e-12);
  }
}

}  // namespace
}  // namespace mpmi
