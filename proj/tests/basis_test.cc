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
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mpmi/basis.h"
#include "mpmi/errors.h"

namespace mpmi {
namespace {

BasisSpec IdentitySpec() {
  BasisSpec spec;
  spec.state_dim = 3;
  spec.control_dim = 1;
  spec.scales = {1, 1, 1, 1};
  return spec;
}

// Direct evaluation of one function from its description.
double Reference(const BasisFunction& f, const std::vector<double>& v,
                 const std::vector<double>& scales) {
  auto w = [&](int i) { return v[i] / scales[i]; };
  switch (f.kind) {
    case BasisKind::kState:
    case BasisKind::kControl:
      return v[f.vars[0]];
    case BasisKind::kConstant:
      return 1.0;
    case BasisKind::kMonomial: {
      double p = 1.0;
      for (int i = 0; i < 3; ++i) {
        if (f.vars[i] >= 0) p *= w(f.vars[i]);
      }
      return p;
    }
    case BasisKind::kSinusoid: {
      double p = std::sin(f.frequency * v[f.vars[0]] + f.phase);
      for (int i = 1; i < 3; ++i) {
        if (f.vars[i] >= 0) p *= w(f.vars[i]);
      }
      return p;
    }
  }
  return NAN;
}

TEST(SinCosTest, MatchesStandardLibrary) {
  std::mt19937_64 rng(1);
  for (double scale : {1e-8, 1.0, 10.0, 1e3, 1e5}) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (int i = 0; i < 20000; ++i) {
      const double x = dist(rng);
      double s, c;
      SinCos(x, &s, &c);
      EXPECT_NEAR(s, std::sin(x), 2e-15 * std::max(1.0, std::abs(x) * 1e-3)) << x;
      EXPECT_NEAR(c, std::cos(x), 2e-15 * std::max(1.0, std::abs(x) * 1e-3)) << x;
    }
  }
  double s, c;
  SinCos(0.0, &s, &c);
  EXPECT_EQ(s, 0.0);
  EXPECT_EQ(c, 1.0);
  SinCos(1e9, &s, &c);
  EXPECT_EQ(s, std::sin(1e9));
  SinCos(NAN, &s, &c);
  EXPECT_TRUE(std::isnan(s));
  EXPECT_TRUE(std::isnan(c));
}

TEST(BasisTest, IdentityOnlyLift) {
  const BasisDictionary basis(IdentitySpec());
  ASSERT_EQ(basis.size(), 5);
  Eigen::VectorXd x(3), u(1);
  x << 1, 2, 3;
  u << 0.5;
  const Eigen::VectorXd z = basis.Lift(x, u);
  ASSERT_EQ(z.size(), 5);
  EXPECT_EQ(z[0], 1.0);
  EXPECT_EQ(z[1], 2.0);
  EXPECT_EQ(z[2], 3.0);
  EXPECT_EQ(z[3], 0.5);
  EXPECT_EQ(z[4], 1.0);
}

TEST(BasisTest, ZeroInputGivesFeatureValuesAtOrigin) {
  const BasisSpec spec = BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kBalanceBot), 7);
  const BasisDictionary basis(spec);
  const Eigen::VectorXd z = basis.Lift(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1));
  for (int i = 0; i < 4; ++i) EXPECT_EQ(z[i], 0.0);
  EXPECT_EQ(z[4], 1.0);
  const std::vector<double> zero(4, 0.0);
  for (int j = 5; j < basis.size(); ++j) {
    EXPECT_NEAR(z[j], Reference(basis.functions()[j], zero, spec.scales), 1e-15);
  }
}

TEST(BasisTest, SeededFeaturesMatchDirectEvaluation) {
  for (EnvId id : {EnvId::kBalanceBot, EnvId::kRaceCar}) {
    const EnvSpec env = EnvSpec::Defaults(id);
    const BasisSpec spec = BasisSpec::Defaults(env, 3);
    const BasisDictionary basis(spec);
    EXPECT_EQ(basis.size(), basis.exempt_count() + spec.n_monomial + spec.n_sinusoid);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd x(env.state_dim()), u(env.control_dim());
      std::vector<double> v;
      for (int i = 0; i < x.size(); ++i) v.push_back(x[i] = spec.scales[i] * dist(rng));
      for (int i = 0; i < u.size(); ++i) v.push_back(u[i] = dist(rng));
      const Eigen::VectorXd z = basis.Lift(x, u);
      for (int j = 0; j < basis.size(); ++j) {
        EXPECT_NEAR(z[j], Reference(basis.functions()[j], v, spec.scales), 1e-12)
            << basis.functions()[j].Describe();
      }
    }
  }
}

TEST(BasisTest, SinusoidsUseAngleVariables) {
  const BasisSpec spec = BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kRaceCar), 1);
  const BasisDictionary basis(spec);
  int sinusoids = 0;
  for (const BasisFunction& f : basis.functions()) {
    if (f.kind != BasisKind::kSinusoid) continue;
    ++sinusoids;
    EXPECT_EQ(f.vars[0], 2);
    EXPECT_TRUE(f.frequency == 1.0 || f.frequency == 2.0);
    EXPECT_TRUE(f.phase == 0.0 || f.phase == std::numbers::pi / 2);
  }
  EXPECT_EQ(sinusoids, spec.n_sinusoid);
}

TEST(BasisTest, SeedReproducesDictionary) {
  const BasisSpec spec = BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kRaceCar), 9);
  const BasisDictionary a(spec), b(spec);
  for (int j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a.functions()[j].Describe(), b.functions()[j].Describe());
  }
  const BasisDictionary c(BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kRaceCar), 10));
  int differing = 0;
  for (int j = 0; j < a.size(); ++j) {
    differing += a.functions()[j].Describe() != c.functions()[j].Describe();
  }
  EXPECT_GT(differing, 0);
}

TEST(BasisTest, MaskSelectsActiveEntries) {
  BasisDictionary basis(BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kBalanceBot), 2));
  std::vector<bool> mask(basis.size(), true);
  mask[7] = false;
  mask[20] = false;
  basis.set_active_mask(mask);
  EXPECT_EQ(basis.active_count(), basis.size() - 2);
  Eigen::VectorXd x(3), u(1);
  x << 0.1, -0.4, 0.7;
  u << 0.3;
  std::vector<double> all(basis.size());
  basis.LiftAll(x.data(), u.data(), all.data());
  const Eigen::VectorXd z = basis.Lift(x, u);
  for (int c = 0; c < basis.active_count(); ++c) {
    EXPECT_EQ(z[c], all[basis.active_indices()[c]]);
  }
  mask[1] = false;
  EXPECT_THROW(basis.set_active_mask(mask), ConfigError);
}

TEST(BasisTest, BlockLiftEqualsScalarLift) {
  BasisDictionary basis(BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kRaceCar), 5));
  std::vector<bool> mask(basis.size(), true);
  for (int j = basis.exempt_count(); j < basis.size(); j += 3) mask[j] = false;
  basis.set_active_mask(mask);
  const int n = 6, m = 3, d = basis.active_count();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dist(-5, 5);
  std::vector<double> x(n * kLanes), u(m * kLanes), block(d * kLanes);
  for (double& v : x) v = dist(rng);
  for (double& v : u) v = dist(rng) / 5;
  basis.LiftBlock(x.data(), u.data(), block.data());
  for (int l = 0; l < kLanes; ++l) {
    std::vector<double> xl(n), ul(m), z(d);
    for (int i = 0; i < n; ++i) xl[i] = x[i * kLanes + l];
    for (int j = 0; j < m; ++j) ul[j] = u[j * kLanes + l];
    basis.Lift(xl.data(), ul.data(), z.data());
    for (int c = 0; c < d; ++c) EXPECT_EQ(block[c * kLanes + l], z[c]);
  }
}

TEST(BasisTest, CheckedLiftRejectsBadInput) {
  const BasisDictionary basis(IdentitySpec());
  Eigen::VectorXd x(3), u(1);
  x << 1, NAN, 3;
  u << 0;
  EXPECT_THROW(basis.Lift(x, u), DomainError);
  EXPECT_THROW(basis.Lift(Eigen::VectorXd::Zero(2), u), DomainError);
}

}  // namespace
}  // namespace mpmi
