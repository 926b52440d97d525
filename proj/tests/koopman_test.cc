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
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mpmi/dataset.h"
#include "mpmi/errors.h"
#include "mpmi/koopman.h"

namespace mpmi {
namespace {

namespace fs = std::filesystem;

struct LinearSystem {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  Eigen::Vector3d c;
};

LinearSystem StableSystem() {
  LinearSystem s;
  s.a << 0.95, 0.10, 0.00,
        -0.05, 0.90, 0.02,
         0.01, 0.00, 0.97;
  s.b << 0.0, 0.1, 0.05;
  s.c << 0.01, -0.02, 0.0;
  return s;
}

// Episodes of the exact map x' = A x + B u + c with random controls.
Dataset LinearDataset(const LinearSystem& s, int rows, std::uint64_t seed) {
  Dataset data(EnvId::kBalanceBot, 3, 1, 0.01);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::Vector3d x(dist(rng), dist(rng), dist(rng));
  for (int t = 0; t < rows; ++t) {
    if (t % 50 == 0) x = Eigen::Vector3d(dist(rng), dist(rng), dist(rng));
    const double u = dist(rng);
    const Eigen::Vector3d next = s.a * x + s.b * u + s.c;
    data.Append(std::span<const double>(x.data(), 3), std::span<const double>(&u, 1),
                std::span<const double>(next.data(), 3));
    x = next;
  }
  return data;
}

BasisSpec IdentitySpec() {
  BasisSpec spec;
  spec.state_dim = 3;
  spec.control_dim = 1;
  spec.scales = {1, 1, 1, 1};
  return spec;
}

TEST(KoopmanTest, RecoversLinearSystemExactly) {
  const LinearSystem s = StableSystem();
  const Dataset data = LinearDataset(s, 2000, 1);
  const KoopmanModel model = Fit(data, BasisDictionary(IdentitySpec()), 0.0);
  // Lifted order: x0 x1 x2 u 1.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(model.K()(i, j), s.a(i, j), 1e-8);
    EXPECT_NEAR(model.K()(i, 3), s.b[i], 1e-8);
    EXPECT_NEAR(model.K()(i, 4), s.c[i], 1e-8);
  }
  // Control and constant rows are held.
  EXPECT_EQ(model.K()(3, 3), 1.0);
  EXPECT_EQ(model.K()(4, 4), 1.0);
  EXPECT_EQ(model.K()(3, 0), 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(3), u(1);
    x << dist(rng), dist(rng), dist(rng);
    u << dist(rng);
    const Eigen::VectorXd expected = s.a * x + s.b * u[0] + s.c;
    const Eigen::VectorXd got = model.Predict(x, u);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], expected[i], 1e-8);
  }

  const EvaluationReport report = Evaluate(model, LinearDataset(s, 1000, 3), 30);
  EXPECT_EQ(report.k, 30);
  EXPECT_GT(report.windows, 0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT(report.one_step_rmse[i], 1e-8);
    EXPECT_LT(report.k_step_rmse[i], 1e-8);
  }
}

TEST(KoopmanTest, RepeatedFixedPointIsIllConditioned) {
  Dataset data(EnvId::kBalanceBot, 3, 1, 0.01);
  const double x[3] = {0.1, 0.2, 0.3};
  const double u = 0.0;
  for (int t = 0; t < 100; ++t) data.Append(x, std::span<const double>(&u, 1), x);
  EXPECT_THROW(Fit(data, BasisDictionary(IdentitySpec()), 0.0), IllConditionedError);
}

TEST(KoopmanTest, IdentityOperatorReturnsState) {
  const BasisDictionary basis(IdentitySpec());
  const KoopmanModel model(EnvId::kBalanceBot, basis, Eigen::MatrixXd::Identity(5, 5), 0.01);
  Eigen::VectorXd x(3), u(1);
  x << 0.3, -1.2, 4.0;
  u << 0.7;
  EXPECT_EQ(model.Predict(x, u), x);
  EXPECT_THROW(KoopmanModel(EnvId::kBalanceBot, basis, Eigen::MatrixXd::Identity(4, 4), 0.01),
               ConfigError);
}

TEST(KoopmanTest, EvaluateOnTrainingDataMatchesStats) {
  const Dataset data = CollectDataset(EnvSpec::Defaults(EnvId::kBalanceBot), {}, 3000, 2);
  const KoopmanModel model =
      Fit(data, BasisDictionary(BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kBalanceBot), 1)),
          1e-6);
  const EvaluationReport report = Evaluate(model, data, 5);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GE(report.one_step_rmse[i], 0.0);
    EXPECT_NEAR(report.one_step_rmse[i], model.training_stats().one_step_rmse[i],
                1e-12 + 1e-9 * report.one_step_rmse[i]);
  }
  EXPECT_EQ(model.training_stats().n_samples, 3000);
  EXPECT_THROW(Evaluate(model, Dataset(EnvId::kBalanceBot, 3, 1, 0.01), 5), ConfigError);
  EXPECT_THROW(Evaluate(model, data, 0), ConfigError);
}

TEST(SparsifyTest, ZeroThresholdIsNoOp) {
  const Dataset data = CollectDataset(EnvSpec::Defaults(EnvId::kBalanceBot), {}, 3000, 2);
  const BasisDictionary basis(BasisSpec::Defaults(EnvSpec::Defaults(EnvId::kBalanceBot), 1));
  const KoopmanModel model = Fit(data.Slice(0, 2000), basis, 1e-6);
  SparsityOptions options;
  options.thresholds = {0.0};
  const KoopmanModel same = Sparsify(model, data.Slice(0, 2000), data.Slice(2000, 3000), options);
  EXPECT_EQ(same.lifted_dim(), model.lifted_dim());
  EXPECT_EQ(same.K(), model.K());
}

TEST(SparsifyTest, PrunesEveryRandomFeatureOfALinearSystem) {
  const LinearSystem s = StableSystem();
  BasisSpec spec = IdentitySpec();
  spec.n_monomial = 10;
  spec.n_sinusoid = 10;
  spec.seed = 4;
  const BasisDictionary basis(spec);
  const Dataset train = LinearDataset(s, 3000, 5);
  const Dataset heldout = LinearDataset(s, 1000, 6);
  // A small ridge: with four variables some random monomials repeat.
  const KoopmanModel full = Fit(train, basis, 1e-9);
  const EvaluationReport before = Evaluate(full, heldout, 1);
  SparsityOptions options;
  options.thresholds = {1e-3};
  options.ridge = 1e-9;
  const KoopmanModel sparse = Sparsify(full, train, heldout, options);
  EXPECT_EQ(sparse.lifted_dim(), basis.exempt_count());
  const EvaluationReport after = Evaluate(sparse, heldout, 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LE(after.one_step_rmse[i], std::max(before.one_step_rmse[i], 1e-8));
  }
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpmi_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

using ModelFileTest = TempDir;

TEST_F(ModelFileTest, SaveLoadRoundTripIsBitExact) {
  const EnvSpec env = EnvSpec::Defaults(EnvId::kRaceCar);
  const Dataset data = CollectDataset(env, {}, 4000, 3);
  const KoopmanModel full = Fit(data.Slice(0, 3000), BasisDictionary(BasisSpec::Defaults(env, 2)), 1e-6);
  const KoopmanModel model = Sparsify(full, data.Slice(0, 3000), data.Slice(3000, 4000), {});
  const fs::path path = dir_ / "model.txt";
  SaveModel(model, path);
  const KoopmanModel loaded = LoadModel(path);
  EXPECT_EQ(loaded.env(), EnvId::kRaceCar);
  EXPECT_EQ(loaded.dt(), model.dt());
  EXPECT_EQ(loaded.K(), model.K());
  EXPECT_EQ(loaded.basis().active_mask(), model.basis().active_mask());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(6), u(3);
    for (int i = 0; i < 6; ++i) x[i] = 10 * dist(rng);
    u << dist(rng), std::abs(dist(rng)), -std::abs(dist(rng));
    EXPECT_EQ(loaded.Predict(x, u), model.Predict(x, u));
  }
  // Saving the loaded model reproduces the file byte for byte.
  SaveModel(loaded, dir_ / "again.txt");
  std::ifstream a(path), b(dir_ / "again.txt");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(ModelFileTest, CorruptFilesNameTheLine) {
  const Dataset data = LinearDataset(StableSystem(), 500, 1);
  SaveModel(Fit(data, BasisDictionary(IdentitySpec()), 0.0), dir_ / "m.txt");
  std::ifstream in(dir_ / "m.txt");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_GT(lines.size(), 3u);
  // Garble the last K row.
  lines.back() = "1,2,oops";
  std::ofstream out(dir_ / "bad.txt");
  for (const auto& l : lines) out << l << "\n";
  out.close();
  try {
    LoadModel(dir_ / "bad.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), static_cast<long>(lines.size()));
  }
  std::ofstream(dir_ / "empty.txt") << "";
  EXPECT_THROW(LoadModel(dir_ / "empty.txt"), ParseError);
}

using DatasetFileTest = TempDir;

TEST_F(DatasetFileTest, RoundTripAndHeaderErrors) {
  Dataset data = CollectDataset(EnvSpec::Defaults(EnvId::kRaceCar), {}, 300, 9);
  data.config_hash = "0123456789abcdef";
  WriteDataset(data, dir_ / "d.csv");
  const Dataset back = ReadDataset(dir_ / "d.csv");
  EXPECT_EQ(back.env(), EnvId::kRaceCar);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.config_hash, data.config_hash);
  EXPECT_EQ(back.dt(), data.dt());
  EXPECT_EQ(back.raw(), data.raw());

  std::ofstream(dir_ / "bad_header.csv") << "# something else\n1,2,3\n";
  try {
    ReadDataset(dir_ / "bad_header.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  std::ifstream in(dir_ / "d.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::ofstream(dir_ / "short_row.csv") << header << "\n" << row << "\n1,2\n";
  try {
    ReadDataset(dir_ / "short_row.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(ReadDataset(dir_ / "missing.csv"), std::runtime_error);
}

// Regression fixtures for the default pipeline: 50k excitation steps
// (seed 1), last 20% held out, basis seed 1.
struct PipelineFixture {
  EnvId env;
  int full_count;
  int retained;
  std::vector<double> one_step;
  std::vector<double> k_step;
};

const PipelineFixture kPipelineFixtures[] = {
    {EnvId::kBalanceBot, 55, 37,
     {0.00016578359777532823, 0.032673602508521291, 0.016926334823812495},
     {0.050354571537016994, 0.28263066994687081, 0.10298997723032638}},
    {EnvId::kRaceCar, 160, 33,
     {0.00027373769099831377, 0.00033393915327511331, 0.0084674314077521594,
      0.032551491623123534, 0.039604711396136055, 0.50698944488945352},
     {0.14220201138309999, 0.1436870740277896, 0.21624814645805185, 0.52709905088487941,
      0.49464760522017909, 0.80918957498771904}},
};

TEST(KoopmanRegressionTest, DefaultPipelineFixtures) {
  for (const PipelineFixture& f : kPipelineFixtures) {
    const EnvSpec env = EnvSpec::Defaults(f.env);
    const Dataset data = CollectDataset(env, {}, 50000, 1);
    const Dataset train = data.Slice(0, 40000), heldout = data.Slice(40000, 50000);
    const KoopmanModel full = Fit(train, BasisDictionary(BasisSpec::Defaults(env, 1)), 1e-6);
    const KoopmanModel sparse = Sparsify(full, train, heldout, {});
    const EvaluationReport report = Evaluate(sparse, heldout, 30);
    EXPECT_EQ(full.lifted_dim(), f.full_count);
    EXPECT_EQ(sparse.lifted_dim(), f.retained) << ToString(f.env);
    for (int i = 0; i < env.state_dim(); ++i) {
      EXPECT_NEAR(report.one_step_rmse[i], f.one_step[i], 1e-6 * f.one_step[i]) << i;
      EXPECT_NEAR(report.k_step_rmse[i], f.k_step[i], 1e-6 * f.k_step[i]) << i;
    }
  }
}

}  // namespace
}  // namespace mpmi
