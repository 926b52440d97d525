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

#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mpmi/config.h"
#include "mpmi/errors.h"

namespace mpmi {
namespace {

constexpr char kBalanceBot[] = R"({"env": {"id": "balance_bot"}})";
constexpr char kRaceCar[] = R"({"env": {"id": "race_car"}})";

void ExpectConfigError(const std::string& text, const std::string& needle,
                       const std::vector<std::string>& overrides = {}) {
  try {
    ParseConfig(text, overrides);
    FAIL() << "no error for " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, DefaultsPerEnvironment) {
  const RunConfig bb = ParseConfig(kBalanceBot);
  EXPECT_EQ(bb.env.id, EnvId::kBalanceBot);
  EXPECT_EQ(bb.env.dt, 0.01);
  EXPECT_EQ(bb.per_dim_counts, std::vector<int>{1024});
  EXPECT_EQ(bb.horizon.steps, 30);
  EXPECT_FALSE(bb.horizon.noisy());
  EXPECT_EQ(bb.model.basis.n_monomial + bb.model.basis.n_sinusoid, 50);
  EXPECT_EQ(bb.session.modes, (std::vector<Mode>{Mode::kUserOnly, Mode::kMpmi}));
  EXPECT_EQ(bb.bench.per_dim_counts, std::vector<int>{2048});

  const RunConfig rc = ParseConfig(kRaceCar);
  EXPECT_EQ(rc.env.id, EnvId::kRaceCar);
  EXPECT_EQ(rc.horizon.steps, 25);
  EXPECT_EQ(rc.per_dim_counts.size(), 3u);
  EXPECT_EQ(rc.model.basis.n_monomial + rc.model.basis.n_sinusoid, 150);
}

TEST(ConfigTest, DefaultJsonParsesToDefaults) {
  for (EnvId id : {EnvId::kBalanceBot, EnvId::kRaceCar}) {
    const RunConfig a = ParseConfig(DefaultConfigJson(id));
    const RunConfig b = ParseConfig(id == EnvId::kBalanceBot ? kBalanceBot : kRaceCar);
    EXPECT_EQ(a.canonical, b.canonical);
    EXPECT_EQ(a.hash, b.hash);
  }
}

TEST(ConfigTest, RejectsUnknownKeysAndWrongTypes) {
  ExpectConfigError(R"({"env": {"id": "balance_bot"}, "horizn": {}})", "horizn");
  ExpectConfigError(R"({"env": {"id": "balance_bot", "physics": {"mass": 1}}})", "mass");
  ExpectConfigError(R"({"env": {"id": "balance_bot"}, "horizon": {"steps": "30"}})",
                    "horizon.steps");
  ExpectConfigError(R"({"env": {"id": "unicycle"}})", "unicycle");
  ExpectConfigError(R"({"env": {}})", "env.id");
  ExpectConfigError("[1, 2]", "object");
  ExpectConfigError("{", "JSON");
}

TEST(ConfigTest, RejectsInvalidValues) {
  ExpectConfigError(kBalanceBot, "per_dim_counts", {"sampling.per_dim_counts=[1]"});
  ExpectConfigError(kRaceCar, "per_dim_counts", {"sampling.per_dim_counts=[4, 4]"});
  ExpectConfigError(kBalanceBot, "dt", {"env.dt=0"});
  ExpectConfigError(kBalanceBot, "inflation", {"env.inflation_radius=0.7"});
  ExpectConfigError(kBalanceBot, "session.trials", {"session.trials=0"});
  ExpectConfigError(kBalanceBot, "heldout_fraction", {"model.heldout_fraction=1"});
  ExpectConfigError(kBalanceBot, "sparsity_thresholds",
                    {"model.sparsity_thresholds=[0.1, 0.01]"});
  ExpectConfigError(kBalanceBot, "", {"horizon.noise_sigma=[0.1]"});
  ExpectConfigError(kBalanceBot, "", {"session.modes=[\"autopilot\"]"});
}

TEST(ConfigTest, OverridesApplyBeforeDefaults) {
  const RunConfig c = ParseConfig(
      kBalanceBot, {"sampling.per_dim_counts=[64]", "session.output_dir=results/run 1",
                    "horizon.noise_sigma=[0.01, 0.02, 0.0]", "session.modes=[\"mpmi\"]"});
  EXPECT_EQ(c.per_dim_counts, std::vector<int>{64});
  EXPECT_EQ(c.session.output_dir, "results/run 1");
  EXPECT_EQ(c.horizon.noise_sigma, (std::vector<double>{0.01, 0.02, 0.0}));
  EXPECT_EQ(c.session.modes, std::vector<Mode>{Mode::kMpmi});
  // Overrides can select the environment on an empty document.
  EXPECT_EQ(ParseConfig("{}", {"env.id=race_car"}).env.id, EnvId::kRaceCar);
  ExpectConfigError(kBalanceBot, "not key=value", {"session.trials"});
  ExpectConfigError(kBalanceBot, "malformed", {"session..trials=3"});
  ExpectConfigError(kBalanceBot, "crosses", {"env.id.name=3"});
}

TEST(ConfigTest, HashTracksResolvedContent) {
  const RunConfig a = ParseConfig(kBalanceBot);
  const RunConfig b = ParseConfig(R"({"horizon": {"steps": 30}, "env": {"id": "balance_bot"}})");
  const RunConfig c = ParseConfig(kBalanceBot, {"horizon.steps=31"});
  EXPECT_EQ(a.hash.size(), 16u);
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(ParseConfig(a.canonical).hash, a.hash);
}

TEST(ConfigTest, Fnv1aKnownVectors) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(ConfigTest, TrialSeedsArePaired) {
  const RunConfig c = ParseConfig(kBalanceBot, {"session.seed=7", "session.trials=3"});
  EXPECT_EQ(c.TrialSeeds(), (std::vector<std::uint64_t>{7, 8, 9}));
}

TEST(ConfigTest, GridCountsFor) {
  EXPECT_EQ(GridCountsFor(EnvId::kBalanceBot, 2048), std::vector<int>{2048});
  EXPECT_EQ(GridCountsFor(EnvId::kRaceCar, 1000), (std::vector<int>{10, 10, 10}));
  EXPECT_EQ(GridCountsFor(EnvId::kRaceCar, 8), (std::vector<int>{2, 2, 2}));
  for (int n : {9, 100, 1280, 2048, 4096, 10000}) {
    const std::vector<int> g = GridCountsFor(EnvId::kRaceCar, n);
    ASSERT_EQ(g.size(), 3u);
    const long product = static_cast<long>(g[0]) * g[1] * g[2];
    EXPECT_GE(product, n);
    EXPECT_LT(product, 1.2 * n + 8) << n;
    EXPECT_GE(g[0], g[1]);
    EXPECT_GE(g[1], g[2]);
  }
  EXPECT_THROW(GridCountsFor(EnvId::kRaceCar, 1), ConfigError);
}

TEST(ConfigTest, ShippedConfigsParse) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(MPMI_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(LoadConfig(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 4);
}

}  // namespace
}  // namespace mpmi
