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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mpmi/config.h"
#include "mpmi/metrics.h"

namespace mpmi {
namespace {

// Runs the harness with `args` and returns its exit status.
int Cli(const std::string& args, const std::filesystem::path& stdout_path = "/dev/null") {
  const std::string command = std::string(MPMI_CLI_PATH) + " " + args + " > '" +
                              stdout_path.string() + "' 2>/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           (std::string("mpmi_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string Out() const { return "--out '" + dir_.string() + "'"; }
  std::filesystem::path dir_;
};

constexpr char kSmallRun[] =
    "--set env.id=balance_bot --set session.trials=1 --set env.max_trial_time=0.3 "
    "--set sampling.per_dim_counts=[16] --set session.workers=1";

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Cli("--help"), 0);
  EXPECT_EQ(Cli(""), 2);
  EXPECT_EQ(Cli("fly"), 2);
  EXPECT_EQ(Cli("run --config /nonexistent/config.json"), 2);
  EXPECT_EQ(Cli(std::string("run ") + kSmallRun + " --set horizon.stepz=3 " + Out()), 2);
  EXPECT_EQ(Cli("defaults --env unicycle"), 2);
  // No trained model: a runtime error, not a validation error.
  EXPECT_EQ(Cli(std::string("run ") + kSmallRun + " " + Out()), 3);
}

TEST_F(CliTest, DefaultsRoundTrip) {
  const std::filesystem::path path = dir_ / "defaults.json";
  ASSERT_EQ(Cli("defaults --env race_car", path), 0);
  ASSERT_EQ(Cli("run --config '" + path.string() + "' --set env.id=race_car " +
                    "--set model.ground_truth=true --set session.trials=1 "
                    "--set env.max_trial_time=0.1 --set sampling.per_dim_counts=[3,2,2] " + Out()),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "summary.json"));
}

TEST_F(CliTest, CollectTrainRun) {
  const std::string common = std::string(kSmallRun) + " --set model.collect_steps=4000 " + Out();
  ASSERT_EQ(Cli("collect " + common), 0);
  ASSERT_TRUE(std::filesystem::exists(dir_ / "dataset.csv"));
  ASSERT_EQ(Cli("train " + common), 0);
  ASSERT_TRUE(std::filesystem::exists(dir_ / "model.txt"));
  ASSERT_EQ(Cli("run " + common), 0);
  RunInfo info;
  const auto trials = ReadTrialLog(dir_ / "trials.jsonl", &info);
  EXPECT_EQ(trials.size(), 2u);
  EXPECT_EQ(info.seeds, std::vector<std::uint64_t>{1});
  // A model trained for one environment is refused by the other.
  EXPECT_EQ(Cli("run --set env.id=race_car --set session.trials=1 " + Out()), 2);
}

}  // namespace
}  // namespace mpmi
