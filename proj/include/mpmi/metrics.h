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

#ifndef MPMI_METRICS_H_
#define MPMI_METRICS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "mpmi/env_spec.h"
#include "mpmi/session.h"

namespace mpmi {

struct SummaryOptions {
  // Count survivors at the trial cap in the mean time to failure. When
  // false only failed trials enter the mean (NaN if none failed).
  bool count_survivors_at_cap = true;
};

// Aggregates for one (environment, mode) group. Deviation and %-safe are
// per-trial means over ticks, then mean and sample standard deviation
// across trials (0 for a single trial).
struct MetricSummary {
  EnvId env = EnvId::kBalanceBot;
  Mode mode = Mode::kMpmi;
  int n_trials = 0;
  double success_rate = 0.0;
  double mean_time_to_failure = 0.0;
  double mean_deviation = 0.0;
  double std_deviation = 0.0;
  double mean_percent_safe = 0.0;
  double std_percent_safe = 0.0;
  bool count_survivors_at_cap = true;

  bool operator==(const MetricSummary&) const = default;
};

// Mean over ticks of deviation_to_closest_safe and percent_safe. Trials
// without ticks contribute 0 to both.
double MeanDeviation(const TrialRecord& trial);
double MeanPercentSafe(const TrialRecord& trial);

// One group. Throws ConfigError when empty, when environments or modes are
// mixed, or when a trial was aborted.
MetricSummary SummarizeGroup(const std::vector<const TrialRecord*>& trials,
                             const SummaryOptions& options = {});

// One summary per (environment, mode), ordered by environment then mode
// (user_only first). Independent of trial order.
std::vector<MetricSummary> Summarize(const std::vector<TrialRecord>& trials,
                                     const SummaryOptions& options = {});

// Provenance written into every exported artifact.
struct RunInfo {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
};

// Trial log: newline-delimited JSON. A header object, then per trial one
// "trial" object followed by one flat numeric array per tick in the header's
// column order.
void WriteTrialLog(const std::vector<TrialRecord>& trials, const RunInfo& info,
                   const std::filesystem::path& path);
std::vector<TrialRecord> ReadTrialLog(const std::filesystem::path& path, RunInfo* info = nullptr);

// Column names of the tick arrays for an environment.
std::vector<std::string> TickColumns(const EnvSpec& spec);

// Aligned plain-text table in the layout of the per-condition results
// table, plus success and time columns.
std::string FormatSummaryTable(const std::vector<MetricSummary>& summaries, const RunInfo& info);
std::string SummaryJson(const std::vector<MetricSummary>& summaries, const RunInfo& info);
std::vector<MetricSummary> ParseSummaryJson(const std::string& text);

// Writes trials.jsonl, summary.txt and summary.json into `dir` and returns
// the summaries. Throws ConfigError for an empty trial list and
// std::runtime_error when the directory cannot be written.
std::vector<MetricSummary> Export(const std::vector<TrialRecord>& trials, const RunInfo& info,
                                  const SummaryOptions& options, const std::filesystem::path& dir);

}  // namespace mpmi

#endif  // MPMI_METRICS_H_
