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

#ifndef MPMI_BENCH_H_
#define MPMI_BENCH_H_

#include <string>
#include <vector>

#include "mpmi/config.h"
#include "mpmi/koopman.h"

namespace mpmi {

// Closed-loop tick rate: trials paced at 1/dt with the configured scripted
// user, restarted with the next seed whenever one ends, until `duration`
// seconds have passed.
struct TickRateResult {
  int workers = 0;
  int n_samples = 0;
  int steps = 0;
  long ticks = 0;
  long overruns = 0;
  double elapsed = 0.0;
  double target_hz = 0.0;
  double achieved_hz = 0.0;
  // Compute time per tick, seconds.
  double mean_compute = 0.0;
  double p99_compute = 0.0;
  double max_compute = 0.0;
  // Predicted states per second of compute (early-stopped rollouts count
  // only the states actually computed).
  double steps_per_second = 0.0;

  double overrun_fraction() const { return ticks > 0 ? static_cast<double>(overruns) / ticks : 0.0; }
  // 1 / mean compute time: the rate the loop could hold unpaced.
  double capacity_hz() const { return mean_compute > 0.0 ? 1.0 / mean_compute : 0.0; }
};

// `model` null means the simulator is the predictor.
TickRateResult MeasureTickRate(const RunConfig& config, const KoopmanModel* model,
                               const std::vector<int>& per_dim_counts, int workers,
                               double duration);

// Flat-out batch prediction from one fixed state.
struct BatchRateResult {
  int workers = 0;
  int n_samples = 0;
  int steps = 0;
  long batches = 0;
  double elapsed = 0.0;
  double batches_per_second = 0.0;
  double trajectories_per_second = 0.0;
  double steps_per_second = 0.0;
};

BatchRateResult MeasureBatchRate(const RunConfig& config, const KoopmanModel* model,
                                 const std::vector<int>& per_dim_counts, int workers,
                                 double duration);

struct BenchReport {
  std::string config_hash;
  unsigned hardware_threads = 0;
  std::vector<TickRateResult> tick_rates;
  std::vector<BatchRateResult> sweep;
};

// Runs bench.* from the config: the paced tick-rate run per worker count,
// then the batch-rate sweep over sweep_samples x workers.
BenchReport RunBench(const RunConfig& config, const KoopmanModel* model);

// Plain-text report. The header lists reference figures from a GPU
// implementation for comparison; they are not targets of this build.
std::string FormatBenchReport(const RunConfig& config, const BenchReport& report);

}  // namespace mpmi

#endif  // MPMI_BENCH_H_
