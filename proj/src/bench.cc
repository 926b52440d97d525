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

#include "mpmi/bench.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "mpmi/errors.h"
#include "mpmi/pipeline.h"
#include "mpmi/scripted_user.h"

namespace mpmi {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

}  // namespace

TickRateResult MeasureTickRate(const RunConfig& config, const KoopmanModel* model,
                               const std::vector<int>& per_dim_counts, int workers,
                               double duration) {
  if (!(duration > 0.0)) throw ConfigError("bench.duration must be positive");
  const SampleSet samples = SampleSet::Grid(config.env.control_space, per_dim_counts);
  WorkerPool pool(ResolveWorkers(workers));
  TickRateResult r;
  r.workers = pool.size();
  r.n_samples = samples.size();
  r.steps = config.horizon.steps;
  r.target_hz = 1.0 / config.env.dt;

  std::vector<double> compute;
  long predicted = 0;
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(duration));
  std::uint64_t seed = config.session.seed;
  while (Clock::now() < deadline) {
    auto env = MakeEnvironment(config.env, seed, config.always_safe);
    TrialPredictor predictor = PredictorFor(model, env);
    const TrialContext context{env, predictor.predictor, &samples, config.horizon, &pool};
    ScriptedUser user(config.session.user, config.env, seed);
    TrialOptions options;
    options.seed = seed;
    options.mode = Mode::kMpmi;
    options.real_time = true;
    // Never sleep: the measurement is of the loop, not of the host's wake-up latency.
    options.spin_wait = config.env.dt;
    options.keep_running = [&] { return Clock::now() < deadline; };
    options.on_tick = [&](const TickRecord& rec, const SharedControlDecision&,
                          const RolloutBatch& batch) {
      compute.push_back(rec.compute_time);
      for (int i = 0; i < batch.size(); ++i) predicted += batch.computed_steps(i);
    };
    const TrialRecord trial = RunTrial(context, user, options);
    r.overruns += trial.overrun_ticks;
    ++seed;
  }
  r.elapsed = Seconds(Clock::now() - start);
  r.ticks = static_cast<long>(compute.size());
  if (r.ticks > 0) {
    double sum = 0.0;
    for (double c : compute) sum += c;
    r.mean_compute = sum / static_cast<double>(r.ticks);
    std::sort(compute.begin(), compute.end());
    r.p99_compute = compute[static_cast<std::size_t>(0.99 * static_cast<double>(r.ticks - 1))];
    r.max_compute = compute.back();
    r.achieved_hz = static_cast<double>(r.ticks) / r.elapsed;
    r.steps_per_second = static_cast<double>(predicted) / sum;
  }
  return r;
}

BatchRateResult MeasureBatchRate(const RunConfig& config, const KoopmanModel* model,
                                 const std::vector<int>& per_dim_counts, int workers,
                                 double duration) {
  if (!(duration > 0.0)) throw ConfigError("bench.sweep_duration must be positive");
  const SampleSet samples = SampleSet::Grid(config.env.control_space, per_dim_counts);
  WorkerPool pool(ResolveWorkers(workers));
  auto env = MakeEnvironment(config.env, config.session.seed, config.always_safe);
  TrialPredictor predictor = PredictorFor(model, env);
  const Eigen::VectorXd x = env->InitialState(config.session.seed);
  BatchRateResult r;
  r.workers = pool.size();
  r.n_samples = samples.size();
  r.steps = config.horizon.steps;
  RolloutBatch batch;
  long predicted = 0;
  const auto start = Clock::now();
  do {
    RunRolloutBatch(*predictor.predictor, *env, std::span<const double>(x.data(), x.size()),
                    samples, config.horizon, static_cast<std::uint64_t>(r.batches), pool, &batch);
    for (int i = 0; i < batch.size(); ++i) predicted += batch.computed_steps(i);
    ++r.batches;
  } while (Seconds(Clock::now() - start) < duration);
  r.elapsed = Seconds(Clock::now() - start);
  r.batches_per_second = static_cast<double>(r.batches) / r.elapsed;
  r.trajectories_per_second = r.batches_per_second * r.n_samples;
  r.steps_per_second = static_cast<double>(predicted) / r.elapsed;
  return r;
}

BenchReport RunBench(const RunConfig& config, const KoopmanModel* model) {
  BenchReport report;
  report.config_hash = config.hash;
  report.hardware_threads = std::thread::hardware_concurrency();
  const std::vector<int>& counts =
      config.bench.per_dim_counts.empty() ? config.per_dim_counts : config.bench.per_dim_counts;
  std::vector<int> workers;
  for (int w : config.bench.workers) {
    const int resolved = ResolveWorkers(w);
    if (std::find(workers.begin(), workers.end(), resolved) == workers.end()) {
      workers.push_back(resolved);
    }
  }
  for (int w : workers) {
    report.tick_rates.push_back(MeasureTickRate(config, model, counts, w, config.bench.duration));
  }
  for (int n : config.bench.sweep_samples) {
    for (int w : workers) {
      report.sweep.push_back(MeasureBatchRate(config, model, GridCountsFor(config.env.id, n), w,
                                              config.bench.sweep_duration));
    }
  }
  return report;
}

std::string FormatBenchReport(const RunConfig& config, const BenchReport& report) {
  std::ostringstream out;
  char line[256];
  out << "# mpmi bench  env=" << ToString(config.env.id) << "  config_hash=" << report.config_hash
      << "  seed=" << config.session.seed << "  hardware_threads=" << report.hardware_threads
      << "\n";
  out << "# reference GPU implementation (for comparison, not a target here):\n"
      << "#   batch rate ~7000 Hz balance bot, ~3500 Hz race car;\n"
      << "#   between 600,000 and 1,000,000 trajectories per second\n";
  out << "# predictor: " << (config.model.ground_truth ? "simulator" : config.model.path) << "\n\n";

  out << "closed loop, paced at 1/dt\n";
  std::snprintf(line, sizeof(line), "%7s %6s %4s %7s %8s %9s %10s %10s %10s %9s %12s\n",
                "workers", "N", "T", "ticks", "rate Hz", "capacity", "mean ms", "p99 ms",
                "max ms", "overrun%", "steps/s");
  out << line;
  for (const TickRateResult& r : report.tick_rates) {
    std::snprintf(line, sizeof(line),
                  "%7d %6d %4d %7ld %8.1f %9.1f %10.3f %10.3f %10.3f %9.3f %12.4g\n", r.workers,
                  r.n_samples, r.steps, r.ticks, r.achieved_hz, r.capacity_hz(),
                  1e3 * r.mean_compute, 1e3 * r.p99_compute, 1e3 * r.max_compute,
                  100.0 * r.overrun_fraction(), r.steps_per_second);
    out << line;
  }
  if (!report.sweep.empty()) {
    out << "\nbatch prediction, unpaced\n";
    std::snprintf(line, sizeof(line), "%7s %6s %4s %10s %14s %14s\n", "workers", "N", "T",
                  "batches/s", "trajectories/s", "steps/s");
    out << line;
    for (const BatchRateResult& r : report.sweep) {
      std::snprintf(line, sizeof(line), "%7d %6d %4d %10.1f %14.4g %14.4g\n", r.workers,
                    r.n_samples, r.steps, r.batches_per_second, r.trajectories_per_second,
                    r.steps_per_second);
      out << line;
    }
  }
  return out.str();
}

}  // namespace mpmi
