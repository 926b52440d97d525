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

#ifndef MPMI_ROLLOUT_H_
#define MPMI_ROLLOUT_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mpmi/environment.h"
#include "mpmi/predictor.h"
#include "mpmi/sampling.h"
#include "mpmi/worker_pool.h"

namespace mpmi {

struct HorizonConfig {
  int steps = 30;
  // Standard deviation of the Gaussian added to each predicted state
  // component. Empty means noise-free.
  std::vector<double> noise_sigma;
  std::uint64_t noise_seed = 0;

  // T = 30 for the balance bot, T = 25 for the race car, noise-free.
  static HorizonConfig Defaults(EnvId env);
  bool noisy() const;
  // Throws ConfigError unless steps >= 1 and sigmas are finite and >= 0.
  void Validate(int state_dim) const;
};

// Seed of the noise stream for one (tick, sample) pair. Streams depend only
// on these counters, never on scheduling.
std::uint64_t NoiseStreamSeed(std::uint64_t noise_seed, std::uint64_t tick, std::uint64_t sample);

struct RolloutResult {
  // (steps + 1) x state_dim, row 0 = x_t. Rows past the first unsafe step are NaN.
  std::vector<double> trajectory;
  int safe_steps = 0;
  bool fully_safe = false;
};

// Predicts x <- f(x, u) + z with the control held for the whole horizon,
// stopping at the first predicted state that is unsafe or non-finite.
RolloutResult RolloutOne(const Predictor& model, const Environment& env,
                         std::span<const double> x_t, std::span<const double> u,
                         const HorizonConfig& horizon, std::uint64_t tick_index = 0,
                         std::uint64_t sample_index = 0);

// All sampled controls forward-predicted from one state.
class RolloutBatch {
 public:
  const SampleSet* samples() const { return samples_; }
  int size() const { return static_cast<int>(safe_steps_.size()); }
  int steps() const { return steps_; }
  int state_dim() const { return state_dim_; }
  std::uint64_t tick_index() const { return tick_; }
  bool recorded() const { return recorded_; }

  int safe_steps(int i) const { return safe_steps_[i]; }
  bool fully_safe(int i) const { return safe_steps_[i] == steps_; }
  // Number of predicted states stored for sample i beyond x_t.
  int computed_steps(int i) const { return std::min(steps_, safe_steps_[i] + 1); }
  bool present(int i, int k) const { return recorded_ && k <= computed_steps(i); }
  // Predicted state k of sample i (NaN entries when absent).
  std::span<const double> state(int i, int k) const {
    return {trajectories_.data() + (static_cast<std::size_t>(i) * (steps_ + 1) + k) * state_dim_,
            static_cast<std::size_t>(state_dim_)};
  }
  const std::vector<int>& all_safe_steps() const { return safe_steps_; }
  const std::vector<double>& trajectories() const { return trajectories_; }
  int fully_safe_count() const;

 private:
  friend void RunRolloutBatch(const Predictor&, const Environment&, std::span<const double>,
                              const SampleSet&, const HorizonConfig&, std::uint64_t,
                              WorkerPool&, RolloutBatch*, bool);
  const SampleSet* samples_ = nullptr;
  int steps_ = 0;
  int state_dim_ = 0;
  std::uint64_t tick_ = 0;
  bool recorded_ = true;
  std::vector<int> safe_steps_;
  std::vector<double> trajectories_;
};

// Semantically N independent RolloutOne calls, sample i using noise stream
// (noise_seed, tick_index, i); results are identical for any pool size.
// Reuses `out`'s buffers. With record = false only safe_steps are kept.
void RunRolloutBatch(const Predictor& model, const Environment& env, std::span<const double> x_t,
                     const SampleSet& samples, const HorizonConfig& horizon,
                     std::uint64_t tick_index, WorkerPool& pool, RolloutBatch* out,
                     bool record = true);

RolloutBatch RolloutBatchFor(const Predictor& model, const Environment& env,
                             std::span<const double> x_t, const SampleSet& samples,
                             const HorizonConfig& horizon, std::uint64_t tick_index,
                             WorkerPool& pool);

// Fraction of samples that stay safe over the full horizon.
// Throws ConfigError on an empty batch.
double PercentSafe(const RolloutBatch& batch);

}  // namespace mpmi

#endif  // MPMI_ROLLOUT_H_
