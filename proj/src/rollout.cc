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

#include "mpmi/rollout.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "mpmi/errors.h"

namespace mpmi {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

std::uint64_t Mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// SplitMix64 as a UniformRandomBitGenerator: cheap to seed per sample.
class StreamEngine {
 public:
  using result_type = std::uint64_t;
  explicit StreamEngine(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

bool Finite(const double* x, int n) {
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

// Work buffers for one block of samples.
struct BlockBuffers {
  BlockBuffers(const Predictor& model)
      : scratch(std::max(1, model.block_scratch_size())),
        u(static_cast<std::size_t>(model.control_dim()) * kLanes),
        a(static_cast<std::size_t>(model.state_dim()) * kLanes),
        b(a.size()),
        lane(model.state_dim()) {}
  std::vector<double> scratch, u, a, b, lane;
};

// Rolls out `live` controls in one block; lane l uses noise stream
// (tick, first_stream + l). Lanes past `live` repeat lane 0 and are
// discarded. traj[l] may be null.
void RolloutBlock(const Predictor& model, const Environment& env, const double* x_t,
                  const double* const* controls, int live, std::uint64_t first_stream,
                  const HorizonConfig& horizon, std::uint64_t tick, double* const* traj,
                  int* safe_out, BlockBuffers& buf) {
  constexpr int L = kLanes;
  const int n = model.state_dim();
  const int m = model.control_dim();
  const int steps = horizon.steps;
  const bool noisy = horizon.noisy();
  for (int l = 0; l < L; ++l) {
    const double* u = controls[l < live ? l : 0];
    for (int j = 0; j < m; ++j) buf.u[j * L + l] = u[j];
    for (int i = 0; i < n; ++i) buf.a[i * L + l] = x_t[i];
  }
  std::vector<StreamEngine> engines;
  std::vector<std::normal_distribution<double>> gauss;
  if (noisy) {
    for (int l = 0; l < live; ++l) {
      engines.emplace_back(NoiseStreamSeed(horizon.noise_seed, tick, first_stream + l));
    }
    gauss.resize(live);
  }
  bool alive[L];
  for (int l = 0; l < L; ++l) {
    alive[l] = l < live;
    safe_out[l] = 0;
    if (l < live && traj[l]) std::copy(x_t, x_t + n, traj[l]);
  }
  int n_alive = live;
  double* cur = buf.a.data();
  double* next = buf.b.data();
  double* x = buf.lane.data();
  for (int k = 1; k <= steps && n_alive > 0; ++k) {
    model.PredictBlock(cur, buf.u.data(), next, buf.scratch.data());
    for (int l = 0; l < L; ++l) {
      if (!alive[l]) {
        // Frozen at its last state so dead lanes stay finite.
        for (int i = 0; i < n; ++i) next[i * L + l] = cur[i * L + l];
        continue;
      }
      for (int i = 0; i < n; ++i) x[i] = next[i * L + l];
      if (noisy) {
        for (int i = 0; i < n; ++i) {
          const double sigma = horizon.noise_sigma[i];
          if (sigma > 0.0) x[i] += sigma * gauss[l](engines[l]);
        }
        for (int i = 0; i < n; ++i) next[i * L + l] = x[i];
      }
      if (traj[l]) std::copy(x, x + n, traj[l] + static_cast<std::size_t>(k) * n);
      if (!Finite(x, n) || !env.IsSafe(std::span<const double>(x, n))) {
        alive[l] = false;
        --n_alive;
        if (traj[l]) {
          std::fill(traj[l] + static_cast<std::size_t>(k + 1) * n,
                    traj[l] + static_cast<std::size_t>(steps + 1) * n, kAbsent);
        }
        for (int i = 0; i < n; ++i) next[i * L + l] = cur[i * L + l];
        continue;
      }
      ++safe_out[l];
    }
    std::swap(cur, next);
  }
}

void CheckInputs(const Predictor& model, const Environment& env, std::span<const double> x_t,
                 int control_dim, const HorizonConfig& horizon) {
  if (model.state_dim() != env.state_dim() || model.control_dim() != env.control_dim()) {
    throw ConfigError("model and environment dimensions differ");
  }
  if (static_cast<int>(x_t.size()) != env.state_dim() || control_dim != env.control_dim()) {
    throw DomainError("rollout input has the wrong dimension");
  }
  horizon.Validate(env.state_dim());
}

}  // namespace

HorizonConfig HorizonConfig::Defaults(EnvId env) {
  HorizonConfig h;
  h.steps = env == EnvId::kBalanceBot ? 30 : 25;
  return h;
}

bool HorizonConfig::noisy() const {
  return std::any_of(noise_sigma.begin(), noise_sigma.end(), [](double s) { return s > 0.0; });
}

void HorizonConfig::Validate(int state_dim) const {
  if (steps < 1) throw ConfigError("horizon steps must be at least 1");
  if (!noise_sigma.empty() && static_cast<int>(noise_sigma.size()) != state_dim) {
    throw ConfigError("noise_sigma needs one entry per state dimension");
  }
  for (double s : noise_sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise sigmas must be finite and >= 0");
  }
}

std::uint64_t NoiseStreamSeed(std::uint64_t noise_seed, std::uint64_t tick, std::uint64_t sample) {
  return Mix(Mix(Mix(noise_seed) ^ tick) ^ sample);
}

RolloutResult RolloutOne(const Predictor& model, const Environment& env,
                         std::span<const double> x_t, std::span<const double> u,
                         const HorizonConfig& horizon, std::uint64_t tick_index,
                         std::uint64_t sample_index) {
  CheckInputs(model, env, x_t, static_cast<int>(u.size()), horizon);
  const int n = env.state_dim();
  // A one-sample block, so the arithmetic is the batch's exactly.
  const double* controls[kLanes] = {u.data()};
  RolloutResult r;
  r.trajectory.assign(static_cast<std::size_t>(horizon.steps + 1) * n, kAbsent);
  double* traj[kLanes] = {r.trajectory.data()};
  int safe[kLanes];
  BlockBuffers buf(model);
  RolloutBlock(model, env, x_t.data(), controls, 1, sample_index, horizon, tick_index, traj, safe,
               buf);
  r.safe_steps = safe[0];
  r.fully_safe = r.safe_steps == horizon.steps;
  return r;
}

int RolloutBatch::fully_safe_count() const {
  return static_cast<int>(std::count(safe_steps_.begin(), safe_steps_.end(), steps_));
}

void RunRolloutBatch(const Predictor& model, const Environment& env, std::span<const double> x_t,
                     const SampleSet& samples, const HorizonConfig& horizon,
                     std::uint64_t tick_index, WorkerPool& pool, RolloutBatch* out, bool record) {
  CheckInputs(model, env, x_t, samples.dims(), horizon);
  const int n = env.state_dim();
  const int count = samples.size();
  const int steps = horizon.steps;
  out->samples_ = &samples;
  out->steps_ = steps;
  out->state_dim_ = n;
  out->tick_ = tick_index;
  out->recorded_ = record;
  out->safe_steps_.resize(count);
  if (record) {
    out->trajectories_.resize(static_cast<std::size_t>(count) * (steps + 1) * n);
  } else {
    out->trajectories_.clear();
  }
  const int blocks = (count + kLanes - 1) / kLanes;
  pool.ParallelFor(blocks, [&](int begin, int end) {
    BlockBuffers buf(model);
    double* traj[kLanes];
    const double* controls[kLanes];
    int safe[kLanes];
    for (int blk = begin; blk < end; ++blk) {
      const int first = blk * kLanes;
      const int live = std::min(kLanes, count - first);
      for (int l = 0; l < kLanes; ++l) {
        controls[l] = samples.sample(first + (l < live ? l : 0)).data();
        traj[l] = record && l < live
            ? out->trajectories_.data() + static_cast<std::size_t>(first + l) * (steps + 1) * n
            : nullptr;
      }
      RolloutBlock(model, env, x_t.data(), controls, live, first, horizon, tick_index, traj, safe,
                   buf);
      std::copy(safe, safe + live, out->safe_steps_.begin() + first);
    }
  });
}

RolloutBatch RolloutBatchFor(const Predictor& model, const Environment& env,
                             std::span<const double> x_t, const SampleSet& samples,
                             const HorizonConfig& horizon, std::uint64_t tick_index,
                             WorkerPool& pool) {
  RolloutBatch batch;
  RunRolloutBatch(model, env, x_t, samples, horizon, tick_index, pool, &batch);
  return batch;
}

double PercentSafe(const RolloutBatch& batch) {
  if (batch.size() == 0) throw ConfigError("percent_safe of an empty batch");
  return static_cast<double>(batch.fully_safe_count()) / batch.size();
}

}  // namespace mpmi
