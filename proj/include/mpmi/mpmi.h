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

#ifndef MPMI_MPMI_H_
#define MPMI_MPMI_H_

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "mpmi/environment.h"
#include "mpmi/predictor.h"
#include "mpmi/rollout.h"
#include "mpmi/sampling.h"
#include "mpmi/worker_pool.h"

namespace mpmi {

// Euclidean distance between a candidate control and the user's input.
double DeviationCost(std::span<const double> xi, std::span<const double> u_h);
inline double DeviationCost(const Eigen::VectorXd& xi, const Eigen::VectorXd& u_h) {
  return DeviationCost(std::span<const double>(xi.data(), xi.size()),
                       std::span<const double>(u_h.data(), u_h.size()));
}

struct Selection {
  int index = -1;
  double cost = 0.0;
  int n_safe = 0;
  bool fallback = false;
};

// Nearest fully-safe sample to u_h, lower index on ties. With no fully-safe
// sample, the samples with the most safe steps are eligible instead, and the
// nearest of those is chosen. `cost_scale` multiplies every cost.
Selection SelectMinimalIntervention(const RolloutBatch& batch, std::span<const double> u_h,
                                    double cost_scale = 1.0);

// Distance from u_h to the closest sample that the selection above would
// consider (fully safe ones, or the longest-surviving ones if none are).
double DeviationToClosestSafe(const RolloutBatch& batch, std::span<const double> u_h);

struct SharedControlDecision {
  std::uint64_t tick_index = 0;
  Eigen::VectorXd u_h;
  Eigen::VectorXd u_r;
  double deviation = 0.0;
  double deviation_to_closest_safe = 0.0;
  int n_safe = 0;
  double percent_safe = 0.0;
  bool fallback_used = false;
  bool input_clamped = false;
  int selected_index = -1;
  // Whether the grid point nearest u_h is fully safe.
  bool nearest_safe = false;
  double compute_time = 0.0;
};

// One tick of the filter: clamps u_h, rolls out every sample from x_t and
// picks the minimal intervention. Fills `batch` for reuse by the caller.
SharedControlDecision MpmiStep(std::uint64_t tick_index, std::span<const double> x_t,
                               std::span<const double> u_h, const Predictor& model,
                               const Environment& env, const SampleSet& samples,
                               const HorizonConfig& horizon, WorkerPool& pool,
                               RolloutBatch* batch);

struct OracleResult {
  Eigen::VectorXd u_r;
  int index = -1;
  int n_safe = 0;
  bool any_safe = false;
};

// Dense-grid reference selection using the environment's own dynamics and
// no noise. Cost is O(prod(dense_counts) * steps) integrator calls, so keep
// it to one- or two-dimensional control spaces.
OracleResult SmiOracle(std::span<const double> x_t, std::span<const double> u_h,
                       std::shared_ptr<const Environment> env, std::vector<int> dense_counts,
                       int steps, WorkerPool& pool);

}  // namespace mpmi

#endif  // MPMI_MPMI_H_
