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

#include "mpmi/mpmi.h"

#include <chrono>
#include <cmath>
#include <limits>

#include "mpmi/errors.h"

namespace mpmi {

double DeviationCost(std::span<const double> xi, std::span<const double> u_h) {
  double s = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double d = xi[i] - u_h[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Selection SelectMinimalIntervention(const RolloutBatch& batch, std::span<const double> u_h,
                                    double cost_scale) {
  const SampleSet& samples = *batch.samples();
  Selection sel;
  if (batch.size() == 0) return sel;
  sel.n_safe = batch.fully_safe_count();
  sel.fallback = sel.n_safe == 0;
  int eligible_steps = batch.steps();
  if (sel.fallback) {
    eligible_steps = 0;
    for (int s : batch.all_safe_steps()) eligible_steps = std::max(eligible_steps, s);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < batch.size(); ++i) {
    if (batch.safe_steps(i) != eligible_steps) continue;
    const double c = cost_scale * DeviationCost(samples.sample(i), u_h);
    if (c < best) {
      best = c;
      sel.index = i;
    }
  }
  sel.cost = best;
  return sel;
}

double DeviationToClosestSafe(const RolloutBatch& batch, std::span<const double> u_h) {
  return SelectMinimalIntervention(batch, u_h).cost;
}

SharedControlDecision MpmiStep(std::uint64_t tick_index, std::span<const double> x_t,
                               std::span<const double> u_h, const Predictor& model,
                               const Environment& env, const SampleSet& samples,
                               const HorizonConfig& horizon, WorkerPool& pool,
                               RolloutBatch* batch) {
  const auto start = std::chrono::steady_clock::now();
  SharedControlDecision d;
  d.tick_index = tick_index;
  d.u_h = samples.space().Clamp(u_h, &d.input_clamped);
  const std::span<const double> uh(d.u_h.data(), d.u_h.size());

  RunRolloutBatch(model, env, x_t, samples, horizon, tick_index, pool, batch);
  const Selection sel = SelectMinimalIntervention(*batch, uh);
  d.selected_index = sel.index;
  d.u_r = samples.SampleVector(sel.index);
  d.deviation = DeviationCost(d.u_r, d.u_h);
  d.deviation_to_closest_safe = sel.cost;
  d.n_safe = sel.n_safe;
  d.percent_safe = static_cast<double>(sel.n_safe) / batch->size();
  d.fallback_used = sel.fallback;
  d.nearest_safe = batch->fully_safe(FindNearestSample(samples, uh).index);
  d.compute_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return d;
}

OracleResult SmiOracle(std::span<const double> x_t, std::span<const double> u_h,
                       std::shared_ptr<const Environment> env, std::vector<int> dense_counts,
                       int steps, WorkerPool& pool) {
  const SampleSet dense = SampleSet::Grid(env->spec().control_space, std::move(dense_counts));
  const GroundTruthPredictor truth(env);
  HorizonConfig horizon;
  horizon.steps = steps;
  const Eigen::VectorXd uh = dense.space().Clamp(u_h);
  RolloutBatch batch;
  RunRolloutBatch(truth, *env, x_t, dense, horizon, 0, pool, &batch, /*record=*/false);
  const Selection sel =
      SelectMinimalIntervention(batch, std::span<const double>(uh.data(), uh.size()));
  OracleResult r;
  r.index = sel.index;
  r.n_safe = sel.n_safe;
  r.any_safe = !sel.fallback;
  r.u_r = dense.SampleVector(sel.index);
  return r;
}

}  // namespace mpmi
