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

#include "mpmi/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

#include "mpmi/errors.h"
#include "mpmi/scripted_user.h"

namespace mpmi {

Dataset CollectFor(const RunConfig& config) {
  Dataset data = CollectDataset(config.env, config.model.excitation, config.model.collect_steps,
                                config.model.collect_seed);
  data.config_hash = config.hash;
  return data;
}

TrainResult TrainModel(const RunConfig& config, const Dataset& data) {
  if (data.env() != config.env.id) {
    throw ConfigError("dataset is for " + ToString(data.env()) + ", config is for " +
                      ToString(config.env.id));
  }
  const auto n = static_cast<long>(data.size());
  const long heldout = static_cast<long>(static_cast<double>(n) * config.model.heldout_fraction);
  const long train = n - heldout;
  if (train <= 0 || heldout <= 0) {
    throw ConfigError("model.heldout_fraction leaves an empty split of " + std::to_string(n) +
                      " rows");
  }
  TrainResult r;
  r.train_rows = train;
  r.heldout_rows = heldout;
  const Dataset train_set = data.Slice(0, train);
  const Dataset heldout_set = data.Slice(train, n);
  r.full = Fit(train_set, BasisDictionary(config.model.basis), config.model.ridge);
  SparsityOptions sparsity = config.model.sparsity;
  sparsity.ridge = config.model.ridge;
  r.sparse = Sparsify(r.full, train_set, heldout_set, sparsity);
  r.sparse.config_hash = config.hash;
  r.full_report = Evaluate(r.full, heldout_set, config.model.eval_k);
  r.sparse_report = Evaluate(r.sparse, heldout_set, config.model.eval_k);
  TrainingStats stats = r.sparse.training_stats();
  stats.one_step_rmse = r.sparse_report.one_step_rmse;
  r.sparse.set_training_stats(stats);
  return r;
}

std::string FormatTrainReport(const RunConfig& config, const TrainResult& result) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%s: %ld train rows, %ld held-out rows\n",
                ToString(config.env.id).c_str(), result.train_rows, result.heldout_rows);
  out << line;
  std::snprintf(line, sizeof(line), "dictionary: %d functions, %d retained after sparsification\n",
                result.full.lifted_dim(), result.sparse.lifted_dim());
  out << line;
  std::snprintf(line, sizeof(line), "%-14s %12s %12s %12s %12s\n", "state", "1-step full",
                "1-step kept", (std::to_string(result.full_report.k) + "-step full").c_str(),
                (std::to_string(result.sparse_report.k) + "-step kept").c_str());
  out << line;
  const auto names = StateNames(config.env.id);
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::snprintf(line, sizeof(line), "%-14s %12.4g %12.4g %12.4g %12.4g\n", names[i].c_str(),
                  result.full_report.one_step_rmse[i], result.sparse_report.one_step_rmse[i],
                  result.full_report.k_step_rmse[i], result.sparse_report.k_step_rmse[i]);
    out << line;
  }
  return out.str();
}

SampleSet SamplesFor(const RunConfig& config) {
  return SampleSet::Grid(config.env.control_space, config.per_dim_counts);
}

int ResolveWorkers(int requested) {
  if (requested > 0) return requested;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

TrialPredictor PredictorFor(const KoopmanModel* model, std::shared_ptr<const Environment> env) {
  TrialPredictor p;
  if (model != nullptr) {
    p.predictor = model;
  } else {
    p.ground_truth = std::make_unique<GroundTruthPredictor>(std::move(env));
    p.predictor = p.ground_truth.get();
  }
  return p;
}

std::vector<TrialRecord> RunCampaign(const RunConfig& config, const KoopmanModel* model,
                                     WorkerPool& pool, const CampaignOptions& options) {
  const SampleSet samples = SamplesFor(config);
  std::vector<TrialRecord> trials;
  for (std::uint64_t seed : config.TrialSeeds()) {
    auto env = MakeEnvironment(config.env, seed, config.always_safe);
    TrialPredictor predictor = PredictorFor(model, env);
    const TrialContext context{env, predictor.predictor, &samples, config.horizon, &pool};
    for (Mode mode : config.session.modes) {
      if (options.keep_running && !options.keep_running()) return trials;
      ScriptedUser user(config.session.user, config.env, seed);
      TrialOptions trial_options;
      trial_options.trial_id = ToString(config.env.id) + "-" + ToString(mode) + "-" +
                               std::to_string(seed);
      trial_options.seed = seed;
      trial_options.mode = mode;
      trial_options.real_time = config.session.real_time;
      trial_options.keep_running = options.keep_running;
      trials.push_back(RunTrial(context, user, trial_options));
      if (options.on_trial) options.on_trial(trials.back());
    }
  }
  return trials;
}

std::unique_ptr<KoopmanModel> LoadModelFor(const RunConfig& config) {
  if (config.model.ground_truth) return nullptr;
  auto model = std::make_unique<KoopmanModel>(LoadModel(config.model.path));
  if (model->env() != config.env.id) {
    throw ConfigError("model '" + config.model.path + "' is for " + ToString(model->env()) +
                      ", config is for " + ToString(config.env.id));
  }
  if (std::abs(model->dt() - config.env.dt) > 1e-12) {
    throw ConfigError("model '" + config.model.path + "' was trained with dt " +
                      std::to_string(model->dt()) + ", config has env.dt " +
                      std::to_string(config.env.dt));
  }
  return model;
}

}  // namespace mpmi
