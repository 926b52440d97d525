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

#ifndef MPMI_PIPELINE_H_
#define MPMI_PIPELINE_H_

#include <functional>
#include <memory>
#include <vector>

#include "mpmi/config.h"
#include "mpmi/dataset.h"
#include "mpmi/environment.h"
#include "mpmi/koopman.h"
#include "mpmi/predictor.h"
#include "mpmi/sampling.h"
#include "mpmi/session.h"
#include "mpmi/worker_pool.h"

namespace mpmi {

// Steps that turn a RunConfig into artifacts. The harness and the
// acceptance checks share them so both measure the same thing.

// Excitation dataset as configured (model.collect_*).
Dataset CollectFor(const RunConfig& config);

struct TrainResult {
  KoopmanModel full;
  KoopmanModel sparse;
  EvaluationReport full_report;
  EvaluationReport sparse_report;
  long train_rows = 0;
  long heldout_rows = 0;
};

// Fits the full dictionary on the leading rows, sparsifies against the
// trailing model.heldout_fraction of rows and evaluates both on them.
// Throws ConfigError when either split is empty or the dataset belongs to a
// different environment.
TrainResult TrainModel(const RunConfig& config, const Dataset& data);

// Plain-text table of the one-step and k-step RMSE per state dimension.
std::string FormatTrainReport(const RunConfig& config, const TrainResult& result);

// Sample grid for the configured per_dim_counts.
SampleSet SamplesFor(const RunConfig& config);

// Worker pool size for `requested` (0 = hardware threads, at least 1).
int ResolveWorkers(int requested);

// Predictor for one trial: `model` when given, else the trial's own simulator.
struct TrialPredictor {
  std::unique_ptr<GroundTruthPredictor> ground_truth;
  const Predictor* predictor = nullptr;
};
TrialPredictor PredictorFor(const KoopmanModel* model, std::shared_ptr<const Environment> env);

struct CampaignOptions {
  // Called after every finished trial.
  std::function<void(const TrialRecord&)> on_trial;
  std::function<bool()> keep_running;
};

// session.trials paired seeds (seed + i), every configured mode per seed,
// each mode driven by a scripted user with the same seed. `model` null
// means the simulator is the predictor (model.ground_truth).
std::vector<TrialRecord> RunCampaign(const RunConfig& config, const KoopmanModel* model,
                                     WorkerPool& pool, const CampaignOptions& options = {});

// Loads the model named by the config, or returns null for ground truth.
// Throws ConfigError when the model was trained for another environment.
std::unique_ptr<KoopmanModel> LoadModelFor(const RunConfig& config);

}  // namespace mpmi

#endif  // MPMI_PIPELINE_H_
