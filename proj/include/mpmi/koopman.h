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

#ifndef MPMI_KOOPMAN_H_
#define MPMI_KOOPMAN_H_

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmi/basis.h"
#include "mpmi/dataset.h"
#include "mpmi/predictor.h"

namespace mpmi {

struct TrainingStats {
  Eigen::VectorXd one_step_rmse;
  long n_samples = 0;
  int retained_count = 0;
};

// Linear operator on the lifted space. Predicting the next raw state is the
// raw-state rows of K applied to the lifted (state, control): one
// matrix-vector product.
class KoopmanModel : public Predictor {
 public:
  KoopmanModel() = default;
  KoopmanModel(EnvId env, BasisDictionary basis, Eigen::MatrixXd k, double dt);

  EnvId env() const { return env_; }
  const BasisDictionary& basis() const { return basis_; }
  const Eigen::MatrixXd& K() const { return k_; }
  double dt() const { return dt_; }
  const TrainingStats& training_stats() const { return stats_; }
  void set_training_stats(TrainingStats stats) { stats_ = std::move(stats); }
  std::string config_hash;

  int state_dim() const override { return basis_.state_dim(); }
  int control_dim() const override { return basis_.control_dim(); }
  int lifted_dim() const { return basis_.active_count(); }
  int scratch_size() const override { return lifted_dim(); }
  void Predict(const double* x, const double* u, double* next, double* scratch) const override;
  int block_scratch_size() const override { return lifted_dim() * kLanes; }
  void PredictBlock(const double* x, const double* u, double* next,
                    double* scratch) const override;

  // Checked: throws DomainError on wrong dimensions or non-finite input.
  Eigen::VectorXd Predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

 private:
  EnvId env_ = EnvId::kBalanceBot;
  BasisDictionary basis_;
  Eigen::MatrixXd k_;
  double dt_ = 0.0;
  TrainingStats stats_;
  // Raw-state rows of K, row-major.
  std::vector<double> state_rows_;
};

// Least squares over lifted pairs:
//   K = argmin sum_t |lift(x_{t+1}, u_t) - K lift(x_t, u_t)|^2 + ridge |K|_F^2
// with the control and constant rows then replaced by identity rows (the
// control is held over a step). With ridge = 0 a rank-deficient problem
// throws IllConditionedError naming a dependent basis function.
KoopmanModel Fit(const Dataset& data, const BasisDictionary& basis, double ridge);

struct SparsityOptions {
  // Increasing influence thresholds; each is applied until nothing more is
  // pruned.
  std::vector<double> thresholds = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  // Largest allowed held-out one-step RMSE relative to the input model, per
  // state dimension.
  double max_rmse_growth = 1.05;
  double ridge = 1e-6;
};

// Sequential thresholded refitting. The influence of a random feature is
// max_i |K_ij| rms(psi_j) / rms(dx_i) over the raw-state rows i, with dx the
// one-step state change. Features below the current threshold are dropped
// and the model is refit on `train`; the schedule stops before any step
// that would grow held-out RMSE beyond max_rmse_growth. Raw and constant
// entries are never dropped.
KoopmanModel Sparsify(const KoopmanModel& model, const Dataset& train, const Dataset& heldout,
                      const SparsityOptions& options);

struct EvaluationReport {
  Eigen::VectorXd one_step_rmse;
  // Open-loop error after k chained predictions with recorded controls.
  Eigen::VectorXd k_step_rmse;
  int k = 0;
  long windows = 0;
};

// Throws ConfigError when `data` is empty or k < 1.
EvaluationReport Evaluate(const KoopmanModel& model, const Dataset& data, int k);

// Self-describing text: header lines (env, dt, basis spec with seeds, active
// mask, training stats), then K row-major in shortest round-trip decimal.
void SaveModel(const KoopmanModel& model, const std::filesystem::path& path);
KoopmanModel LoadModel(const std::filesystem::path& path);

}  // namespace mpmi

#endif  // MPMI_KOOPMAN_H_
