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

#ifndef MPMI_PREDICTOR_H_
#define MPMI_PREDICTOR_H_

#include <memory>

#include "mpmi/environment.h"
#include "mpmi/lanes.h"

namespace mpmi {

// One-step state map used by rollouts. Implementations are immutable and
// callable concurrently; per-call storage goes in `scratch`.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  // Doubles of scratch space Predict() may use.
  virtual int scratch_size() const = 0;
  virtual void Predict(const double* x, const double* u, double* next, double* scratch) const = 0;

  // Predict for kLanes points in block layout (see lanes.h). The default
  // runs Predict lane by lane.
  virtual int block_scratch_size() const {
    return scratch_size() + 2 * state_dim() + control_dim();
  }
  virtual void PredictBlock(const double* x, const double* u, double* next,
                            double* scratch) const;
};

// The simulator itself as the prediction model (noise-free ground truth).
inline void Predictor::PredictBlock(const double* x, const double* u, double* next,
                                    double* scratch) const {
  const int n = state_dim();
  const int m = control_dim();
  double* xl = scratch + scratch_size();
  double* ul = xl + n;
  double* nl = ul + m;
  for (int l = 0; l < kLanes; ++l) {
    for (int i = 0; i < n; ++i) xl[i] = x[i * kLanes + l];
    for (int j = 0; j < m; ++j) ul[j] = u[j * kLanes + l];
    Predict(xl, ul, nl, scratch);
    for (int i = 0; i < n; ++i) next[i * kLanes + l] = nl[i];
  }
}

class GroundTruthPredictor : public Predictor {
 public:
  explicit GroundTruthPredictor(std::shared_ptr<const Environment> env) : env_(std::move(env)) {}

  int state_dim() const override { return env_->state_dim(); }
  int control_dim() const override { return env_->control_dim(); }
  int scratch_size() const override { return 0; }
  void Predict(const double* x, const double* u, double* next, double*) const override {
    env_->Step({x, static_cast<std::size_t>(state_dim())}, {u, static_cast<std::size_t>(control_dim())},
               {next, static_cast<std::size_t>(state_dim())});
  }

 private:
  std::shared_ptr<const Environment> env_;
};

}  // namespace mpmi

#endif  // MPMI_PREDICTOR_H_
