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

#ifndef MPMI_SESSION_H_
#define MPMI_SESSION_H_

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmi/environment.h"
#include "mpmi/mpmi.h"
#include "mpmi/predictor.h"
#include "mpmi/rollout.h"
#include "mpmi/sampling.h"
#include "mpmi/worker_pool.h"

namespace mpmi {

enum class Mode { kUserOnly, kMpmi };

std::string ToString(Mode mode);
// "user_only" or "mpmi"; throws ConfigError otherwise.
Mode ModeFromString(const std::string& name);

// What the loop reads from its input source at the start of a tick.
struct InputSample {
  std::optional<Eigen::VectorXd> u_h;
  std::optional<Mode> mode;
};

class InputSource {
 public:
  virtual ~InputSource() = default;
  // Called once per tick with the state the decision is made from.
  virtual InputSample Poll(std::uint64_t tick, double t, const Eigen::VectorXd& state) = 0;
};

// Single-slot mailbox between a producer thread (network, joystick) and the
// control loop. Later writes replace earlier ones; each value is delivered once.
class InputHandoff : public InputSource {
 public:
  void Write(Eigen::VectorXd u_h, double client_time = 0.0);
  void SetMode(Mode mode);
  InputSample Poll(std::uint64_t tick, double t, const Eigen::VectorXd& state) override;
  // Send timestamp of the most recently delivered input.
  double last_client_time() const;

 private:
  mutable std::mutex mu_;
  std::optional<Eigen::VectorXd> pending_;
  std::optional<Mode> pending_mode_;
  double pending_time_ = 0.0;
  double delivered_time_ = 0.0;
};

struct TickRecord {
  std::uint64_t tick = 0;
  double t = 0.0;
  Eigen::VectorXd state;
  Eigen::VectorXd u_h;
  Eigen::VectorXd u_r;
  double deviation = 0.0;
  double deviation_to_closest_safe = 0.0;
  double percent_safe = 0.0;
  int n_safe = 0;
  bool fallback_used = false;
  bool input_clamped = false;
  bool nearest_safe = false;
  bool assisted = false;
  // Seconds spent computing this tick. Not reproducible.
  double compute_time = 0.0;
};

enum class Outcome { kSurvived, kFailed };

std::string ToString(Outcome outcome);
Outcome OutcomeFromString(const std::string& name);

struct TrialRecord {
  std::string trial_id;
  EnvId env = EnvId::kBalanceBot;
  Mode mode = Mode::kMpmi;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kSurvived;
  // Seconds until failure, or the trial cap for survivors.
  double duration = 0.0;
  double max_trial_time = 0.0;
  std::vector<TickRecord> ticks;
  // Ticks whose compute time exceeded dt.
  int overrun_ticks = 0;
  // Stopped from outside before failing or reaching the cap. Such trials
  // are kept out of summaries.
  bool aborted = false;
};

struct TrialOptions {
  std::string trial_id;
  std::uint64_t seed = 0;
  Mode mode = Mode::kMpmi;
  // Defaults to the environment's cap.
  std::optional<long> max_ticks;
  // Sleep to hold the tick rate at 1/dt instead of running flat out.
  bool real_time = false;
  // Real time only: seconds before each deadline spent yielding instead of
  // sleeping. Values >= dt never sleep.
  double spin_wait = 0.002;
  // Returning false stops the trial early and marks it aborted.
  std::function<bool()> keep_running;
  // Called after every tick, before the environment is stepped.
  std::function<void(const TickRecord&, const SharedControlDecision&, const RolloutBatch&)>
      on_tick;
};

// Everything a trial needs besides its options. Not owned.
struct TrialContext {
  std::shared_ptr<const Environment> env;
  const Predictor* model = nullptr;
  const SampleSet* samples = nullptr;
  HorizonConfig horizon;
  WorkerPool* pool = nullptr;
};

// Runs one closed-loop trial from env->InitialState(seed). The filter runs
// every tick in both modes so user-only trials log the same metrics; only
// the applied control differs. Ends on failure or after max_ticks.
TrialRecord RunTrial(const TrialContext& context, InputSource& input,
                     const TrialOptions& options);

}  // namespace mpmi

#endif  // MPMI_SESSION_H_
