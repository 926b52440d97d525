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

#include "mpmi/session.h"

#include <chrono>
#include <cmath>
#include <thread>

#include "mpmi/errors.h"

namespace mpmi {

namespace {

// Sleeps for most of the wait and yields through the last `spin_seconds`.
// On virtualized hosts waking from a sleep can cost milliseconds, which
// shows up as overrun ticks.
void WaitUntil(std::chrono::steady_clock::time_point due, double spin_seconds) {
  const auto spin = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(spin_seconds));
  if (std::chrono::steady_clock::now() + spin < due) std::this_thread::sleep_until(due - spin);
  while (std::chrono::steady_clock::now() < due) std::this_thread::yield();
}

}  // namespace

std::string ToString(Mode mode) { return mode == Mode::kUserOnly ? "user_only" : "mpmi"; }

Mode ModeFromString(const std::string& name) {
  if (name == "user_only") return Mode::kUserOnly;
  if (name == "mpmi") return Mode::kMpmi;
  throw ConfigError("unknown mode '" + name + "' (expected user_only or mpmi)");
}

std::string ToString(Outcome outcome) {
  return outcome == Outcome::kSurvived ? "survived" : "failed";
}

Outcome OutcomeFromString(const std::string& name) {
  if (name == "survived") return Outcome::kSurvived;
  if (name == "failed") return Outcome::kFailed;
  throw ConfigError("unknown outcome '" + name + "'");
}

void InputHandoff::Write(Eigen::VectorXd u_h, double client_time) {
  std::lock_guard<std::mutex> lock(mu_);
  pending_ = std::move(u_h);
  pending_time_ = client_time;
}

void InputHandoff::SetMode(Mode mode) {
  std::lock_guard<std::mutex> lock(mu_);
  pending_mode_ = mode;
}

InputSample InputHandoff::Poll(std::uint64_t, double, const Eigen::VectorXd&) {
  std::lock_guard<std::mutex> lock(mu_);
  InputSample sample;
  if (pending_) delivered_time_ = pending_time_;
  sample.u_h = std::move(pending_);
  sample.mode = pending_mode_;
  pending_.reset();
  pending_mode_.reset();
  return sample;
}

double InputHandoff::last_client_time() const {
  std::lock_guard<std::mutex> lock(mu_);
  return delivered_time_;
}

TrialRecord RunTrial(const TrialContext& context, InputSource& input,
                     const TrialOptions& options) {
  if (!context.env || !context.model || !context.samples || !context.pool) {
    throw ConfigError("trial context is incomplete");
  }
  const Environment& env = *context.env;
  const EnvSpec& spec = env.spec();
  const ControlSpace& box = context.samples->space();
  const double dt = spec.dt;
  const long max_ticks = options.max_ticks.value_or(spec.max_ticks());

  TrialRecord trial;
  trial.trial_id = options.trial_id;
  trial.env = spec.id;
  trial.mode = options.mode;
  trial.seed = options.seed;
  trial.max_trial_time =
      options.max_ticks ? static_cast<double>(max_ticks) * dt : spec.max_trial_time;

  Eigen::VectorXd x = env.InitialState(options.seed);
  Eigen::VectorXd next(x.size());
  // Zero-order hold, starting from the clamped zero vector.
  Eigen::VectorXd held = box.Clamp(Eigen::VectorXd::Zero(box.dims()));
  Mode mode = options.mode;
  RolloutBatch batch;
  trial.ticks.reserve(static_cast<std::size_t>(std::max(0L, std::min(max_ticks, 1L << 20))));

  const auto start = std::chrono::steady_clock::now();
  long k = 0;
  bool failed = env.IsFailed(x);
  while (!failed && k < max_ticks) {
    if (options.keep_running && !options.keep_running()) {
      trial.aborted = true;
      break;
    }
    const double t = static_cast<double>(k) * dt;
    InputSample in = input.Poll(static_cast<std::uint64_t>(k), t, x);
    if (in.u_h && in.u_h->size() == box.dims()) held = *in.u_h;
    if (in.mode) mode = *in.mode;

    SharedControlDecision d = MpmiStep(
        static_cast<std::uint64_t>(k), std::span<const double>(x.data(), x.size()),
        std::span<const double>(held.data(), held.size()), *context.model, env, *context.samples,
        context.horizon, *context.pool, &batch);
    if (mode == Mode::kUserOnly) {
      d.u_r = d.u_h;
      d.deviation = 0.0;
    }
    if (d.compute_time > dt) ++trial.overrun_ticks;

    TickRecord rec;
    rec.tick = static_cast<std::uint64_t>(k);
    rec.t = t;
    rec.state = x;
    rec.u_h = d.u_h;
    rec.u_r = d.u_r;
    rec.deviation = d.deviation;
    rec.deviation_to_closest_safe = d.deviation_to_closest_safe;
    rec.percent_safe = d.percent_safe;
    rec.n_safe = d.n_safe;
    rec.fallback_used = d.fallback_used;
    rec.input_clamped = d.input_clamped;
    rec.nearest_safe = d.nearest_safe;
    rec.assisted = mode == Mode::kMpmi;
    rec.compute_time = d.compute_time;
    if (options.on_tick) options.on_tick(rec, d, batch);
    trial.ticks.push_back(std::move(rec));

    env.Step(std::span<const double>(x.data(), x.size()),
             std::span<const double>(d.u_r.data(), d.u_r.size()),
             std::span<double>(next.data(), next.size()));
    x.swap(next);
    ++k;
    failed = env.IsFailed(x);

    if (options.real_time) {
      const auto due = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(static_cast<double>(k) * dt));
      WaitUntil(start + due, options.spin_wait);
    }
  }

  if (failed) {
    trial.outcome = Outcome::kFailed;
    trial.duration = static_cast<double>(k) * dt;
    // A failure on the last tick still ends strictly before the cap.
    if (trial.duration >= trial.max_trial_time) {
      trial.duration = std::nextafter(trial.max_trial_time, 0.0);
    }
  } else if (trial.aborted) {
    trial.outcome = Outcome::kSurvived;
    trial.duration = std::min(static_cast<double>(k) * dt, trial.max_trial_time);
  } else {
    trial.outcome = Outcome::kSurvived;
    trial.duration = trial.max_trial_time;
  }
  return trial;
}

}  // namespace mpmi
