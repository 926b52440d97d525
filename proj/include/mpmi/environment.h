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

#ifndef MPMI_ENVIRONMENT_H_
#define MPMI_ENVIRONMENT_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmi/balance_bot.h"
#include "mpmi/env_spec.h"
#include "mpmi/race_car.h"
#include "mpmi/track.h"

namespace mpmi {

// Ground-truth simulator plus safety geometry for one trial. Instances are
// immutable after construction and may be shared across threads.
class Environment {
 public:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}
  virtual ~Environment() = default;

  const EnvSpec& spec() const { return spec_; }
  int state_dim() const { return spec_.state_dim(); }
  int control_dim() const { return spec_.control_dim(); }
  double dt() const { return spec_.dt; }

  // One integration step; unchecked, callers validate at the boundary.
  virtual void Step(std::span<const double> x, std::span<const double> u,
                    std::span<double> next) const = 0;
  // Inside the inflated barrier (strict). False for non-finite states.
  virtual bool IsSafe(std::span<const double> x) const = 0;
  // Outside the natural barrier; ends a trial. IsFailed implies !IsSafe.
  virtual bool IsFailed(std::span<const double> x) const = 0;
  // Seeded initial condition near upright or near the track start.
  virtual Eigen::VectorXd InitialState(std::uint64_t seed) const = 0;
  // Random state inside the safe set, for data collection.
  virtual Eigen::VectorXd RandomSafeState(std::uint64_t seed) const = 0;
  // Characteristic magnitude of each state component.
  virtual Eigen::VectorXd StateScale() const = 0;
  virtual std::vector<std::string> StateNames() const = 0;

  // Checked step for callers outside the hot path.
  Eigen::VectorXd StepChecked(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  bool IsSafe(const Eigen::VectorXd& x) const { return IsSafe(std::span<const double>(x.data(), x.size())); }
  bool IsFailed(const Eigen::VectorXd& x) const { return IsFailed(std::span<const double>(x.data(), x.size())); }

 private:
  EnvSpec spec_;
};

class BalanceBotEnvironment : public Environment {
 public:
  explicit BalanceBotEnvironment(EnvSpec spec);

  const BalanceBotParams& params() const { return params_; }

  void Step(std::span<const double> x, std::span<const double> u,
            std::span<double> next) const override;
  bool IsSafe(std::span<const double> x) const override;
  bool IsFailed(std::span<const double> x) const override;
  Eigen::VectorXd InitialState(std::uint64_t seed) const override;
  Eigen::VectorXd RandomSafeState(std::uint64_t seed) const override;
  Eigen::VectorXd StateScale() const override;
  std::vector<std::string> StateNames() const override;

 private:
  BalanceBotParams params_;
  double safe_pitch_ = 0.0;
};

class RaceCarEnvironment : public Environment {
 public:
  // The track is generated from `track_seed`.
  RaceCarEnvironment(EnvSpec spec, std::uint64_t track_seed);

  const Track& track() const { return track_; }
  const RaceCarParams& params() const { return params_; }
  // Distance from (x, y) to the centerline; +infinity beyond half_width.
  double CenterlineDistance(double x, double y) const { return index_.Distance(x, y); }

  void Step(std::span<const double> x, std::span<const double> u,
            std::span<double> next) const override;
  bool IsSafe(std::span<const double> x) const override;
  bool IsFailed(std::span<const double> x) const override;
  Eigen::VectorXd InitialState(std::uint64_t seed) const override;
  Eigen::VectorXd RandomSafeState(std::uint64_t seed) const override;
  Eigen::VectorXd StateScale() const override;
  std::vector<std::string> StateNames() const override;

 private:
  Eigen::VectorXd StateOnCenterline(std::size_t waypoint, double lateral, double heading_noise,
                                    double speed) const;

  RaceCarParams params_;
  Track track_;
  CenterlineIndex index_;
  double safe_distance_ = 0.0;
};

// Wraps an environment and declares every finite state safe and none failed.
// Test stand-in for the minimal-intervention pass-through properties.
class AlwaysSafeEnvironment : public Environment {
 public:
  explicit AlwaysSafeEnvironment(std::shared_ptr<const Environment> inner);

  void Step(std::span<const double> x, std::span<const double> u,
            std::span<double> next) const override {
    inner_->Step(x, u, next);
  }
  bool IsSafe(std::span<const double> x) const override;
  bool IsFailed(std::span<const double> x) const override;
  Eigen::VectorXd InitialState(std::uint64_t seed) const override { return inner_->InitialState(seed); }
  Eigen::VectorXd RandomSafeState(std::uint64_t seed) const override { return inner_->RandomSafeState(seed); }
  Eigen::VectorXd StateScale() const override { return inner_->StateScale(); }
  std::vector<std::string> StateNames() const override { return inner_->StateNames(); }

 private:
  std::shared_ptr<const Environment> inner_;
};

// Builds the environment for one trial; `seed` picks the race track.
std::shared_ptr<const Environment> MakeEnvironment(const EnvSpec& spec, std::uint64_t seed,
                                                   bool always_safe = false);

TrackParams TrackParamsFromSpec(const EnvSpec& spec);

}  // namespace mpmi

#endif  // MPMI_ENVIRONMENT_H_
