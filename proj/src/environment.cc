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

#include "mpmi/environment.h"

#include <cmath>
#include <numbers>
#include <random>

#include "mpmi/errors.h"

namespace mpmi {

namespace {

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

bool AllFinite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

Eigen::VectorXd Environment::StepChecked(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != state_dim() || u.size() != control_dim()) {
    throw DomainError("state or control has the wrong dimension for " + ToString(spec_.id));
  }
  if (!x.allFinite() || !u.allFinite()) throw DomainError("non-finite state or control");
  Eigen::VectorXd next(state_dim());
  Step({x.data(), static_cast<std::size_t>(x.size())}, {u.data(), static_cast<std::size_t>(u.size())},
       {next.data(), static_cast<std::size_t>(next.size())});
  return next;
}

BalanceBotEnvironment::BalanceBotEnvironment(EnvSpec spec) : Environment(std::move(spec)) {
  params_ = BalanceBotParams::FromSpec(this->spec());
  safe_pitch_ = params_.pitch_limit - this->spec().inflation_radius;
}

void BalanceBotEnvironment::Step(std::span<const double> x, std::span<const double> u,
                                 std::span<double> next) const {
  StepBalanceBotRaw(x.data(), u[0], dt(), params_, next.data());
}

bool BalanceBotEnvironment::IsSafe(std::span<const double> x) const {
  return std::abs(x[0]) < safe_pitch_ && AllFinite(x);
}

bool BalanceBotEnvironment::IsFailed(std::span<const double> x) const {
  return !(std::abs(x[0]) < params_.pitch_limit) || !AllFinite(x);
}

Eigen::VectorXd BalanceBotEnvironment::InitialState(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd x(3);
  x << Uniform(rng, -0.05, 0.05), Uniform(rng, -0.1, 0.1), 0.0;
  return x;
}

Eigen::VectorXd BalanceBotEnvironment::RandomSafeState(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd x(3);
  x << Uniform(rng, -0.8, 0.8) * safe_pitch_, Uniform(rng, -1.5, 1.5),
      Uniform(rng, -1.0, 1.0) * params_.v_max;
  return x;
}

Eigen::VectorXd BalanceBotEnvironment::StateScale() const {
  Eigen::VectorXd s(3);
  s << params_.pitch_limit, 3.0, params_.v_max;
  return s;
}

std::vector<std::string> BalanceBotEnvironment::StateNames() const {
  return mpmi::StateNames(EnvId::kBalanceBot);
}

TrackParams TrackParamsFromSpec(const EnvSpec& spec) {
  TrackParams t;
  t.radius = spec.Param("track_radius");
  t.noise = spec.Param("track_noise");
  t.checkpoints = static_cast<int>(std::lround(spec.Param("track_checkpoints")));
  t.half_width = spec.Param("half_width");
  return t;
}

RaceCarEnvironment::RaceCarEnvironment(EnvSpec spec, std::uint64_t track_seed)
    : Environment(std::move(spec)) {
  params_ = RaceCarParams::FromSpec(this->spec());
  track_ = GenerateTrack(track_seed, TrackParamsFromSpec(this->spec()));
  index_ = CenterlineIndex(track_, track_.half_width);
  safe_distance_ = track_.half_width - this->spec().inflation_radius;
}

void RaceCarEnvironment::Step(std::span<const double> x, std::span<const double> u,
                              std::span<double> next) const {
  StepRaceCarRaw(x.data(), u.data(), dt(), params_, next.data());
}

bool RaceCarEnvironment::IsSafe(std::span<const double> x) const {
  return index_.Distance(x[0], x[1]) < safe_distance_ && AllFinite(x);
}

bool RaceCarEnvironment::IsFailed(std::span<const double> x) const {
  return !(index_.Distance(x[0], x[1]) < track_.half_width) || !AllFinite(x);
}

Eigen::VectorXd RaceCarEnvironment::StateOnCenterline(std::size_t waypoint, double lateral,
                                                      double heading_noise, double speed) const {
  const auto& c = track_.centerline;
  const auto& a = c[waypoint];
  const auto& b = c[waypoint + 1];
  const double heading = std::atan2(b[1] - a[1], b[0] - a[0]);
  const double nx = -std::sin(heading);
  const double ny = std::cos(heading);
  const double h = heading + heading_noise;
  Eigen::VectorXd x(6);
  x << a[0] + lateral * nx, a[1] + lateral * ny, h, speed * std::cos(h), speed * std::sin(h),
      RaceCarYawRate(speed, 0.0, params_);
  return x;
}

Eigen::VectorXd RaceCarEnvironment::InitialState(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const double lateral = Uniform(rng, -0.3, 0.3);
  const double heading = Uniform(rng, -0.05, 0.05);
  const double speed = spec().Param("start_speed") * (1.0 + Uniform(rng, -0.1, 0.1));
  return StateOnCenterline(0, lateral, heading, speed);
}

Eigen::VectorXd RaceCarEnvironment::RandomSafeState(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const std::size_t segments = track_.centerline.size() - 1;
  const auto waypoint = static_cast<std::size_t>(rng() % segments);
  const double lateral = Uniform(rng, -0.8, 0.8) * safe_distance_;
  const double heading = Uniform(rng, -0.4, 0.4);
  const double speed = Uniform(rng, 0.0, 12.0);
  return StateOnCenterline(waypoint, lateral, heading, speed);
}

Eigen::VectorXd RaceCarEnvironment::StateScale() const {
  const double r = spec().Param("track_radius");
  Eigen::VectorXd s(6);
  s << r, r, std::numbers::pi, 10.0, 10.0, 5.0;
  return s;
}

std::vector<std::string> RaceCarEnvironment::StateNames() const {
  return mpmi::StateNames(EnvId::kRaceCar);
}

AlwaysSafeEnvironment::AlwaysSafeEnvironment(std::shared_ptr<const Environment> inner)
    : Environment(inner->spec()), inner_(std::move(inner)) {}

bool AlwaysSafeEnvironment::IsSafe(std::span<const double> x) const { return AllFinite(x); }

bool AlwaysSafeEnvironment::IsFailed(std::span<const double> x) const { return !AllFinite(x); }

std::shared_ptr<const Environment> MakeEnvironment(const EnvSpec& spec, std::uint64_t seed,
                                                   bool always_safe) {
  spec.Validate();
  std::shared_ptr<const Environment> env;
  if (spec.id == EnvId::kBalanceBot) {
    env = std::make_shared<BalanceBotEnvironment>(spec);
  } else {
    env = std::make_shared<RaceCarEnvironment>(spec, seed);
  }
  if (always_safe) env = std::make_shared<AlwaysSafeEnvironment>(std::move(env));
  return env;
}

}  // namespace mpmi
