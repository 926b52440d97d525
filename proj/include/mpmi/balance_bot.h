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

#ifndef MPMI_BALANCE_BOT_H_
#define MPMI_BALANCE_BOT_H_

#include <array>
#include <span>

#include "mpmi/env_spec.h"

namespace mpmi {

// Observation of the two-wheeled balance bot.
struct BalanceBotState {
  double pitch = 0.0;       // rad, body angle from vertical
  double pitch_rate = 0.0;  // rad/s
  double speed = 0.0;       // m/s, wheel base linear velocity

  std::array<double, 3> ToArray() const { return {pitch, pitch_rate, speed}; }
  static BalanceBotState FromSpan(std::span<const double> x) { return {x[0], x[1], x[2]}; }
};

struct BalanceBotParams {
  double gravity = 9.81;
  double length = 0.5;
  double v_max = 2.0;
  double tau = 0.15;
  double a_max = 8.0;
  double damping = 0.05;
  double pitch_limit = 0.6;

  static BalanceBotParams FromSpec(const EnvSpec& spec);
};

// Planar wheeled inverted pendulum. The command sets a wheel target speed
// u * v_max; the base follows it through a first-order lag with saturated
// acceleration, and the body responds to gravity and base acceleration:
//
//   a      = clamp((u v_max - v) / tau, -a_max, a_max)
//   pitch" = (g sin(pitch) - a cos(pitch)) / L - damping * pitch'
//
// Advanced with one classical RK4 step. Throws DomainError on non-finite
// input or dt <= 0.
BalanceBotState StepBalanceBot(const BalanceBotState& state, double u, double dt,
                               const BalanceBotParams& params);

// Unchecked variant used inside rollouts.
void StepBalanceBotRaw(const double* x, double u, double dt, const BalanceBotParams& p,
                       double* next);

// Conserved quantity of the undamped, unactuated pendulum (per unit mass and
// length^2): pitch'^2 / 2 + (g / L) cos(pitch).
double BalanceBotEnergy(const BalanceBotState& state, const BalanceBotParams& params);

}  // namespace mpmi

#endif  // MPMI_BALANCE_BOT_H_
