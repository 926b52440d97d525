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

#include "mpmi/balance_bot.h"

#include <algorithm>
#include <cmath>

#include "mpmi/errors.h"

namespace mpmi {

BalanceBotParams BalanceBotParams::FromSpec(const EnvSpec& spec) {
  BalanceBotParams p;
  p.gravity = spec.Param("gravity");
  p.length = spec.Param("length");
  p.v_max = spec.Param("v_max");
  p.tau = spec.Param("tau");
  p.a_max = spec.Param("a_max");
  p.damping = spec.Param("damping");
  p.pitch_limit = spec.Param("pitch_limit");
  return p;
}

namespace {

inline void Derivative(const double* x, double v_cmd, const BalanceBotParams& p,
                       double* dx) {
  const double a = std::clamp((v_cmd - x[2]) / p.tau, -p.a_max, p.a_max);
  dx[0] = x[1];
  dx[1] = (p.gravity * std::sin(x[0]) - a * std::cos(x[0])) / p.length - p.damping * x[1];
  dx[2] = a;
}

}  // namespace

void StepBalanceBotRaw(const double* x, double u, double dt, const BalanceBotParams& p,
                       double* next) {
  const double v_cmd = u * p.v_max;
  double k1[3], k2[3], k3[3], k4[3], tmp[3];
  Derivative(x, v_cmd, p, k1);
  for (int i = 0; i < 3; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  Derivative(tmp, v_cmd, p, k2);
  for (int i = 0; i < 3; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  Derivative(tmp, v_cmd, p, k3);
  for (int i = 0; i < 3; ++i) tmp[i] = x[i] + dt * k3[i];
  Derivative(tmp, v_cmd, p, k4);
  for (int i = 0; i < 3; ++i) {
    next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

BalanceBotState StepBalanceBot(const BalanceBotState& state, double u, double dt,
                               const BalanceBotParams& params) {
  const auto x = state.ToArray();
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("balance bot state is not finite");
  }
  if (!std::isfinite(u)) throw DomainError("balance bot control is not finite");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  double next[3];
  StepBalanceBotRaw(x.data(), u, dt, params, next);
  return {next[0], next[1], next[2]};
}

double BalanceBotEnergy(const BalanceBotState& state, const BalanceBotParams& params) {
  return 0.5 * state.pitch_rate * state.pitch_rate +
         params.gravity / params.length * std::cos(state.pitch);
}

}  // namespace mpmi
