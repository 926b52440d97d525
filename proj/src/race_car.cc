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

#include "mpmi/race_car.h"

#include <algorithm>
#include <cmath>

#include "mpmi/errors.h"

namespace mpmi {

double RaceCarState::forward_speed() const {
  return vx * std::cos(heading) + vy * std::sin(heading);
}

RaceCarParams RaceCarParams::FromSpec(const EnvSpec& spec) {
  RaceCarParams p;
  p.delta_max = spec.Param("delta_max");
  p.a_gas = spec.Param("a_gas");
  p.a_brake = spec.Param("a_brake");
  p.wheelbase = spec.Param("wheelbase");
  p.mu = spec.Param("mu");
  p.gravity = spec.Param("gravity");
  return p;
}

double RaceCarYawRate(double speed, double steer, const RaceCarParams& p, bool* slipping) {
  const double kinematic = speed * std::tan(steer * p.delta_max) / p.wheelbase;
  const double lateral = std::abs(speed * kinematic);
  const double limit = p.mu * p.gravity;
  if (lateral > limit) {
    if (slipping) *slipping = true;
    return kinematic * (limit / lateral);
  }
  if (slipping) *slipping = false;
  return kinematic;
}

namespace {

// q = (x, y, heading, speed)
inline void Derivative(const double* q, const double* u, const RaceCarParams& p,
                       double* dq) {
  double accel = u[1] * p.a_gas + u[2] * p.a_brake;
  if (q[3] <= 0.0 && accel < 0.0) accel = 0.0;
  dq[0] = q[3] * std::cos(q[2]);
  dq[1] = q[3] * std::sin(q[2]);
  dq[2] = RaceCarYawRate(q[3], u[0], p);
  dq[3] = accel;
}

}  // namespace

void StepRaceCarRaw(const double* x, const double* u, double dt, const RaceCarParams& p,
                    double* next) {
  const double speed = x[3] * std::cos(x[2]) + x[4] * std::sin(x[2]);
  const double q[4] = {x[0], x[1], x[2], speed};
  double k1[4], k2[4], k3[4], k4[4], tmp[4];
  Derivative(q, u, p, k1);
  for (int i = 0; i < 4; ++i) tmp[i] = q[i] + 0.5 * dt * k1[i];
  Derivative(tmp, u, p, k2);
  for (int i = 0; i < 4; ++i) tmp[i] = q[i] + 0.5 * dt * k2[i];
  Derivative(tmp, u, p, k3);
  for (int i = 0; i < 4; ++i) tmp[i] = q[i] + dt * k3[i];
  Derivative(tmp, u, p, k4);
  double out[4];
  for (int i = 0; i < 4; ++i) {
    out[i] = q[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  // Braking stops the car; it never reverses it.
  if (out[3] < 0.0 && speed >= 0.0) out[3] = 0.0;
  next[0] = out[0];
  next[1] = out[1];
  next[2] = out[2];
  next[3] = out[3] * std::cos(out[2]);
  next[4] = out[3] * std::sin(out[2]);
  next[5] = RaceCarYawRate(out[3], u[0], p);
}

RaceCarStep StepRaceCar(const RaceCarState& state, std::span<const double> u, double dt,
                        const RaceCarParams& params) {
  const auto x = state.ToArray();
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("race car state is not finite");
  }
  if (u.size() != 3) throw DomainError("race car control must have 3 components");
  for (double v : u) {
    if (!std::isfinite(v)) throw DomainError("race car control is not finite");
  }
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  double next[6];
  StepRaceCarRaw(x.data(), u.data(), dt, params, next);
  RaceCarStep out;
  out.state = RaceCarState::FromSpan(next);
  const double speed = out.state.forward_speed();
  RaceCarYawRate(speed, u[0], params, &out.slipping);
  return out;
}

}  // namespace mpmi
