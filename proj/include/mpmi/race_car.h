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

#ifndef MPMI_RACE_CAR_H_
#define MPMI_RACE_CAR_H_

#include <array>
#include <span>

#include "mpmi/env_spec.h"

namespace mpmi {

// World-frame pose and velocities of the car.
struct RaceCarState {
  double x = 0.0;             // m
  double y = 0.0;             // m
  double heading = 0.0;       // rad
  double vx = 0.0;            // m/s
  double vy = 0.0;            // m/s
  double heading_rate = 0.0;  // rad/s

  std::array<double, 6> ToArray() const { return {x, y, heading, vx, vy, heading_rate}; }
  static RaceCarState FromSpan(std::span<const double> s) {
    return {s[0], s[1], s[2], s[3], s[4], s[5]};
  }
  // Speed along the heading.
  double forward_speed() const;
};

struct RaceCarParams {
  double delta_max = 0.5;
  double a_gas = 6.0;
  double a_brake = 10.0;
  double wheelbase = 0.3;
  double mu = 1.0;
  double gravity = 9.81;

  static RaceCarParams FromSpec(const EnvSpec& spec);
};

struct RaceCarStep {
  RaceCarState state;
  // Lateral acceleration demand exceeded the friction limit, so the yaw rate
  // in `state` is below the kinematic value.
  bool slipping = false;
};

// Yaw rate produced by forward speed and steering command, after the friction
// limit. `slipping` reports whether the limit was active.
double RaceCarYawRate(double speed, double steer, const RaceCarParams& p,
                      bool* slipping = nullptr);

// Friction-limited kinematic bicycle. Steering angle u0 * delta_max,
// longitudinal acceleration u1 * a_gas + u2 * a_brake (braking never drives
// the car backwards). The kinematic yaw rate v tan(delta) / wheelbase is
// scaled down whenever v * yaw_rate would exceed mu * g. One RK4 step over
// (x, y, heading, speed). Throws DomainError on non-finite input or dt <= 0.
RaceCarStep StepRaceCar(const RaceCarState& state, std::span<const double> u, double dt,
                        const RaceCarParams& params);

// Unchecked variant used inside rollouts.
void StepRaceCarRaw(const double* x, const double* u, double dt, const RaceCarParams& p,
                    double* next);

}  // namespace mpmi

#endif  // MPMI_RACE_CAR_H_
