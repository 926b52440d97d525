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

#ifndef MPMI_ENV_SPEC_H_
#define MPMI_ENV_SPEC_H_

#include <map>
#include <string>
#include <vector>

#include "mpmi/sampling.h"

namespace mpmi {

enum class EnvId { kBalanceBot, kRaceCar };

std::string ToString(EnvId id);
// Throws ConfigError on an unknown name.
EnvId EnvIdFromString(const std::string& name);

std::vector<std::string> StateNames(EnvId id);
std::vector<std::string> ControlNames(EnvId id);

// Immutable description of one experimental environment.
struct EnvSpec {
  EnvId id = EnvId::kBalanceBot;
  double dt = 0.01;
  ControlSpace control_space;
  std::map<std::string, double> physics;
  // Radians of pitch for the balance bot, meters of track distance for the car.
  double inflation_radius = 0.0;
  double max_trial_time = 0.0;

  // Stand-in parameters for each environment; see README for their meaning.
  static EnvSpec Defaults(EnvId id);

  // Physics value or ConfigError naming the missing key.
  double Param(const std::string& key) const;

  // dt > 0, inflation >= 0, control box matching the environment, and every
  // physics key known and finite.
  void Validate() const;

  int state_dim() const { return id == EnvId::kBalanceBot ? 3 : 6; }
  int control_dim() const { return control_space.dims(); }
  // Loop ticks in a full-length trial.
  long max_ticks() const;
};

}  // namespace mpmi

#endif  // MPMI_ENV_SPEC_H_
