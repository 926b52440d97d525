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

#ifndef MPMI_SCRIPTED_USER_H_
#define MPMI_SCRIPTED_USER_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmi/env_spec.h"
#include "mpmi/session.h"

namespace mpmi {

enum class UserKind { kConstant, kSinusoid, kRandomWalk, kAdversarial, kReplay };

std::string ToString(UserKind kind);
UserKind UserKindFromString(const std::string& name);

struct ScriptedUserSpec {
  UserKind kind = UserKind::kAdversarial;
  // kConstant: the held input (empty = zeros).
  std::vector<double> value;
  // kSinusoid: per-dimension amplitude as a fraction of the half-width of
  // the box, around its center; phases are drawn from the seed.
  double amplitude = 1.0;
  double period = 2.0;
  // kRandomWalk: per-tick step standard deviation, in box half-widths.
  double step_sigma = 0.05;
  // kAdversarial, race car: seconds between steering flips.
  double flip_period = 3.0;
  // kReplay: one comma-separated control vector per line; '#' comments.
  std::string replay_path;
};

// Stand-in for a study participant. Every output lies in the control box.
class ScriptedUser : public InputSource {
 public:
  // Throws ConfigError for unusable parameters, ParseError for a bad replay file.
  ScriptedUser(const ScriptedUserSpec& spec, const EnvSpec& env, std::uint64_t seed);

  InputSample Poll(std::uint64_t tick, double t, const Eigen::VectorXd& state) override;

 private:
  Eigen::VectorXd Adversarial(double t, const Eigen::VectorXd& state) const;

  ScriptedUserSpec spec_;
  EnvSpec env_;
  Eigen::VectorXd center_;
  Eigen::VectorXd half_width_;
  Eigen::VectorXd phases_;
  Eigen::VectorXd walk_;
  double steer_sign_ = 1.0;
  std::mt19937_64 rng_;
  std::vector<Eigen::VectorXd> replay_;
};

// Reads a replay file: rows of control_dim comma-separated numbers.
std::vector<Eigen::VectorXd> ReadReplay(const std::filesystem::path& path, int control_dim);

}  // namespace mpmi

#endif  // MPMI_SCRIPTED_USER_H_
