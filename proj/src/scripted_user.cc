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

#include "mpmi/scripted_user.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include "mpmi/errors.h"

namespace mpmi {

namespace {

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Portable standard normal (Box-Muller on the 53-bit uniforms above).
double Normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - Uniform01(rng);
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::string ToString(UserKind kind) {
  switch (kind) {
    case UserKind::kConstant: return "constant";
    case UserKind::kSinusoid: return "sinusoid";
    case UserKind::kRandomWalk: return "random_walk";
    case UserKind::kAdversarial: return "adversarial";
    case UserKind::kReplay: return "replay";
  }
  return "";
}

UserKind UserKindFromString(const std::string& name) {
  for (UserKind k : {UserKind::kConstant, UserKind::kSinusoid, UserKind::kRandomWalk,
                     UserKind::kAdversarial, UserKind::kReplay}) {
    if (ToString(k) == name) return k;
  }
  throw ConfigError("unknown scripted user kind '" + name + "'");
}

std::vector<Eigen::VectorXd> ReadReplay(const std::filesystem::path& path, int control_dim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open replay file " + path.string(), 0);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    Eigen::VectorXd u(control_dim);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int j = 0; j < control_dim; ++j) {
      while (p < end && *p == ' ') ++p;
      auto [next, ec] = std::from_chars(p, end, u[j]);
      if (ec != std::errc() || !std::isfinite(u[j])) {
        throw ParseError("replay row has a bad number", line_no);
      }
      p = next;
      while (p < end && *p == ' ') ++p;
      if (j + 1 < control_dim) {
        if (p == end || *p != ',') throw ParseError("replay row is too short", line_no);
        ++p;
      }
    }
    if (p != end) throw ParseError("replay row is too long", line_no);
    rows.push_back(std::move(u));
  }
  if (rows.empty()) throw ParseError("replay file has no rows", line_no);
  return rows;
}

ScriptedUser::ScriptedUser(const ScriptedUserSpec& spec, const EnvSpec& env, std::uint64_t seed)
    : spec_(spec), env_(env), rng_(seed) {
  const int m = env.control_dim();
  center_.resize(m);
  half_width_.resize(m);
  for (int j = 0; j < m; ++j) {
    const Interval& iv = env.control_space.intervals()[j];
    center_[j] = 0.5 * (iv.low + iv.high);
    half_width_[j] = 0.5 * (iv.high - iv.low);
  }
  phases_.resize(m);
  for (int j = 0; j < m; ++j) phases_[j] = 2.0 * std::numbers::pi * Uniform01(rng_);
  walk_ = env.control_space.Clamp(Eigen::VectorXd::Zero(m));
  steer_sign_ = (rng_() & 1) ? 1.0 : -1.0;
  switch (spec_.kind) {
    case UserKind::kConstant:
      if (!spec_.value.empty() && static_cast<int>(spec_.value.size()) != m) {
        throw ConfigError("constant user value needs one entry per control dimension");
      }
      break;
    case UserKind::kSinusoid:
      if (!(spec_.period > 0.0)) throw ConfigError("sinusoid period must be positive");
      break;
    case UserKind::kRandomWalk:
      if (!(spec_.step_sigma >= 0.0)) throw ConfigError("random walk step must be >= 0");
      break;
    case UserKind::kAdversarial:
      if (!(spec_.flip_period > 0.0)) throw ConfigError("flip period must be positive");
      break;
    case UserKind::kReplay:
      replay_ = ReadReplay(spec_.replay_path, m);
      break;
  }
}

Eigen::VectorXd ScriptedUser::Adversarial(double t, const Eigen::VectorXd& state) const {
  Eigen::VectorXd u(env_.control_dim());
  if (env_.id == EnvId::kBalanceBot) {
    // Full-scale push in the direction the bot is already falling.
    const double lean = state[0] + 0.2 * state[1];
    u[0] = lean >= 0.0 ? -1.0 : 1.0;
  } else {
    const long flips = static_cast<long>(std::floor(t / spec_.flip_period));
    u[0] = (flips % 2 == 0) ? steer_sign_ : -steer_sign_;
    u[1] = 1.0;
    u[2] = 0.0;
  }
  return u;
}

InputSample ScriptedUser::Poll(std::uint64_t tick, double t, const Eigen::VectorXd& state) {
  const int m = env_.control_dim();
  Eigen::VectorXd u(m);
  switch (spec_.kind) {
    case UserKind::kConstant:
      u = spec_.value.empty() ? Eigen::VectorXd::Zero(m)
                              : Eigen::Map<const Eigen::VectorXd>(spec_.value.data(), m).eval();
      break;
    case UserKind::kSinusoid:
      for (int j = 0; j < m; ++j) {
        u[j] = center_[j] + spec_.amplitude * half_width_[j] *
                                std::sin(2.0 * std::numbers::pi * t / spec_.period + phases_[j]);
      }
      break;
    case UserKind::kRandomWalk:
      for (int j = 0; j < m; ++j) walk_[j] += spec_.step_sigma * half_width_[j] * Normal(rng_);
      walk_ = env_.control_space.Clamp(walk_);
      u = walk_;
      break;
    case UserKind::kAdversarial:
      u = Adversarial(t, state);
      break;
    case UserKind::kReplay:
      u = replay_[std::min<std::size_t>(tick, replay_.size() - 1)];
      break;
  }
  InputSample sample;
  sample.u_h = env_.control_space.Clamp(u);
  return sample;
}

}  // namespace mpmi
