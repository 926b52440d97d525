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

#ifndef MPMI_BASIS_H_
#define MPMI_BASIS_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmi/env_spec.h"
#include "mpmi/lanes.h"

namespace mpmi {

enum class BasisKind { kState, kControl, kConstant, kMonomial, kSinusoid };

// One scalar function of (state, control). Variables are indexed over the
// concatenation [x, u]; factors use values divided by the dictionary scales,
// sinusoid arguments use raw values.
struct BasisFunction {
  BasisKind kind = BasisKind::kConstant;
  // Raw entries: the variable index. Monomial: 2 or 3 factor indices.
  // Sinusoid: vars[0] is the argument, vars[1..2] optional factors.
  std::array<int, 3> vars{-1, -1, -1};
  // Sinusoid only: frequency 1 or 2, phase 0 (sine) or pi/2 (cosine).
  double frequency = 0.0;
  double phase = 0.0;
  // Random features are rebuilt from (kind, seed, variable count) alone.
  std::uint64_t seed = 0;

  // Sinusoid arguments are drawn from `angle_vars` (all variables if empty).
  static BasisFunction Random(BasisKind kind, std::uint64_t seed, int n_vars,
                              const std::vector<int>& angle_vars = {});
  std::string Describe() const;
};

// Sine and cosine together, within a few ulp of std::sin/std::cos and
// identical on every platform with IEEE doubles. Sinusoid features use it.
void SinCos(double x, double* s, double* c);

struct BasisSpec {
  int state_dim = 0;
  int control_dim = 0;
  std::uint64_t seed = 1;
  int n_monomial = 0;
  int n_sinusoid = 0;
  // One per variable of [x, u].
  std::vector<double> scales;
  // Variables that may appear inside a sinusoid (empty: any).
  std::vector<int> angle_vars;

  // 50 random features for the balance bot, 150 for the race car, split
  // evenly between monomials and sinusoids; scales from the simulator.
  // Sinusoids take pitch (balance bot) or heading (race car) as argument.
  static BasisSpec Defaults(const EnvSpec& spec, std::uint64_t seed);
};

// Ordered dictionary: raw state entries, raw control entries, the constant,
// then random features. The first state_dim + control_dim + 1 entries are
// never deactivated, so the raw state is always a projection of the lift.
class BasisDictionary {
 public:
  BasisDictionary() = default;
  explicit BasisDictionary(BasisSpec spec);

  const BasisSpec& spec() const { return spec_; }
  int state_dim() const { return spec_.state_dim; }
  int control_dim() const { return spec_.control_dim; }
  int exempt_count() const { return spec_.state_dim + spec_.control_dim + 1; }
  int size() const { return static_cast<int>(functions_.size()); }
  int active_count() const { return static_cast<int>(active_.size()); }

  const std::vector<BasisFunction>& functions() const { return functions_; }
  const std::vector<bool>& active_mask() const { return mask_; }
  // Indices (into functions()) of the active entries, in order.
  const std::vector<int>& active_indices() const { return active_; }
  // Throws ConfigError if an exempt entry is switched off.
  void set_active_mask(std::vector<bool> mask);

  // Evaluates the active functions into `out` (length active_count()).
  void Lift(const double* x, const double* u, double* out) const;
  // Lift for kLanes points at once, block layout (see lanes.h). Lane results
  // equal Lift's bit for bit.
  void LiftBlock(const double* x, const double* u, double* out) const;
  // Evaluates every function, ignoring the mask (length size()).
  void LiftAll(const double* x, const double* u, double* out) const;
  // Checked: dimensions and finiteness, throws DomainError.
  Eigen::VectorXd Lift(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

 private:
  double Evaluate(const BasisFunction& f, const double* v, const double* w,
                  const double* trig) const;
  static void SinCos4(double v, double* out);
  std::vector<int> TrigVars(bool active_only) const;

  BasisSpec spec_;
  std::vector<BasisFunction> functions_;
  std::vector<bool> mask_;
  std::vector<int> active_;
  std::vector<double> inv_scales_;
  // Variables whose sine and cosine the (active) sinusoids read.
  std::vector<int> active_trig_vars_;
  std::vector<int> all_trig_vars_;
  // Each active entry as a product of three value-table slots.
  using Factors = std::array<int, 3>;
  std::vector<Factors> factors_;
};

}  // namespace mpmi

#endif  // MPMI_BASIS_H_
