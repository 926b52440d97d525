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

#include "mpmi/basis.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>

#include "mpmi/errors.h"

namespace mpmi {

namespace {

std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Upper bound on variables held on the stack during a lift.
constexpr int kMaxVars = 16;

}  // namespace

namespace {

// sin and cos for |x| < 1e6. Branch-free so loops over it vectorize.
inline void SinCosReduced(double x, double& s, double& c) {
  // Cody-Waite reduction to r in [-pi/4, pi/4]; the leading constant has 33
  // significant bits so k * kPio2Hi is exact for |k| < 2^20. Adding 1.5 * 2^52
  // rounds x * 2/pi to the nearest integer and leaves it in the low bits.
  constexpr double kTwoOverPi = 6.36619772367581382433e-01;
  constexpr double kPio2Hi = 1.57079632673412561417e+00;
  constexpr double kPio2Mid = 6.07710050630396597660e-11;
  constexpr double kPio2Lo = 2.02226624871116645580e-21;
  constexpr double kRound = 6755399441055744.0;
  const double t = x * kTwoOverPi + kRound;
  const double k = t - kRound;
  const std::uint64_t q = std::bit_cast<std::uint64_t>(t) & 3;
  const double r = ((x - k * kPio2Hi) - k * kPio2Mid) - k * kPio2Lo;
  const double z = r * r;
  // Minimax polynomials on [-pi/4, pi/4] (fdlibm kernel coefficients).
  const double sp =
      -1.66666666666666324348e-01 +
      z * (8.33333333332248946124e-03 +
           z * (-1.98412698298579493134e-04 +
                z * (2.75573137070700676789e-06 +
                     z * (-2.50507602534068634195e-08 + z * 1.58969099521155010221e-10))));
  const double cp =
      4.16666666666666019037e-02 +
      z * (-1.38888888888741095749e-03 +
           z * (2.48015872894767294178e-05 +
                z * (-2.75573143513906633035e-07 +
                     z * (2.08757232129817482790e-09 + z * -1.13596475577881948265e-11))));
  const double sr = r + r * z * sp;
  const double hz = 0.5 * z;
  const double w = 1.0 - hz;
  const double cr = w + (((1.0 - w) - hz) + z * z * cp);
  // Quadrant q: (sin, cos) = (sr, cr), (cr, -sr), (-sr, -cr), (-cr, sr).
  const double a = (q & 1) ? cr : sr;
  const double b = (q & 1) ? sr : cr;
  s = (q & 2) ? -a : a;
  c = ((q + 1) & 2) ? -b : b;
}

}  // namespace

void SinCos(double x, double* s, double* c) {
  if (!(std::abs(x) < 1e6)) {
    *s = std::sin(x);
    *c = std::cos(x);
    return;
  }
  SinCosReduced(x, *s, *c);
}

BasisFunction BasisFunction::Random(BasisKind kind, std::uint64_t seed, int n_vars,
                                    const std::vector<int>& angle_vars) {
  std::mt19937_64 rng(seed);
  auto pick = [&] { return static_cast<int>(rng() % static_cast<std::uint64_t>(n_vars)); };
  BasisFunction f;
  f.kind = kind;
  f.seed = seed;
  if (kind == BasisKind::kMonomial) {
    const int degree = 2 + static_cast<int>(rng() % 2);
    for (int i = 0; i < degree; ++i) f.vars[i] = pick();
  } else if (kind == BasisKind::kSinusoid) {
    f.vars[0] = angle_vars.empty()
        ? pick()
        : angle_vars[rng() % static_cast<std::uint64_t>(angle_vars.size())];
    f.frequency = 1.0 + static_cast<double>(rng() % 2);
    f.phase = (rng() % 2) ? 0.5 * std::numbers::pi : 0.0;
    const int factors = static_cast<int>(rng() % 3);
    for (int i = 0; i < factors; ++i) f.vars[1 + i] = pick();
  } else {
    throw ConfigError("only monomial and sinusoid features are random");
  }
  return f;
}

std::string BasisFunction::Describe() const {
  std::ostringstream s;
  switch (kind) {
    case BasisKind::kState:
      s << "x" << vars[0];
      break;
    case BasisKind::kControl:
      s << "u" << vars[0];
      break;
    case BasisKind::kConstant:
      s << "1";
      break;
    case BasisKind::kMonomial:
      s << "mono(";
      for (int i = 0; i < 3 && vars[i] >= 0; ++i) s << (i ? "*" : "") << "v" << vars[i];
      s << ")";
      break;
    case BasisKind::kSinusoid:
      s << (phase != 0.0 ? "cos(" : "sin(") << frequency << "*v" << vars[0] << ")";
      for (int i = 1; i < 3 && vars[i] >= 0; ++i) s << "*v" << vars[i];
      break;
  }
  return s.str();
}

BasisSpec BasisSpec::Defaults(const EnvSpec& spec, std::uint64_t seed) {
  BasisSpec b;
  b.state_dim = spec.state_dim();
  b.control_dim = spec.control_dim();
  b.seed = seed;
  const int total = spec.id == EnvId::kBalanceBot ? 50 : 150;
  b.n_monomial = total / 2;
  b.n_sinusoid = total - b.n_monomial;
  if (spec.id == EnvId::kBalanceBot) {
    b.scales = {spec.Param("pitch_limit"), 3.0, spec.Param("v_max")};
    b.angle_vars = {0};
  } else {
    const double r = spec.Param("track_radius");
    b.scales = {r, r, std::numbers::pi, 10.0, 10.0, 5.0};
    b.angle_vars = {2};
  }
  for (const Interval& iv : spec.control_space.intervals()) {
    b.scales.push_back(std::max(std::abs(iv.low), std::abs(iv.high)));
  }
  return b;
}

BasisDictionary::BasisDictionary(BasisSpec spec) : spec_(std::move(spec)) {
  const int n_vars = spec_.state_dim + spec_.control_dim;
  if (spec_.state_dim <= 0 || spec_.control_dim <= 0 || n_vars > kMaxVars) {
    throw ConfigError("basis dimensions out of range");
  }
  if (static_cast<int>(spec_.scales.size()) != n_vars) {
    throw ConfigError("basis needs one scale per state and control variable");
  }
  if (spec_.n_monomial < 0 || spec_.n_sinusoid < 0) throw ConfigError("negative feature count");
  for (int v : spec_.angle_vars) {
    if (v < 0 || v >= n_vars) throw ConfigError("sinusoid argument index out of range");
  }
  for (double s : spec_.scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("basis scales must be positive");
    inv_scales_.push_back(1.0 / s);
  }
  for (int i = 0; i < spec_.state_dim; ++i) {
    BasisFunction f;
    f.kind = BasisKind::kState;
    f.vars[0] = i;
    functions_.push_back(f);
  }
  for (int j = 0; j < spec_.control_dim; ++j) {
    BasisFunction f;
    f.kind = BasisKind::kControl;
    f.vars[0] = spec_.state_dim + j;
    functions_.push_back(f);
  }
  functions_.push_back(BasisFunction{});
  std::uint64_t counter = 0;
  for (int k = 0; k < spec_.n_monomial; ++k) {
    functions_.push_back(
        BasisFunction::Random(BasisKind::kMonomial, SplitMix64(spec_.seed + counter++), n_vars));
  }
  for (int k = 0; k < spec_.n_sinusoid; ++k) {
    functions_.push_back(
        BasisFunction::Random(BasisKind::kSinusoid, SplitMix64(spec_.seed + counter++), n_vars,
                              spec_.angle_vars));
  }
  set_active_mask(std::vector<bool>(functions_.size(), true));
}

void BasisDictionary::set_active_mask(std::vector<bool> mask) {
  if (mask.size() != functions_.size()) throw ConfigError("active mask has the wrong length");
  for (int i = 0; i < exempt_count(); ++i) {
    if (!mask[i]) throw ConfigError("raw state, control and constant entries cannot be pruned");
  }
  mask_ = std::move(mask);
  active_.clear();
  for (int i = 0; i < size(); ++i) {
    if (mask_[i]) active_.push_back(i);
  }
  active_trig_vars_ = TrigVars(true);
  all_trig_vars_ = TrigVars(false);
  const int nv = spec_.state_dim + spec_.control_dim;
  const int one = 6 * nv;
  factors_.clear();
  for (int k : active_) {
    const BasisFunction& f = functions_[k];
    Factors t{one, one, one};
    switch (f.kind) {
      case BasisKind::kState:
      case BasisKind::kControl:
        t[0] = f.vars[0];
        break;
      case BasisKind::kConstant:
        break;
      case BasisKind::kMonomial:
        for (int i = 0; i < 3; ++i) {
          if (f.vars[i] >= 0) t[i] = nv + f.vars[i];
        }
        break;
      case BasisKind::kSinusoid:
        t[0] = 2 * nv + 4 * f.vars[0] + 2 * (f.frequency == 2.0 ? 1 : 0) + (f.phase != 0.0 ? 1 : 0);
        for (int i = 1; i < 3; ++i) {
          if (f.vars[i] >= 0) t[i] = nv + f.vars[i];
        }
        break;
    }
    factors_.push_back(t);
  }
}

std::vector<int> BasisDictionary::TrigVars(bool active_only) const {
  std::vector<bool> used(spec_.state_dim + spec_.control_dim, false);
  for (int k = 0; k < size(); ++k) {
    if (functions_[k].kind == BasisKind::kSinusoid && (!active_only || mask_[k])) {
      used[functions_[k].vars[0]] = true;
    }
  }
  std::vector<int> vars;
  for (int i = 0; i < static_cast<int>(used.size()); ++i) {
    if (used[i]) vars.push_back(i);
  }
  return vars;
}

inline double BasisDictionary::Evaluate(const BasisFunction& f, const double* v, const double* w,
                                        const double* trig) const {
  switch (f.kind) {
    case BasisKind::kState:
    case BasisKind::kControl:
      return v[f.vars[0]];
    case BasisKind::kConstant:
      return 1.0;
    case BasisKind::kMonomial: {
      double p = w[f.vars[0]] * w[f.vars[1]];
      if (f.vars[2] >= 0) p *= w[f.vars[2]];
      return p;
    }
    case BasisKind::kSinusoid: {
      const int slot = 2 * (f.frequency == 2.0 ? 1 : 0) + (f.phase != 0.0 ? 1 : 0);
      double p = trig[4 * f.vars[0] + slot];
      if (f.vars[1] >= 0) p *= w[f.vars[1]];
      if (f.vars[2] >= 0) p *= w[f.vars[2]];
      return p;
    }
  }
  return 0.0;
}

// {sin v, cos v, sin 2v, cos 2v}.
void BasisDictionary::SinCos4(double v, double* out) {
  double s, c;
  SinCos(v, &s, &c);
  out[0] = s;
  out[1] = c;
  out[2] = 2.0 * s * c;
  out[3] = 1.0 - 2.0 * s * s;
}

void BasisDictionary::Lift(const double* x, const double* u, double* out) const {
  const int n = spec_.state_dim;
  const int m = spec_.control_dim;
  const int nv = n + m;
  // Value table: raw [x, u], scaled [x, u], trig block, then 1.
  double vals[6 * kMaxVars + 1];
  for (int i = 0; i < n; ++i) vals[i] = x[i];
  for (int j = 0; j < m; ++j) vals[n + j] = u[j];
  for (int i = 0; i < nv; ++i) vals[nv + i] = vals[i] * inv_scales_[i];
  for (int i : active_trig_vars_) SinCos4(vals[i], vals + 2 * nv + 4 * i);
  vals[6 * nv] = 1.0;
  const int count = active_count();
  const Factors* f = factors_.data();
  for (int k = 0; k < count; ++k) out[k] = (vals[f[k][0]] * vals[f[k][1]]) * vals[f[k][2]];
}

void BasisDictionary::LiftBlock(const double* x, const double* u, double* out) const {
  constexpr int L = kLanes;
  const int n = spec_.state_dim;
  const int m = spec_.control_dim;
  const int nv = n + m;
  alignas(64) double vals[(6 * kMaxVars + 1) * L];
  std::copy(x, x + n * L, vals);
  std::copy(u, u + m * L, vals + n * L);
  for (int i = 0; i < nv; ++i) {
    const double inv = inv_scales_[i];
    for (int l = 0; l < L; ++l) vals[(nv + i) * L + l] = vals[i * L + l] * inv;
  }
  for (int i : active_trig_vars_) {
    const double* v = vals + i * L;
    double* t = vals + (2 * nv + 4 * i) * L;
    for (int l = 0; l < L; ++l) {
      double s, c;
      SinCosReduced(v[l], s, c);
      t[l] = s;
      t[L + l] = c;
      t[2 * L + l] = 2.0 * s * c;
      t[3 * L + l] = 1.0 - 2.0 * s * s;
    }
    for (int l = 0; l < L; ++l) {
      if (!(std::abs(v[l]) < 1e6)) {
        double four[4];
        SinCos4(v[l], four);
        for (int q = 0; q < 4; ++q) t[q * L + l] = four[q];
      }
    }
  }
  for (int l = 0; l < L; ++l) vals[6 * nv * L + l] = 1.0;
  const int count = active_count();
  for (int k = 0; k < count; ++k) {
    const double* a = vals + factors_[k][0] * L;
    const double* b = vals + factors_[k][1] * L;
    const double* c = vals + factors_[k][2] * L;
    double* o = out + k * L;
    for (int l = 0; l < L; ++l) o[l] = (a[l] * b[l]) * c[l];
  }
}

void BasisDictionary::LiftAll(const double* x, const double* u, double* out) const {
  const int n = spec_.state_dim;
  const int m = spec_.control_dim;
  double v[kMaxVars], w[kMaxVars], trig[4 * kMaxVars];
  for (int i = 0; i < n; ++i) v[i] = x[i];
  for (int j = 0; j < m; ++j) v[n + j] = u[j];
  for (int i = 0; i < n + m; ++i) w[i] = v[i] * inv_scales_[i];
  for (int i : all_trig_vars_) SinCos4(v[i], trig + 4 * i);
  for (int k = 0; k < size(); ++k) out[k] = Evaluate(functions_[k], v, w, trig);
}

Eigen::VectorXd BasisDictionary::Lift(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != state_dim() || u.size() != control_dim()) {
    throw DomainError("lift input has the wrong dimension");
  }
  if (!x.allFinite() || !u.allFinite()) throw DomainError("lift input is not finite");
  Eigen::VectorXd out(active_count());
  Lift(x.data(), u.data(), out.data());
  return out;
}

}  // namespace mpmi
