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

#include "mpmi/koopman.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mpmi/errors.h"

namespace mpmi {

KoopmanModel::KoopmanModel(EnvId env, BasisDictionary basis, Eigen::MatrixXd k, double dt)
    : env_(env), basis_(std::move(basis)), k_(std::move(k)), dt_(dt) {
  const int d = basis_.active_count();
  if (k_.rows() != d || k_.cols() != d) {
    throw ConfigError("Koopman matrix is " + std::to_string(k_.rows()) + "x" +
                      std::to_string(k_.cols()) + " but the basis has " + std::to_string(d) +
                      " active functions");
  }
  if (!k_.allFinite()) throw DomainError("Koopman matrix has non-finite entries");
  const int n = basis_.state_dim();
  state_rows_.resize(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) state_rows_[static_cast<std::size_t>(i) * d + j] = k_(i, j);
  }
  stats_.retained_count = d;
}

void KoopmanModel::Predict(const double* x, const double* u, double* next,
                           double* scratch) const {
  basis_.Lift(x, u, scratch);
  const int n = basis_.state_dim();
  const int d = basis_.active_count();
  const double* row = state_rows_.data();
  // Four partial sums in a fixed order: shorter dependency chains, same
  // result on every call.
  for (int i = 0; i < n; ++i, row += d) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    int j = 0;
    for (; j + 4 <= d; j += 4) {
      a0 += row[j] * scratch[j];
      a1 += row[j + 1] * scratch[j + 1];
      a2 += row[j + 2] * scratch[j + 2];
      a3 += row[j + 3] * scratch[j + 3];
    }
    for (; j < d; ++j) a0 += row[j] * scratch[j];
    next[i] = (a0 + a1) + (a2 + a3);
  }
}

void KoopmanModel::PredictBlock(const double* x, const double* u, double* next,
                                double* scratch) const {
  constexpr int L = kLanes;
  basis_.LiftBlock(x, u, scratch);
  const int n = basis_.state_dim();
  const int d = basis_.active_count();
  const double* row = state_rows_.data();
  // Same partial-sum order as Predict, per lane.
  for (int i = 0; i < n; ++i, row += d) {
    double a0[L] = {}, a1[L] = {}, a2[L] = {}, a3[L] = {};
    int j = 0;
    for (; j + 4 <= d; j += 4) {
      const double* s0 = scratch + j * L;
      for (int l = 0; l < L; ++l) {
        a0[l] += row[j] * s0[l];
        a1[l] += row[j + 1] * s0[L + l];
        a2[l] += row[j + 2] * s0[2 * L + l];
        a3[l] += row[j + 3] * s0[3 * L + l];
      }
    }
    for (; j < d; ++j) {
      for (int l = 0; l < L; ++l) a0[l] += row[j] * scratch[j * L + l];
    }
    for (int l = 0; l < L; ++l) next[i * L + l] = (a0[l] + a1[l]) + (a2[l] + a3[l]);
  }
}

Eigen::VectorXd KoopmanModel::Predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != state_dim() || u.size() != control_dim()) {
    throw DomainError("prediction input has the wrong dimension");
  }
  if (!x.allFinite() || !u.allFinite()) throw DomainError("prediction input is not finite");
  Eigen::VectorXd scratch(lifted_dim()), next(state_dim());
  Predict(x.data(), u.data(), next.data(), scratch.data());
  return next;
}

namespace {

void CheckCompatible(const Dataset& data, const BasisDictionary& basis) {
  if (data.empty()) throw ConfigError("dataset is empty");
  if (data.state_dim() != basis.state_dim() || data.control_dim() != basis.control_dim()) {
    throw ConfigError("dataset dimensions do not match the basis");
  }
}

// Sufficient statistics of the least-squares problem over the whole
// dictionary, so refits on any active subset are sub-block solves.
struct LiftedProblem {
  long n = 0;
  Eigen::MatrixXd gram;   // sum psi psi^T over sources
  Eigen::MatrixXd cross;  // sum psi(source) psi(target)^T
  Eigen::VectorXd rms;    // per-function rms over sources
  Eigen::VectorXd delta_rms;  // per-state rms of the one-step change
};

LiftedProblem BuildProblem(const Dataset& data, const BasisDictionary& basis) {
  const int full = basis.size();
  const int n_state = basis.state_dim();
  LiftedProblem p;
  p.n = static_cast<long>(data.size());
  p.gram = Eigen::MatrixXd::Zero(full, full);
  p.cross = Eigen::MatrixXd::Zero(full, full);
  p.delta_rms = Eigen::VectorXd::Zero(n_state);
  constexpr std::size_t kChunk = 4096;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xs, ys;
  for (std::size_t begin = 0; begin < data.size(); begin += kChunk) {
    const std::size_t rows = std::min(kChunk, data.size() - begin);
    xs.resize(static_cast<Eigen::Index>(rows), full);
    ys.resize(static_cast<Eigen::Index>(rows), full);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t t = begin + r;
      basis.LiftAll(data.state(t).data(), data.control(t).data(), xs.row(r).data());
      basis.LiftAll(data.next_state(t).data(), data.control(t).data(), ys.row(r).data());
      for (int i = 0; i < n_state; ++i) {
        const double dx = data.next_state(t)[i] - data.state(t)[i];
        p.delta_rms[i] += dx * dx;
      }
    }
    p.gram.noalias() += xs.transpose() * xs;
    p.cross.noalias() += xs.transpose() * ys;
  }
  p.rms = (p.gram.diagonal() / static_cast<double>(p.n)).cwiseSqrt();
  p.delta_rms = (p.delta_rms / static_cast<double>(p.n)).cwiseSqrt();
  return p;
}

// K over the active subset `active` (indices into the dictionary).
Eigen::MatrixXd SolveSubset(const LiftedProblem& p, const BasisDictionary& basis,
                            const std::vector<int>& active, double ridge) {
  const int d = static_cast<int>(active.size());
  Eigen::MatrixXd g(d, d), b(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      g(r, c) = p.gram(active[r], active[c]);
      b(r, c) = p.cross(active[r], active[c]);
    }
  }
  // Equilibrate so the rank test is scale free.
  Eigen::VectorXd inv_scale(d);
  for (int j = 0; j < d; ++j) {
    inv_scale[j] = g(j, j) > 0.0 ? 1.0 / std::sqrt(g(j, j)) : 1.0;
  }
  Eigen::MatrixXd gs = inv_scale.asDiagonal() * g * inv_scale.asDiagonal();
  gs.diagonal() += ridge * inv_scale.cwiseAbs2();
  const Eigen::MatrixXd rhs = inv_scale.asDiagonal() * b;
  Eigen::MatrixXd solution;
  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gs);
    qr.setThreshold(1e-12);
    if (qr.rank() < d) {
      const int offending = active[qr.colsPermutation().indices()[qr.rank()]];
      throw IllConditionedError(
          "normal equations are rank deficient: basis function " + std::to_string(offending) +
              " (" + basis.functions()[offending].Describe() +
              ") is linearly dependent on the others over this dataset",
          offending);
    }
    solution = qr.solve(rhs);
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gs);
    solution = ldlt.solve(rhs);
  }
  Eigen::MatrixXd k = (inv_scale.asDiagonal() * solution).transpose();
  // Controls and the constant carry over unchanged across one step.
  const int n = basis.state_dim();
  const int m = basis.control_dim();
  for (int r = n; r < n + m + 1; ++r) {
    k.row(r).setZero();
    k(r, r) = 1.0;
  }
  if (!k.allFinite()) {
    throw IllConditionedError("least-squares solution is not finite", active.back());
  }
  return k;
}

// Per-state RMSE of one-step predictions on pre-lifted held-out rows.
Eigen::VectorXd SubsetRmse(const Eigen::MatrixXd& lifted, const Eigen::MatrixXd& truth,
                           const std::vector<int>& active, const Eigen::MatrixXd& k) {
  const int n = static_cast<int>(truth.cols());
  Eigen::MatrixXd sub(lifted.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c) sub.col(c) = lifted.col(active[c]);
  const Eigen::MatrixXd pred = sub * k.topRows(n).transpose();
  return ((pred - truth).colwise().squaredNorm() / static_cast<double>(truth.rows()))
      .cwiseSqrt()
      .transpose();
}

KoopmanModel WithStats(KoopmanModel model, const Dataset& train) {
  TrainingStats stats;
  stats.one_step_rmse = Evaluate(model, train, 1).one_step_rmse;
  stats.n_samples = static_cast<long>(train.size());
  stats.retained_count = model.lifted_dim();
  model.set_training_stats(std::move(stats));
  return model;
}

}  // namespace

KoopmanModel Fit(const Dataset& data, const BasisDictionary& basis, double ridge) {
  CheckCompatible(data, basis);
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be non-negative");
  const LiftedProblem problem = BuildProblem(data, basis);
  Eigen::MatrixXd k = SolveSubset(problem, basis, basis.active_indices(), ridge);
  return WithStats(KoopmanModel(data.env(), basis, std::move(k), data.dt()), data);
}

KoopmanModel Sparsify(const KoopmanModel& model, const Dataset& train, const Dataset& heldout,
                      const SparsityOptions& options) {
  const BasisDictionary& basis = model.basis();
  CheckCompatible(train, basis);
  CheckCompatible(heldout, basis);
  const int n = basis.state_dim();
  const int full = basis.size();
  const LiftedProblem problem = BuildProblem(train, basis);

  Eigen::MatrixXd lifted(static_cast<Eigen::Index>(heldout.size()), full);
  Eigen::MatrixXd truth(static_cast<Eigen::Index>(heldout.size()), n);
  {
    Eigen::VectorXd row(full);
    for (std::size_t t = 0; t < heldout.size(); ++t) {
      basis.LiftAll(heldout.state(t).data(), heldout.control(t).data(), row.data());
      lifted.row(static_cast<Eigen::Index>(t)) = row.transpose();
      for (int i = 0; i < n; ++i) truth(static_cast<Eigen::Index>(t), i) = heldout.next_state(t)[i];
    }
  }

  std::vector<int> active = basis.active_indices();
  Eigen::MatrixXd k = model.K();
  const Eigen::VectorXd baseline = SubsetRmse(lifted, truth, active, k);
  bool changed = false;
  bool stop = false;
  for (double threshold : options.thresholds) {
    if (stop) break;
    for (;;) {
      std::vector<int> keep;
      for (int c = 0; c < static_cast<int>(active.size()); ++c) {
        const int j = active[c];
        if (j < basis.exempt_count()) {
          keep.push_back(j);
          continue;
        }
        double influence = 0.0;
        for (int i = 0; i < n; ++i) {
          const double scale = problem.delta_rms[i] > 0.0 ? problem.delta_rms[i] : 1.0;
          influence = std::max(influence, std::abs(k(i, c)) * problem.rms[j] / scale);
        }
        if (!(influence < threshold)) keep.push_back(j);
      }
      if (keep.size() == active.size()) break;
      Eigen::MatrixXd candidate = SolveSubset(problem, basis, keep, options.ridge);
      const Eigen::VectorXd rmse = SubsetRmse(lifted, truth, keep, candidate);
      bool acceptable = true;
      for (int i = 0; i < n; ++i) {
        if (!(rmse[i] <= options.max_rmse_growth * baseline[i] + 1e-15)) acceptable = false;
      }
      if (!acceptable) {
        stop = true;
        break;
      }
      active = std::move(keep);
      k = std::move(candidate);
      changed = true;
    }
  }
  if (!changed) return model;

  std::vector<bool> mask(full, false);
  for (int j : active) mask[j] = true;
  BasisDictionary reduced = basis;
  reduced.set_active_mask(std::move(mask));
  KoopmanModel out(model.env(), std::move(reduced), std::move(k), model.dt());
  out.config_hash = model.config_hash;
  return WithStats(std::move(out), train);
}

EvaluationReport Evaluate(const KoopmanModel& model, const Dataset& data, int k) {
  if (data.empty()) throw ConfigError("evaluation dataset is empty");
  if (k < 1) throw ConfigError("open-loop horizon must be at least 1");
  CheckCompatible(data, model.basis());
  const int n = model.state_dim();
  EvaluationReport report;
  report.k = k;
  report.one_step_rmse = Eigen::VectorXd::Zero(n);
  report.k_step_rmse = Eigen::VectorXd::Zero(n);
  std::vector<double> scratch(model.scratch_size()), x(n), next(n);
  for (std::size_t t = 0; t < data.size(); ++t) {
    model.Predict(data.state(t).data(), data.control(t).data(), next.data(), scratch.data());
    for (int i = 0; i < n; ++i) {
      const double e = next[i] - data.next_state(t)[i];
      report.one_step_rmse[i] += e * e;
    }
  }
  report.one_step_rmse = (report.one_step_rmse / static_cast<double>(data.size())).cwiseSqrt();

  // Window starting at t is valid when rows t .. t+k-1 form one episode.
  std::size_t run_end = 0;  // first row index not chained to its predecessor
  for (std::size_t t = 0; t + k <= data.size(); ++t) {
    if (run_end <= t) {
      run_end = t + 1;
      while (run_end < data.size() && data.Continues(run_end - 1)) ++run_end;
    }
    if (t + k > run_end) continue;
    std::copy(data.state(t).begin(), data.state(t).end(), x.begin());
    for (int s = 0; s < k; ++s) {
      model.Predict(x.data(), data.control(t + s).data(), next.data(), scratch.data());
      std::swap(x, next);
    }
    for (int i = 0; i < n; ++i) {
      const double e = x[i] - data.next_state(t + k - 1)[i];
      report.k_step_rmse[i] += e * e;
    }
    ++report.windows;
  }
  if (report.windows > 0) {
    report.k_step_rmse = (report.k_step_rmse / static_cast<double>(report.windows)).cwiseSqrt();
  } else {
    report.k_step_rmse.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return report;
}

namespace {

std::string Num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> ParseNumbers(const std::string& text, long line) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    double v;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw ParseError("bad number '" + tok + "'", line);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

void SaveModel(const KoopmanModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model to " + path.string());
  const BasisSpec& spec = model.basis().spec();
  out << "# mpmi-koopman v1\n";
  out << "env_id " << ToString(model.env()) << "\n";
  out << "dt " << Num(model.dt()) << "\n";
  out << "state_dim " << spec.state_dim << "\n";
  out << "control_dim " << spec.control_dim << "\n";
  out << "basis_seed " << spec.seed << "\n";
  out << "n_monomial " << spec.n_monomial << "\n";
  out << "n_sinusoid " << spec.n_sinusoid << "\n";
  out << "scales";
  for (double s : spec.scales) out << " " << Num(s);
  out << "\nangle_vars";
  for (int v : spec.angle_vars) out << " " << v;
  out << "\nactive_mask ";
  for (bool b : model.basis().active_mask()) out << (b ? '1' : '0');
  out << "\nconfig_hash " << (model.config_hash.empty() ? "none" : model.config_hash) << "\n";
  const TrainingStats& stats = model.training_stats();
  out << "n_samples " << stats.n_samples << "\n";
  out << "one_step_rmse";
  for (Eigen::Index i = 0; i < stats.one_step_rmse.size(); ++i) out << " " << Num(stats.one_step_rmse[i]);
  out << "\nK " << model.K().rows() << " " << model.K().cols() << "\n";
  for (Eigen::Index r = 0; r < model.K().rows(); ++r) {
    for (Eigen::Index c = 0; c < model.K().cols(); ++c) out << (c ? " " : "") << Num(model.K()(r, c));
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing model to " + path.string());
}

KoopmanModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model " + path.string());
  std::string line;
  long line_no = 0;
  auto next_line = [&](const std::string& key) {
    if (!std::getline(in, line)) throw ParseError("unexpected end of model file", line_no + 1);
    ++line_no;
    if (line.rfind(key, 0) != 0) throw ParseError("expected '" + key + "'", line_no);
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  };
  next_line("# mpmi-koopman v1");
  try {
    const EnvId env = EnvIdFromString(next_line("env_id"));
    const double dt = std::stod(next_line("dt"));
    BasisSpec spec;
    spec.state_dim = std::stoi(next_line("state_dim"));
    spec.control_dim = std::stoi(next_line("control_dim"));
    spec.seed = std::stoull(next_line("basis_seed"));
    spec.n_monomial = std::stoi(next_line("n_monomial"));
    spec.n_sinusoid = std::stoi(next_line("n_sinusoid"));
    spec.scales = ParseNumbers(next_line("scales"), line_no);
    for (double v : ParseNumbers(next_line("angle_vars"), line_no)) {
      spec.angle_vars.push_back(static_cast<int>(v));
    }
    const std::string mask_text = next_line("active_mask");
    const long mask_line = line_no;
    const std::string hash = next_line("config_hash");
    TrainingStats stats;
    stats.n_samples = std::stol(next_line("n_samples"));
    const std::vector<double> rmse = ParseNumbers(next_line("one_step_rmse"), line_no);
    const std::vector<double> dims = ParseNumbers(next_line("K"), line_no);
    BasisDictionary basis(spec);
    if (static_cast<int>(mask_text.size()) != basis.size()) {
      throw ParseError("active mask length does not match the basis", mask_line);
    }
    std::vector<bool> mask;
    for (char c : mask_text) mask.push_back(c == '1');
    basis.set_active_mask(std::move(mask));
    if (dims.size() != 2 || dims[0] != basis.active_count() || dims[1] != basis.active_count()) {
      throw ParseError("K dimensions do not match the active basis", line_no);
    }
    const int d = basis.active_count();
    Eigen::MatrixXd k(d, d);
    for (int r = 0; r < d; ++r) {
      if (!std::getline(in, line)) throw ParseError("missing K row", line_no + 1);
      ++line_no;
      const std::vector<double> row = ParseNumbers(line, line_no);
      if (static_cast<int>(row.size()) != d) throw ParseError("K row has the wrong length", line_no);
      for (int c = 0; c < d; ++c) k(r, c) = row[c];
    }
    KoopmanModel model(env, std::move(basis), std::move(k), dt);
    model.config_hash = hash;
    stats.one_step_rmse = Eigen::Map<const Eigen::VectorXd>(rmse.data(), static_cast<Eigen::Index>(rmse.size()));
    stats.retained_count = d;
    model.set_training_stats(std::move(stats));
    return model;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad model file: ") + e.what(), line_no);
  }
}

}  // namespace mpmi
