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

#include "mpmi/config.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "mpmi/errors.h"

namespace mpmi {

namespace {

using nlohmann::json;

json Defaults(EnvId id) {
  const EnvSpec env = EnvSpec::Defaults(id);
  const BasisSpec basis = BasisSpec::Defaults(env, 1);
  const SparsityOptions sparsity;
  const ExcitationOptions excitation;
  const HorizonConfig horizon = HorizonConfig::Defaults(id);
  const ScriptedUserSpec user;
  const SessionConfig session;
  const BenchConfig bench;
  const BridgeConfig bridge;
  const ModelConfig model;

  json physics = json::object();
  for (const auto& [k, v] : env.physics) physics[k] = v;
  json modes = json::array();
  for (Mode m : session.modes) modes.push_back(ToString(m));

  json j;
  j["env"] = {{"id", ToString(id)},
              {"dt", env.dt},
              {"inflation_radius", env.inflation_radius},
              {"max_trial_time", env.max_trial_time},
              {"always_safe", false},
              {"physics", physics}};
  j["sampling"] = {{"per_dim_counts", GridCountsFor(id, id == EnvId::kBalanceBot ? 1024 : 1280)}};
  j["horizon"] = {{"steps", horizon.steps},
                  {"noise_sigma", json::array()},
                  {"noise_seed", horizon.noise_seed}};
  j["model"] = {{"ground_truth", model.ground_truth},
                {"path", model.path},
                {"dataset_path", model.dataset_path},
                {"basis_seed", basis.seed},
                {"n_monomial", basis.n_monomial},
                {"n_sinusoid", basis.n_sinusoid},
                {"ridge", model.ridge},
                {"sparsity_thresholds", sparsity.thresholds},
                {"max_rmse_growth", sparsity.max_rmse_growth},
                {"collect_steps", model.collect_steps},
                {"collect_seed", model.collect_seed},
                {"excitation",
                 {{"reversion", excitation.reversion},
                  {"volatility", excitation.volatility},
                  {"max_episode_time", excitation.max_episode_time}}},
                {"heldout_fraction", model.heldout_fraction},
                {"eval_k", model.eval_k}};
  j["session"] = {{"modes", modes},
                  {"trials", session.trials},
                  {"seed", session.seed},
                  {"user",
                   {{"kind", ToString(user.kind)},
                    {"value", user.value},
                    {"amplitude", user.amplitude},
                    {"period", user.period},
                    {"step_sigma", user.step_sigma},
                    {"flip_period", user.flip_period},
                    {"replay_path", user.replay_path}}},
                  {"output_dir", session.output_dir},
                  {"workers", session.workers},
                  {"real_time", session.real_time},
                  {"count_survivors_at_cap", session.count_survivors_at_cap}};
  j["bench"] = {{"duration", bench.duration},
                {"per_dim_counts", GridCountsFor(id, 2048)},
                {"workers", bench.workers},
                {"sweep_samples", bench.sweep_samples},
                {"sweep_duration", bench.sweep_duration}};
  j["bridge"] = {{"address", bridge.address},
                 {"port", bridge.port},
                 {"cloud_every", bridge.cloud_every},
                 {"cloud_samples", bridge.cloud_samples},
                 {"cloud_step_stride", bridge.cloud_step_stride},
                 {"queue_limit", bridge.queue_limit},
                 {"deterministic", bridge.deterministic},
                 {"session_time", bridge.session_time}};
  return j;
}

bool SameKind(const json& base, const json& value) {
  if (base.is_number()) return value.is_number();
  if (base.is_boolean()) return value.is_boolean();
  if (base.is_string()) return value.is_string();
  if (base.is_array()) return value.is_array();
  if (base.is_object()) return value.is_object();
  return true;
}

const char* KindName(const json& j) {
  if (j.is_number()) return "a number";
  if (j.is_boolean()) return "true or false";
  if (j.is_string()) return "a string";
  if (j.is_array()) return "a list";
  return "an object";
}

// Overlays `user` onto `base`, rejecting keys the defaults do not have.
void MergeStrict(json& base, const json& user, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (!SameKind(slot, it.value())) {
      throw ConfigError("config key '" + key + "' must be " + KindName(slot));
    }
    if (slot.is_object()) {
      MergeStrict(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

void ApplyOverride(json& user, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  json* node = &user;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' is malformed");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw ConfigError("override key '" + key + "' crosses a value");
    node = &child;
    start = dot + 1;
  }
}

// Typed access with errors that name the key.
template <typename T>
T Get(const json& root, const std::string& dotted) {
  const json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    node = &node->at(dotted.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + dotted + "' has the wrong type");
  }
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::uint64_t Fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<int> GridCountsFor(EnvId env, int n) {
  if (n < 2) throw ConfigError("a grid needs at least 2 samples");
  if (env == EnvId::kBalanceBot) return {n};
  // Smallest product >= n, then the most even split.
  std::vector<int> best;
  long best_product = std::numeric_limits<long>::max();
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int c = 2; static_cast<long>(c) * c * c <= 8L * n; ++c) {
    for (int b = c; static_cast<long>(b) * b * c <= 8L * n; ++b) {
      const long bc = static_cast<long>(b) * c;
      const int a = static_cast<int>(std::max<long>(b, (n + bc - 1) / bc));
      const long product = a * bc;
      const double ratio = static_cast<double>(a) / c;
      if (product < best_product || (product == best_product && ratio < best_ratio)) {
        best = {a, b, c};
        best_product = product;
        best_ratio = ratio;
      }
    }
  }
  return best;
}

std::string DefaultConfigJson(EnvId env) { return Defaults(env).dump(2) + "\n"; }

std::vector<std::uint64_t> RunConfig::TrialSeeds() const {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < session.trials; ++i) seeds.push_back(session.seed + i);
  return seeds;
}

RunConfig ParseConfig(const std::string& text, const std::vector<std::string>& overrides) {
  json user = json::parse(text, nullptr, /*allow_exceptions=*/false, /*ignore_comments=*/true);
  if (user.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  for (const std::string& o : overrides) ApplyOverride(user, o);

  Require(user.contains("env") && user["env"].is_object(), "config needs an 'env' section");
  Require(user["env"].contains("id") && user["env"]["id"].is_string(),
          "config needs env.id (balance_bot or race_car)");
  const EnvId id = EnvIdFromString(user["env"]["id"].get<std::string>());
  json j = Defaults(id);
  MergeStrict(j, user, "");

  RunConfig c;
  try {
    c.env = EnvSpec::Defaults(id);
    c.env.dt = Get<double>(j, "env.dt");
    c.env.inflation_radius = Get<double>(j, "env.inflation_radius");
    c.env.max_trial_time = Get<double>(j, "env.max_trial_time");
    for (auto it = j["env"]["physics"].begin(); it != j["env"]["physics"].end(); ++it) {
      c.env.physics[it.key()] = Get<double>(j, "env.physics." + it.key());
    }
    c.env.Validate();
    c.always_safe = Get<bool>(j, "env.always_safe");

    c.per_dim_counts = Get<std::vector<int>>(j, "sampling.per_dim_counts");
    Require(static_cast<int>(c.per_dim_counts.size()) == c.env.control_dim(),
            "sampling.per_dim_counts needs one entry per control dimension");
    for (int n : c.per_dim_counts) Require(n >= 2, "sampling.per_dim_counts entries must be >= 2");

    c.horizon.steps = Get<int>(j, "horizon.steps");
    c.horizon.noise_sigma = Get<std::vector<double>>(j, "horizon.noise_sigma");
    c.horizon.noise_seed = Get<std::uint64_t>(j, "horizon.noise_seed");
    c.horizon.Validate(c.env.state_dim());

    ModelConfig& m = c.model;
    m.ground_truth = Get<bool>(j, "model.ground_truth");
    m.path = Get<std::string>(j, "model.path");
    m.dataset_path = Get<std::string>(j, "model.dataset_path");
    m.basis = BasisSpec::Defaults(c.env, Get<std::uint64_t>(j, "model.basis_seed"));
    m.basis.n_monomial = Get<int>(j, "model.n_monomial");
    m.basis.n_sinusoid = Get<int>(j, "model.n_sinusoid");
    Require(m.basis.n_monomial >= 0 && m.basis.n_sinusoid >= 0,
            "model feature counts must be >= 0");
    m.ridge = Get<double>(j, "model.ridge");
    Require(m.ridge >= 0.0 && std::isfinite(m.ridge), "model.ridge must be >= 0");
    m.sparsity.thresholds = Get<std::vector<double>>(j, "model.sparsity_thresholds");
    for (std::size_t i = 0; i < m.sparsity.thresholds.size(); ++i) {
      Require(m.sparsity.thresholds[i] >= 0.0 &&
                  (i == 0 || m.sparsity.thresholds[i] > m.sparsity.thresholds[i - 1]),
              "model.sparsity_thresholds must be increasing and >= 0");
    }
    m.sparsity.max_rmse_growth = Get<double>(j, "model.max_rmse_growth");
    Require(m.sparsity.max_rmse_growth >= 1.0, "model.max_rmse_growth must be >= 1");
    m.sparsity.ridge = m.ridge;
    m.collect_steps = Get<long>(j, "model.collect_steps");
    Require(m.collect_steps > 0, "model.collect_steps must be positive");
    m.collect_seed = Get<std::uint64_t>(j, "model.collect_seed");
    m.excitation.reversion = Get<double>(j, "model.excitation.reversion");
    m.excitation.volatility = Get<double>(j, "model.excitation.volatility");
    m.excitation.max_episode_time = Get<double>(j, "model.excitation.max_episode_time");
    Require(m.excitation.reversion > 0.0 && m.excitation.volatility >= 0.0 &&
                m.excitation.max_episode_time > 0.0,
            "model.excitation values must be positive");
    m.heldout_fraction = Get<double>(j, "model.heldout_fraction");
    Require(m.heldout_fraction > 0.0 && m.heldout_fraction < 1.0,
            "model.heldout_fraction must be in (0, 1)");
    m.eval_k = Get<int>(j, "model.eval_k");
    Require(m.eval_k >= 1, "model.eval_k must be >= 1");

    SessionConfig& s = c.session;
    s.modes.clear();
    for (const std::string& name : Get<std::vector<std::string>>(j, "session.modes")) {
      s.modes.push_back(ModeFromString(name));
    }
    Require(!s.modes.empty(), "session.modes must not be empty");
    s.trials = Get<int>(j, "session.trials");
    Require(s.trials >= 1, "session.trials must be >= 1");
    s.seed = Get<std::uint64_t>(j, "session.seed");
    s.user.kind = UserKindFromString(Get<std::string>(j, "session.user.kind"));
    s.user.value = Get<std::vector<double>>(j, "session.user.value");
    s.user.amplitude = Get<double>(j, "session.user.amplitude");
    s.user.period = Get<double>(j, "session.user.period");
    s.user.step_sigma = Get<double>(j, "session.user.step_sigma");
    s.user.flip_period = Get<double>(j, "session.user.flip_period");
    s.user.replay_path = Get<std::string>(j, "session.user.replay_path");
    if (s.user.kind == UserKind::kReplay) {
      Require(!s.user.replay_path.empty(), "session.user.replay_path is required for replay");
    }
    s.output_dir = Get<std::string>(j, "session.output_dir");
    s.workers = Get<int>(j, "session.workers");
    Require(s.workers >= 0, "session.workers must be >= 0");
    s.real_time = Get<bool>(j, "session.real_time");
    s.count_survivors_at_cap = Get<bool>(j, "session.count_survivors_at_cap");

    BenchConfig& b = c.bench;
    b.duration = Get<double>(j, "bench.duration");
    Require(b.duration > 0.0, "bench.duration must be positive");
    b.per_dim_counts = Get<std::vector<int>>(j, "bench.per_dim_counts");
    Require(static_cast<int>(b.per_dim_counts.size()) == c.env.control_dim(),
            "bench.per_dim_counts needs one entry per control dimension");
    for (int n : b.per_dim_counts) Require(n >= 2, "bench.per_dim_counts entries must be >= 2");
    b.workers = Get<std::vector<int>>(j, "bench.workers");
    for (int w : b.workers) Require(w >= 0, "bench.workers entries must be >= 0");
    b.sweep_samples = Get<std::vector<int>>(j, "bench.sweep_samples");
    for (int n : b.sweep_samples) Require(n >= 2, "bench.sweep_samples entries must be >= 2");
    b.sweep_duration = Get<double>(j, "bench.sweep_duration");
    Require(b.sweep_duration > 0.0, "bench.sweep_duration must be positive");

    BridgeConfig& r = c.bridge;
    r.address = Get<std::string>(j, "bridge.address");
    r.port = Get<int>(j, "bridge.port");
    Require(r.port >= 0 && r.port <= 65535, "bridge.port must be in [0, 65535]");
    r.cloud_every = Get<int>(j, "bridge.cloud_every");
    r.cloud_samples = Get<int>(j, "bridge.cloud_samples");
    r.cloud_step_stride = Get<int>(j, "bridge.cloud_step_stride");
    Require(r.cloud_every >= 1 && r.cloud_samples >= 1 && r.cloud_step_stride >= 1,
            "bridge decimation values must be >= 1");
    r.queue_limit = Get<int>(j, "bridge.queue_limit");
    Require(r.queue_limit >= 1, "bridge.queue_limit must be >= 1");
    r.deterministic = Get<bool>(j, "bridge.deterministic");
    r.session_time = Get<double>(j, "bridge.session_time");
    Require(r.session_time >= 0.0, "bridge.session_time must be >= 0");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }

  c.canonical = j.dump();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(Fnv1a(c.canonical)));
  c.hash = hex;
  return c;
}

RunConfig LoadConfig(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str(), overrides);
}

}  // namespace mpmi
