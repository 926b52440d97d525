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

#include "mpmi/bridge.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "mpmi/errors.h"

namespace mpmi {

namespace {

using nlohmann::json;

json Vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json Snapshot(const RunConfig& config) {
  json j = json::parse(config.canonical);
  json box = json::array();
  for (const Interval& iv : config.env.control_space.intervals()) box.push_back({iv.low, iv.high});
  return {{"config", j},
          {"config_hash", config.hash},
          {"state_names", StateNames(config.env.id)},
          {"control_names", ControlNames(config.env.id)},
          {"control_box", box}};
}

}  // namespace

std::string HelloMessage(const RunConfig& config, std::uint64_t tick) {
  return json{{"type", "hello"},
              {"tick_index", tick},
              {"version", kWireVersion},
              {"config_snapshot", Snapshot(config)}}
      .dump();
}

std::string ConfigSnapshotMessage(const RunConfig& config, std::uint64_t tick) {
  json j = Snapshot(config);
  j["type"] = "config_snapshot";
  j["tick_index"] = tick;
  return j.dump();
}

std::string StateUpdateMessage(const std::string& trial_id, const TickRecord& record,
                               std::uint64_t tick) {
  return json{{"type", "state_update"},
              {"tick_index", tick},
              {"trial_id", trial_id},
              {"trial_tick", record.tick},
              {"t", record.t},
              {"state", Vec(record.state)}}
      .dump();
}

std::string DecisionUpdateMessage(const TickRecord& record, std::uint64_t tick,
                                  double input_client_time, bool include_timing) {
  json j = {{"type", "decision_update"},
            {"tick_index", tick},
            {"u_h", Vec(record.u_h)},
            {"u_r", Vec(record.u_r)},
            {"deviation", record.deviation},
            {"deviation_to_closest_safe", record.deviation_to_closest_safe},
            {"percent_safe", record.percent_safe},
            {"n_safe", record.n_safe},
            {"fallback_used", record.fallback_used},
            {"input_clamped", record.input_clamped},
            {"assisted", record.assisted}};
  if (include_timing) {
    j["compute_time"] = record.compute_time;
    j["input_client_time"] = input_client_time;
  }
  return j.dump();
}

std::string TrialEventMessage(const std::string& event, const TrialRecord& trial,
                              std::uint64_t tick, const Environment* env) {
  json j = {{"type", "trial_event"},
            {"tick_index", tick},
            {"event", event},
            {"trial_id", trial.trial_id},
            {"env", ToString(trial.env)},
            {"mode", ToString(trial.mode)},
            {"seed", trial.seed},
            {"max_trial_time", trial.max_trial_time}};
  if (event == "end") {
    j["outcome"] = ToString(trial.outcome);
    j["duration"] = trial.duration;
    j["aborted"] = trial.aborted;
  }
  if (const auto* car = dynamic_cast<const RaceCarEnvironment*>(env)) {
    json line = json::array();
    for (const auto& p : car->track().centerline) line.push_back({p[0], p[1]});
    j["track"] = {{"seed", car->track().seed},
                  {"half_width", car->track().half_width},
                  {"inflation_radius", car->spec().inflation_radius},
                  {"centerline", line}};
  }
  return j.dump();
}

std::string ErrorMessage(const std::string& what, std::uint64_t tick) {
  return json{{"type", "error"}, {"tick_index", tick}, {"message", what}}.dump();
}

std::string RolloutCloudMessage(const RolloutBatch& batch, const CloudOptions& options,
                                std::uint64_t tick) {
  const int n_total = batch.size();
  const int count = std::min(n_total, std::max(1, options.samples));
  const int stride = std::max(1, options.step_stride);
  json indices = json::array(), safe_steps = json::array(), fully = json::array(),
       trajectories = json::array();
  for (int c = 0; c < count; ++c) {
    const int i = static_cast<int>(static_cast<long>(c) * n_total / count);
    indices.push_back(i);
    safe_steps.push_back(batch.safe_steps(i));
    fully.push_back(batch.fully_safe(i));
    json traj = json::array();
    if (batch.recorded()) {
      const int last = batch.computed_steps(i);
      for (int k = 0; k <= last; k += stride) {
        json p = json::array();
        for (double v : batch.state(i, k)) p.push_back(v);
        traj.push_back(p);
      }
      if (last % stride != 0) {
        json p = json::array();
        for (double v : batch.state(i, last)) p.push_back(v);
        traj.push_back(p);
      }
    }
    trajectories.push_back(traj);
  }
  return json{{"type", "rollout_cloud"},
              {"tick_index", tick},
              {"n_samples", n_total},
              {"horizon", batch.steps()},
              {"step_stride", stride},
              {"sample_indices", indices},
              {"safe_steps", safe_steps},
              {"fully_safe", fully},
              {"trajectories", trajectories}}
      .dump();
}

ClientMessage ParseClientMessage(const std::string& text, int control_dim) {
  const json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("message is not a JSON object", 1);
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) throw ParseError("message has no type", 1);
  ClientMessage m;
  if (*type == "input") {
    m.kind = ClientMessage::Kind::kInput;
    const auto u = j.find("u");
    if (u == j.end() || !u->is_array() || static_cast<int>(u->size()) != control_dim) {
      throw ParseError("input.u must be a list of " + std::to_string(control_dim) + " numbers", 1);
    }
    m.u.resize(control_dim);
    for (int i = 0; i < control_dim; ++i) {
      if (!(*u)[i].is_number() || !std::isfinite((*u)[i].get<double>())) {
        throw ParseError("input.u entries must be finite numbers", 1);
      }
      m.u[i] = (*u)[i].get<double>();
    }
    const auto t = j.find("client_time");
    if (t != j.end()) {
      if (!t->is_number()) throw ParseError("input.client_time must be a number", 1);
      m.client_time = t->get<double>();
    }
  } else if (*type == "mode_set") {
    m.kind = ClientMessage::Kind::kModeSet;
    const auto mode = j.find("mode");
    if (mode == j.end() || !mode->is_string()) throw ParseError("mode_set needs a mode", 1);
    try {
      m.mode = ModeFromString(mode->get<std::string>());
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), 1);
    }
  } else {
    throw ParseError("unsupported message type '" + type->dump() + "'", 1);
  }
  return m;
}

BridgeHub::BridgeHub(InputHandoff* input, int control_dim, std::size_t queue_limit)
    : input_(input), control_dim_(control_dim), queue_limit_(std::max<std::size_t>(1, queue_limit)) {}

BridgeHub::ClientId BridgeHub::Connect(std::function<void()> notify) {
  std::lock_guard<std::mutex> lock(mu_);
  const ClientId id = next_id_++;
  clients_[id].notify = std::move(notify);
  return id;
}

void BridgeHub::Disconnect(ClientId id) {
  std::lock_guard<std::mutex> lock(mu_);
  clients_.erase(id);
}

std::size_t BridgeHub::client_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return clients_.size();
}

void BridgeHub::Enqueue(Client& c, const std::string& message) {
  if (c.queue.size() >= queue_limit_) {
    c.queue.pop_front();
    ++c.dropped;
  }
  c.queue.push_back(message);
}

void BridgeHub::Publish(const std::string& message) {
  std::vector<std::function<void()>> wake;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& [id, c] : clients_) {
      Enqueue(c, message);
      if (c.notify) wake.push_back(c.notify);
    }
  }
  for (auto& f : wake) f();
}

void BridgeHub::Send(ClientId id, const std::string& message) {
  std::function<void()> wake;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = clients_.find(id);
    if (it == clients_.end()) return;
    Enqueue(it->second, message);
    wake = it->second.notify;
  }
  if (wake) wake();
}

std::optional<std::string> BridgeHub::Pop(ClientId id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = clients_.find(id);
  if (it == clients_.end() || it->second.queue.empty()) return std::nullopt;
  std::string m = std::move(it->second.queue.front());
  it->second.queue.pop_front();
  return m;
}

std::vector<std::string> BridgeHub::Drain(ClientId id) {
  std::vector<std::string> out;
  while (auto m = Pop(id)) out.push_back(std::move(*m));
  return out;
}

std::uint64_t BridgeHub::dropped(ClientId id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = clients_.find(id);
  return it == clients_.end() ? 0 : it->second.dropped;
}

std::optional<std::string> BridgeHub::Receive(ClientId, const std::string& text) {
  ClientMessage m;
  try {
    m = ParseClientMessage(text, control_dim_);
  } catch (const ParseError& e) {
    return ErrorMessage(e.what(), tick());
  }
  if (m.kind == ClientMessage::Kind::kInput) {
    // Clamping happens in the loop so the decision can report it.
    input_->Write(std::move(m.u), m.client_time);
  } else {
    input_->SetMode(m.mode);
  }
  return std::nullopt;
}

void BridgeHub::set_tick(std::uint64_t tick) {
  std::lock_guard<std::mutex> lock(mu_);
  tick_ = tick;
}

std::uint64_t BridgeHub::tick() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tick_;
}

TelemetryPublisher::TelemetryPublisher(BridgeHub* hub, const BridgeConfig& config,
                                       const InputHandoff* input)
    : hub_(hub), config_(config), input_(input) {}

void TelemetryPublisher::TrialStarted(const TrialRecord& trial, const RunConfig& config,
                                      const Environment& env) {
  base_ = started_ ? last_ + 1 : 0;
  started_ = true;
  last_ = base_;
  hub_->set_tick(base_);
  hub_->Publish(ConfigSnapshotMessage(config, base_));
  hub_->Publish(TrialEventMessage("start", trial, base_, &env));
}

void TelemetryPublisher::OnTick(const std::string& trial_id, const TickRecord& tick,
                                const RolloutBatch& batch) {
  last_ = base_ + tick.tick;
  hub_->set_tick(last_);
  hub_->Publish(StateUpdateMessage(trial_id, tick, last_));
  hub_->Publish(DecisionUpdateMessage(tick, last_, input_ ? input_->last_client_time() : 0.0,
                                      !config_.deterministic));
  if (tick.tick % static_cast<std::uint64_t>(config_.cloud_every) == 0) {
    hub_->Publish(
        RolloutCloudMessage(batch, {config_.cloud_samples, config_.cloud_step_stride}, last_));
  }
}

void TelemetryPublisher::TrialEnded(const TrialRecord& trial) {
  hub_->Publish(TrialEventMessage("end", trial, last_));
}

}  // namespace mpmi
