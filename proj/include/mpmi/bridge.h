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

#ifndef MPMI_BRIDGE_H_
#define MPMI_BRIDGE_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmi/config.h"
#include "mpmi/mpmi.h"
#include "mpmi/rollout.h"
#include "mpmi/session.h"

namespace mpmi {

inline constexpr int kWireVersion = 1;

// Server-to-client messages. Each is one JSON object with "type" and
// "tick_index"; field lists are in the README. `tick` arguments are the
// session-wide wire tick, which never decreases across trials.
std::string HelloMessage(const RunConfig& config, std::uint64_t tick);
std::string ConfigSnapshotMessage(const RunConfig& config, std::uint64_t tick);
std::string StateUpdateMessage(const std::string& trial_id, const TickRecord& record,
                               std::uint64_t tick);
std::string DecisionUpdateMessage(const TickRecord& record, std::uint64_t tick,
                                  double input_client_time, bool include_timing);
// "start" events carry the track for the race car; "end" events the outcome.
std::string TrialEventMessage(const std::string& event, const TrialRecord& trial,
                              std::uint64_t tick, const Environment* env = nullptr);
std::string ErrorMessage(const std::string& what, std::uint64_t tick);

struct CloudOptions {
  int samples = 200;
  int step_stride = 3;
};
// Up to `samples` trajectories spread evenly over the batch, every
// step_stride-th predicted state (plus the last computed one).
std::string RolloutCloudMessage(const RolloutBatch& batch, const CloudOptions& options,
                                std::uint64_t tick);

// A validated client message.
struct ClientMessage {
  enum class Kind { kInput, kModeSet } kind = Kind::kInput;
  Eigen::VectorXd u;
  Mode mode = Mode::kMpmi;
  double client_time = 0.0;
};

// Throws ParseError describing what is wrong with the message.
ClientMessage ParseClientMessage(const std::string& text, int control_dim);

// Fan-out point between the control loop and any number of clients. Publish
// never blocks on a client: each client has a bounded queue that drops its
// oldest message when full.
class BridgeHub {
 public:
  BridgeHub(InputHandoff* input, int control_dim, std::size_t queue_limit);

  using ClientId = int;
  // `notify` runs (under no lock) after messages are queued for the client.
  ClientId Connect(std::function<void()> notify = {});
  void Disconnect(ClientId id);
  std::size_t client_count() const;

  void Publish(const std::string& message);
  // Queue a message for one client only.
  void Send(ClientId id, const std::string& message);
  std::optional<std::string> Pop(ClientId id);
  std::vector<std::string> Drain(ClientId id);
  std::uint64_t dropped(ClientId id) const;

  // Applies an input or mode message to the handoff. Returns an error
  // message for the client when the payload is rejected.
  std::optional<std::string> Receive(ClientId id, const std::string& text);

  // Tick stamped on replies generated outside the loop.
  void set_tick(std::uint64_t tick);
  std::uint64_t tick() const;

 private:
  struct Client {
    std::deque<std::string> queue;
    std::uint64_t dropped = 0;
    std::function<void()> notify;
  };
  void Enqueue(Client& c, const std::string& message);

  InputHandoff* input_;
  int control_dim_;
  std::size_t queue_limit_;
  mutable std::mutex mu_;
  std::map<ClientId, Client> clients_;
  ClientId next_id_ = 1;
  std::uint64_t tick_ = 0;
};

// Turns loop callbacks into wire messages with the configured decimation.
// Trial ticks are offset so the wire tick keeps increasing across trials.
class TelemetryPublisher {
 public:
  TelemetryPublisher(BridgeHub* hub, const BridgeConfig& config, const InputHandoff* input);

  void TrialStarted(const TrialRecord& trial, const RunConfig& config, const Environment& env);
  void OnTick(const std::string& trial_id, const TickRecord& tick, const RolloutBatch& batch);
  void TrialEnded(const TrialRecord& trial);

 private:
  BridgeHub* hub_;
  BridgeConfig config_;
  const InputHandoff* input_;
  std::uint64_t base_ = 0;
  std::uint64_t last_ = 0;
  bool started_ = false;
};

}  // namespace mpmi

#endif  // MPMI_BRIDGE_H_
