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

#ifndef MPMI_BRIDGE_SERVER_H_
#define MPMI_BRIDGE_SERVER_H_

#include <functional>
#include <memory>
#include <string>

#include "mpmi/bridge.h"

namespace mpmi {

// WebSocket endpoint for a BridgeHub. One I/O thread serves every client;
// the control loop only ever touches the hub. Each new client first receives
// the message returned by `hello`.
class BridgeServer {
 public:
  BridgeServer(BridgeHub* hub, std::function<std::string()> hello);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  // Binds and starts the I/O thread. Port 0 picks a free port. Throws
  // ConfigError for an invalid address and std::runtime_error when the
  // port cannot be bound.
  void Start(const std::string& address, int port);
  // Closes every connection and joins the I/O thread. Idempotent.
  void Stop();
  // The bound port, valid after Start.
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mpmi

#endif  // MPMI_BRIDGE_SERVER_H_
