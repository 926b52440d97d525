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

#include "mpmi/bridge_server.h"

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "mpmi/errors.h"

namespace mpmi {

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, BridgeHub* hub, std::string hello)
      : ws_(std::move(socket)), hub_(hub), hello_(std::move(hello)) {}

  void Run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->OnAccept();
    });
  }

  void Close() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closed_) return;
      self->closed_ = true;
      beast::get_lowest_layer(self->ws_).close();
    });
  }

 private:
  void OnAccept() {
    ws_.text(true);
    std::weak_ptr<Session> weak = weak_from_this();
    id_ = hub_->Connect([weak] {
      if (auto self = weak.lock()) {
        asio::post(self->ws_.get_executor(), [self] { self->Flush(); });
      }
    });
    connected_ = true;
    hub_->Send(id_, hello_);
    Read();
  }

  void Read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->Finish();
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (auto error = self->hub_->Receive(self->id_, text)) self->hub_->Send(self->id_, *error);
      self->Read();
    });
  }

  void Flush() {
    if (writing_ || closed_) return;
    auto next = hub_->Pop(id_);
    if (!next) return;
    writing_ = true;
    outgoing_ = std::move(*next);
    ws_.async_write(asio::buffer(outgoing_),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) return self->Finish();
                      self->Flush();
                    });
  }

  void Finish() {
    if (connected_) {
      hub_->Disconnect(id_);
      connected_ = false;
    }
    closed_ = true;
  }

  websocket::stream<beast::tcp_stream> ws_;
  BridgeHub* hub_;
  std::string hello_;
  beast::flat_buffer buffer_;
  std::string outgoing_;
  BridgeHub::ClientId id_ = 0;
  bool connected_ = false;
  bool writing_ = false;
  bool closed_ = false;
};

}  // namespace

struct BridgeServer::Impl {
  BridgeHub* hub;
  std::function<std::string()> hello;
  asio::io_context io{1};
  tcp::acceptor acceptor{io};
  std::thread thread;
  std::mutex mu;
  std::vector<std::weak_ptr<Session>> sessions;
  int port = 0;
  bool running = false;

  void Accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // Acceptor closed.
      auto session = std::make_shared<Session>(std::move(socket), hub, hello());
      {
        std::lock_guard<std::mutex> lock(mu);
        std::erase_if(sessions, [](const auto& w) { return w.expired(); });
        sessions.push_back(session);
      }
      session->Run();
      Accept();
    });
  }
};

BridgeServer::BridgeServer(BridgeHub* hub, std::function<std::string()> hello)
    : impl_(std::make_unique<Impl>()) {
  impl_->hub = hub;
  impl_->hello = std::move(hello);
}

BridgeServer::~BridgeServer() { Stop(); }

void BridgeServer::Start(const std::string& address, int port) {
  if (impl_->running) throw ConfigError("bridge server already started");
  if (port < 0 || port > 65535) throw ConfigError("bridge.port must be in [0, 65535]");
  beast::error_code ec;
  const auto ip = asio::ip::make_address(address, ec);
  if (ec) throw ConfigError("bridge.address '" + address + "' is not an IP address");
  const tcp::endpoint endpoint(ip, static_cast<unsigned short>(port));
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    beast::error_code ignored;
    acceptor.close(ignored);
    throw std::runtime_error("cannot listen on " + address + ":" + std::to_string(port) + ": " +
                      ec.message() + " (is another server running? set bridge.port)");
  }
  impl_->port = acceptor.local_endpoint().port();
  impl_->running = true;
  impl_->Accept();
  impl_->thread = std::thread([impl = impl_.get()] { impl->io.run(); });
}

void BridgeServer::Stop() {
  if (!impl_ || !impl_->running) return;
  asio::post(impl_->io, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
    std::lock_guard<std::mutex> lock(impl->mu);
    for (auto& w : impl->sessions) {
      if (auto s = w.lock()) s->Close();
    }
  });
  // Give sessions a moment to unwind, then stop regardless.
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->running = false;
}

int BridgeServer::port() const { return impl_->port; }

}  // namespace mpmi
