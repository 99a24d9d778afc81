#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "mindless/control/message.hpp"

namespace mindless::control {

/// Blocking-style WebSocket peer for scripted agents and the audio client.
/// Network I/O runs on an internal thread; send() and receive() are safe to
/// call from one other thread.
class WsClient {
public:
  /// Connects and completes the handshake; throws on failure.
  WsClient(const std::string& host, unsigned short port);
  ~WsClient();
  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  void send(const std::string& frame);
  void send(const Message& m) { send(encode(m)); }

  /// Next received frame, or nullopt on timeout or once the connection has
  /// closed and the queue is empty.
  std::optional<std::string> receive(std::chrono::milliseconds timeout);

  bool closed() const;
  void close();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace mindless::control
