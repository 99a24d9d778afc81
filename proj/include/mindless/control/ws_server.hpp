#pragma once

#include <functional>
#include <memory>
#include <string>

#include "mindless/control/router.hpp"

namespace mindless::control {

struct ServerOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  /// Server clock speed relative to wall time; > 1 compresses a session.
  double time_scale = 1.0;
  double tick_interval = 0.02;  // wall seconds between router ticks
  /// Wall seconds to keep flushing after the session ends.
  double drain_timeout = 2.0;
};

/// WebSocket transport around a Router. One io_context thread serializes
/// every routing decision, so the session log is a total order.
class WsServer {
public:
  /// Binds immediately; throws boost::system::system_error if the port is taken.
  WsServer(Router& router, ServerOptions options);
  ~WsServer();

  unsigned short port() const;

  /// Observer for every frame written to a connection.
  void on_send(std::function<void(ConnectionId, std::optional<Role>, const std::string&)> fn);

  /// Serves until the session finishes and frames drain, or stop() is called.
  void run();
  /// Safe to call from any thread.
  void stop();

  struct Impl;

private:
  std::unique_ptr<Impl> impl_;
};

} // namespace mindless::control
