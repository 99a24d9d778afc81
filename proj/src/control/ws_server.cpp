#include "mindless/control/ws_server.hpp"

#include <chrono>
#include <deque>
#include <map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace mindless::control {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

class Session;

} // namespace

struct WsServer::Impl {
  Impl(Router& r, ServerOptions o)
      : router(r), options(std::move(o)), acceptor(io), ticker(io), started_at(Clock::now()) {
    const tcp::endpoint ep(asio::ip::make_address(options.host), options.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  double now() const {
    const std::chrono::duration<double> wall = Clock::now() - started_at;
    return wall.count() * options.time_scale;
  }

  void accept();
  void schedule_tick();
  void deliver(std::vector<Delivery> deliveries);
  void received(ConnectionId id, const std::string& frame);
  void closed(ConnectionId id);
  void finish();

  Router& router;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor;
  asio::steady_timer ticker;
  Clock::time_point started_at;
  std::optional<Clock::time_point> finished_at;
  std::map<ConnectionId, std::shared_ptr<Session>> sessions;
  ConnectionId next_id = 1;
  std::function<void(ConnectionId, std::optional<Role>, const std::string&)> observer;
};

namespace {

class Session : public std::enable_shared_from_this<Session> {
public:
  Session(tcp::socket socket, ConnectionId id, WsServer::Impl& server)
      : ws_(std::move(socket)), id_(id), server_(server) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->fail();
      self->read();
    });
  }

  void write(std::string frame, bool close_after) {
    if (closing_) return;
    queue_.push_back(std::move(frame));
    if (close_after) closing_after_flush_ = true;
    if (queue_.size() == 1) flush();
  }

  void close() {
    if (closing_) return;
    if (!queue_.empty()) {
      closing_after_flush_ = true;
      return;
    }
    closing_ = true;
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) { self->fail(); });
  }

  bool idle() const { return queue_.empty(); }

private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail();
      auto text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_.received(self->id_, text);
      self->read();
    });
  }

  void flush() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->fail();
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) return self->flush();
                      if (self->closing_after_flush_) self->close();
                    });
  }

  void fail() {
    if (gone_) return;
    gone_ = true;
    server_.closed(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  ConnectionId id_;
  WsServer::Impl& server_;
  bool closing_ = false;
  bool closing_after_flush_ = false;
  bool gone_ = false;
};

} // namespace

void WsServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    if (router.finished()) return;
    const auto id = next_id++;
    auto s = std::make_shared<Session>(std::move(socket), id, *this);
    sessions[id] = s;
    s->start();
    accept();
  });
}

void WsServer::Impl::schedule_tick() {
  ticker.expires_after(std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(options.tick_interval)));
  ticker.async_wait([this](beast::error_code ec) {
    if (ec) return;
    if (!router.finished()) deliver(router.tick(now()));
    if (router.finished()) {
      if (!finished_at) finish();
      bool idle = true;
      for (const auto& [id, s] : sessions) idle = idle && s->idle();
      const std::chrono::duration<double> waited = Clock::now() - *finished_at;
      if (sessions.empty() || (idle && waited.count() > 0.2) || waited.count() > options.drain_timeout) {
        io.stop();
        return;
      }
    }
    schedule_tick();
  });
}

void WsServer::Impl::finish() {
  finished_at = Clock::now();
  beast::error_code ignored;
  acceptor.close(ignored);
  for (auto& [id, s] : std::map(sessions)) s->close();
}

void WsServer::Impl::deliver(std::vector<Delivery> deliveries) {
  for (auto& d : deliveries) {
    const auto it = sessions.find(d.to);
    if (it == sessions.end()) continue;
    auto frame = encode(d.message);
    if (observer) observer(d.to, router.role_of(d.to), frame);
    it->second->write(std::move(frame), d.close);
  }
}

void WsServer::Impl::received(ConnectionId id, const std::string& frame) {
  if (router.finished()) return;
  deliver(router.handle(id, frame, now()));
}

void WsServer::Impl::closed(ConnectionId id) {
  if (sessions.erase(id) == 0) return;
  deliver(router.disconnect(id, now()));
}

WsServer::WsServer(Router& router, ServerOptions options)
    : impl_(std::make_unique<Impl>(router, std::move(options))) {}

WsServer::~WsServer() = default;

unsigned short WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WsServer::on_send(std::function<void(ConnectionId, std::optional<Role>, const std::string&)> fn) {
  impl_->observer = std::move(fn);
}

void WsServer::run() {
  impl_->started_at = Clock::now();
  impl_->accept();
  impl_->schedule_tick();
  impl_->io.run();
}

void WsServer::stop() {
  asio::post(impl_->io, [this] { impl_->io.stop(); });
}

} // namespace mindless::control
