#include "mindless/control/ws_client.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace mindless::control {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct WsClient::Impl {
  Impl(const std::string& host, unsigned short port) : ws(io) {
    tcp::resolver resolver(io);
    const auto results = resolver.resolve(host, std::to_string(port));
    beast::get_lowest_layer(ws).connect(results);
    ws.handshake(host + ":" + std::to_string(port), "/");
    ws.text(true);
    read();
    thread = std::thread([this] { io.run(); });
  }

  ~Impl() {
    shutdown();
    if (thread.joinable()) thread.join();
  }

  void read() {
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) return mark_closed();
      {
        std::lock_guard lock(mutex);
        inbox.push_back(beast::buffers_to_string(buffer.data()));
      }
      buffer.consume(buffer.size());
      cv.notify_all();
      read();
    });
  }

  void flush() {
    ws.async_write(asio::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      if (ec) return mark_closed();
      outbox.pop_front();
      if (!outbox.empty()) flush();
      else if (close_requested) begin_close();
    });
  }

  void begin_close() {
    if (closing) return;
    closing = true;
    ws.async_close(websocket::close_code::normal, [this](beast::error_code) { mark_closed(); });
  }

  void mark_closed() {
    {
      std::lock_guard lock(mutex);
      is_closed = true;
    }
    cv.notify_all();
  }

  void shutdown() {
    asio::post(io, [this] {
      close_requested = true;
      if (outbox.empty()) begin_close();
    });
    std::unique_lock lock(mutex);
    cv.wait_for(lock, std::chrono::seconds(2), [this] { return is_closed; });
    lock.unlock();
    io.stop();
  }

  asio::io_context io;
  websocket::stream<beast::tcp_stream> ws;
  beast::flat_buffer buffer;
  std::deque<std::string> outbox;  // touched only on the io thread
  bool close_requested = false;
  bool closing = false;

  mutable std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> inbox;
  bool is_closed = false;
  std::thread thread;
};

WsClient::WsClient(const std::string& host, unsigned short port)
    : impl_(std::make_unique<Impl>(host, port)) {}

WsClient::~WsClient() = default;

void WsClient::send(const std::string& frame) {
  asio::post(impl_->io, [impl = impl_.get(), frame] {
    if (impl->closing) return;
    impl->outbox.push_back(frame);
    if (impl->outbox.size() == 1) impl->flush();
  });
}

std::optional<std::string> WsClient::receive(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mutex);
  impl_->cv.wait_for(lock, timeout, [this] { return !impl_->inbox.empty() || impl_->is_closed; });
  if (impl_->inbox.empty()) return std::nullopt;
  auto frame = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  return frame;
}

bool WsClient::closed() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->is_closed;
}

void WsClient::close() { impl_->shutdown(); }

} // namespace mindless::control
