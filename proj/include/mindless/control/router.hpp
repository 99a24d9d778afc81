#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mindless/control/message.hpp"
#include "mindless/scheduler/scheduler.hpp"
#include "mindless/scheduler/session_log.hpp"
#include "mindless/sensor/calibration.hpp"

namespace mindless::control {

using ConnectionId = std::uint64_t;

/// Auto: sensor attention changes drive the scheduler, mode fixed per part.
/// Manual: console annotations drive it, condition drawn per episode.
enum class TriggerMode { Auto, Manual };
std::string_view to_string(TriggerMode m);
std::optional<TriggerMode> trigger_mode_from_string(std::string_view s);

struct PartSpec {
  std::string part_id;
  sched::Mode mode = sched::Mode::Mindless;
  double duration = 600.0;
};

struct SessionDescriptor {
  std::string session_id;
  std::vector<PartSpec> parts;
  bool blinded = false;

  void validate() const;
  Json to_json() const;
};

/// Permutation of 0..n-1 drawn from `seed` (uniform over all n! orders).
std::vector<std::size_t> part_order(std::uint64_t seed, std::size_t n);

struct RouterConfig {
  SessionDescriptor descriptor;
  TriggerMode trigger = TriggerMode::Manual;
  sched::SchedulerConfig scheduler;
  /// Preloaded profile; otherwise the console runs a calibration.
  std::optional<sensor::CalibrationProfile> profile;
};

struct Delivery {
  ConnectionId to = 0;
  Message message;
  bool close = false;  // transport drops the connection after sending
};

/// Transport-independent session logic. Every call takes the server clock
/// (seconds, non-decreasing) and returns the frames to send. All routed
/// messages, inbound and outbound, are logged with the server time.
class Router {
public:
  explicit Router(RouterConfig config);
  Router(const Router&) = delete;
  Router& operator=(const Router&) = delete;

  std::vector<Delivery> handle(ConnectionId from, std::string_view frame, double now);
  std::vector<Delivery> disconnect(ConnectionId id, double now);
  /// Applies part boundaries and toggle timing up to `now`.
  std::vector<Delivery> tick(double now);

  bool started() const noexcept { return started_; }
  bool finished() const noexcept { return finished_; }
  std::optional<Role> role_of(ConnectionId id) const;
  std::size_t current_part() const noexcept { return part_; }
  /// Server time at which the running part ends.
  std::optional<double> part_end() const;

  sched::SessionLog& log() noexcept { return log_; }
  const sched::Scheduler& scheduler() const noexcept { return scheduler_; }
  const std::optional<sensor::CalibrationProfile>& profile() const noexcept { return profile_; }
  const RouterConfig& config() const noexcept { return config_; }

private:
  struct Connection {
    std::optional<Role> role;
    std::optional<std::int64_t> last_seq;
    std::optional<double> last_t;
    std::int64_t out_seq = 0;
  };

  void advance_to(double now);
  void boundary(double t);
  void maybe_start(double now);
  void start(double now);
  void end_session(double t, std::string_view reason);
  void join(ConnectionId id, Role role, double now);
  void dispatch(ConnectionId id, Role role, const Message& m, double now);
  void on_attention(const Message& m, double now);
  void on_annotation(ConnectionId id, const Message& m, double now);
  void on_calibration_start(ConnectionId id, const Message& m, double now);
  void on_calibration_point(ConnectionId id, const Message& m, double now);
  void on_calibration_done(ConnectionId id, const Message& m, double now);
  void activate(double now);
  void deactivate(double now);
  bool wants_intervention() const;
  void send_mode(std::optional<ConnectionId> only, double now);
  void send_activation(ConnectionId to, double now);

  void send(ConnectionId to, MessageType type, Json payload, double now, bool close = false);
  void send_role(Role role, MessageType type, const Json& payload, double now);
  void reply_error(ConnectionId to, std::string reason, double now, bool close = false);
  void log_inbound(ConnectionId id, const Json& msg, double now);
  std::optional<ConnectionId> connection_of(Role role) const;

  RouterConfig config_;
  sched::SessionLog log_;
  sched::Scheduler scheduler_;
  std::optional<sensor::CalibrationProfile> profile_;
  std::map<ConnectionId, Connection> connections_;
  std::vector<Delivery>* out_ = nullptr;

  double clock_ = 0.0;
  bool started_ = false;
  bool finished_ = false;
  bool revealed_ = false;
  std::size_t part_ = 0;
  std::vector<double> part_ends_;
  double session_start_ = 0.0;

  sensor::AttentionState sensed_ = sensor::AttentionState::Attentive;
  sensor::AttentionState annotated_ = sensor::AttentionState::Attentive;
  bool pending_deactivate_ = false;
  bool calibrating_ = false;
  std::vector<sensor::HeadPose> calibration_points_;
};

} // namespace mindless::control
