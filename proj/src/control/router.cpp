#include "mindless/control/router.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mindless/control/blinding.hpp"
#include "mindless/error.hpp"

namespace mindless::control {

namespace {

using sched::EventKind;
using sensor::AttentionState;

Json profile_json(const sensor::CalibrationProfile& p) {
  return {{"captured_at", p.captured_at}, {"pitch_max", p.pitch_max}, {"pitch_min", p.pitch_min},
          {"yaw_max", p.yaw_max}, {"yaw_min", p.yaw_min}};
}

} // namespace

std::string_view to_string(TriggerMode m) { return m == TriggerMode::Auto ? "auto" : "manual"; }

std::optional<TriggerMode> trigger_mode_from_string(std::string_view s) {
  if (s == "auto") return TriggerMode::Auto;
  if (s == "manual") return TriggerMode::Manual;
  return std::nullopt;
}

void SessionDescriptor::validate() const {
  if (parts.empty()) throw InvalidArgument("session needs at least one part");
  std::set<std::string> ids;
  for (const auto& p : parts) {
    if (!(p.duration > 0.0) || !std::isfinite(p.duration))
      throw InvalidArgument("part duration must be positive");
    if (!ids.insert(p.part_id).second) throw InvalidArgument("duplicate part id " + p.part_id);
  }
}

Json SessionDescriptor::to_json() const {
  Json ps = Json::array();
  for (const auto& p : parts)
    ps.push_back({{"duration", p.duration}, {"mode", sched::to_string(p.mode)}, {"part_id", p.part_id}});
  return {{"blinded", blinded}, {"parts", ps}, {"session_id", session_id}};
}

std::vector<std::size_t> part_order(std::uint64_t seed, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates from the top, one counter-keyed draw per position.
  for (std::size_t i = n; i > 1; --i) {
    const double u = sched::unit_draw(seed, 0, 1000 + i);
    const auto j = std::min(i - 1, static_cast<std::size_t>(u * static_cast<double>(i)));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Router::Router(RouterConfig config)
    : config_(std::move(config)), scheduler_(config_.scheduler, &log_), profile_(config_.profile) {
  config_.descriptor.validate();
}

std::optional<Role> Router::role_of(ConnectionId id) const {
  const auto it = connections_.find(id);
  if (it == connections_.end()) return std::nullopt;
  return it->second.role;
}

std::optional<double> Router::part_end() const {
  if (!started_ || finished_) return std::nullopt;
  return part_ends_[part_];
}

std::optional<ConnectionId> Router::connection_of(Role role) const {
  for (const auto& [id, c] : connections_)
    if (c.role == role) return id;
  return std::nullopt;
}

// ---- outbound ----------------------------------------------------------

void Router::send(ConnectionId to, MessageType type, Json payload, double now, bool close) {
  auto& c = connections_[to];
  Message m{type, now, 0, std::move(payload)};
  if (c.role == Role::Console && !revealed_) {
    auto blinded = blind_for_console(std::move(m), config_.descriptor.blinded);
    if (!blinded) return;
    m = std::move(*blinded);
  }
  m.seq = ++c.out_seq;
  Json entry = {{"conn", to}, {"dir", "out"}, {"msg", to_json(m)}};
  entry["to"] = c.role ? Json(to_string(*c.role)) : Json(nullptr);
  log_.append(now, EventKind::Message, std::move(entry));
  out_->push_back({to, std::move(m), close});
}

void Router::send_role(Role role, MessageType type, const Json& payload, double now) {
  if (const auto id = connection_of(role)) send(*id, type, payload, now);
}

void Router::reply_error(ConnectionId to, std::string reason, double now, bool close) {
  send(to, MessageType::Error, {{"reason", std::move(reason)}}, now, close);
}

void Router::log_inbound(ConnectionId id, const Json& msg, double now) {
  const auto& c = connections_[id];
  Json entry = {{"conn", id}, {"dir", "in"}, {"msg", msg}};
  entry["from"] = c.role ? Json(to_string(*c.role)) : Json(nullptr);
  log_.append(now, EventKind::Message, std::move(entry));
}

// ---- entry points ------------------------------------------------------

std::vector<Delivery> Router::handle(ConnectionId from, std::string_view frame, double now) {
  std::vector<Delivery> out;
  out_ = &out;
  now = std::max(now, clock_);
  advance_to(now);

  auto& c = connections_[from];
  Message m;
  try {
    m = decode(frame);
  } catch (const DecodeError& e) {
    log_inbound(from, {{"raw", std::string(frame)}}, now);
    send(from, MessageType::Error,
         {{"reason", std::string(e.reason())}, {"offset", e.offset()}}, now);
    return out;
  }
  log_inbound(from, to_json(m), now);

  if (c.last_seq && m.seq <= *c.last_seq) {
    reply_error(from, "seq " + std::to_string(m.seq) + " not above " + std::to_string(*c.last_seq), now);
    return out;
  }
  if (c.last_t && m.t < *c.last_t) {
    reply_error(from, "timestamp went backwards", now);
    return out;
  }
  c.last_seq = m.seq;
  c.last_t = m.t;

  if (!c.role) {
    if (m.type != MessageType::Hello) {
      reply_error(from, "hello required before " + std::string(to_string(m.type)), now);
      return out;
    }
    const auto& field = m.payload.at("role");
    const auto role = role_from_string(field.is_string() ? field.get<std::string>() : "");
    if (!role) {
      reply_error(from, "unknown role", now);
      return out;
    }
    if (connection_of(*role)) {
      reply_error(from, std::string(to_string(*role)) + " already connected", now, true);
      return out;
    }
    join(from, *role, now);
    return out;
  }
  if (m.type == MessageType::Hello) {
    reply_error(from, "role already declared", now);
    return out;
  }
  dispatch(from, *c.role, m, now);
  return out;
}

std::vector<Delivery> Router::disconnect(ConnectionId id, double now) {
  std::vector<Delivery> out;
  out_ = &out;
  now = std::max(now, clock_);
  advance_to(now);
  const auto it = connections_.find(id);
  if (it == connections_.end()) return out;
  const auto role = it->second.role;
  connections_.erase(it);
  if (!role) return out;
  if (*role == Role::Sensor) calibrating_ = false;
  if (started_ && !finished_)
    log_.append(now, EventKind::PartDegraded,
                {{"index", part_}, {"part_id", config_.descriptor.parts[part_].part_id},
                 {"reason", "disconnect"}, {"role", to_string(*role)}});
  return out;
}

std::vector<Delivery> Router::tick(double now) {
  std::vector<Delivery> out;
  out_ = &out;
  now = std::max(now, clock_);
  advance_to(now);
  return out;
}

// ---- session timeline --------------------------------------------------

void Router::advance_to(double now) {
  clock_ = now;
  if (!started_ || finished_) return;
  while (!finished_ && part_ends_[part_] <= now) boundary(part_ends_[part_]);
  if (finished_) return;
  scheduler_.advance(now);
  if (pending_deactivate_ && scheduler_.active() && now > scheduler_.current()->activated_at) {
    pending_deactivate_ = false;
    deactivate(now);
  }
}

void Router::boundary(double t) {
  scheduler_.advance(t);
  pending_deactivate_ = false;
  if (scheduler_.active()) deactivate(t);
  if (part_ + 1 == config_.descriptor.parts.size()) {
    end_session(t, "complete");
    return;
  }
  ++part_;
  const auto& p = config_.descriptor.parts[part_];
  log_.append(t, EventKind::ModeBoundary,
              {{"index", part_}, {"mode", sched::to_string(p.mode)}, {"part_id", p.part_id}});
  scheduler_.reconfigure(p.mode, config_.trigger == TriggerMode::Manual &&
                                     config_.scheduler.randomize_condition);
  send_mode(std::nullopt, t);
  if (wants_intervention()) activate(t);
}

void Router::maybe_start(double now) {
  if (started_ || finished_) return;
  if (!connection_of(Role::Client) || !connection_of(Role::Console)) return;
  if (config_.trigger == TriggerMode::Auto && (!connection_of(Role::Sensor) || !profile_)) return;
  if (calibrating_) return;
  start(now);
}

void Router::start(double now) {
  started_ = true;
  session_start_ = now;
  part_ = 0;
  double end = now;
  for (const auto& p : config_.descriptor.parts) part_ends_.push_back(end += p.duration);
  auto payload = config_.descriptor.to_json();
  payload["trigger"] = to_string(config_.trigger);
  payload["seed"] = config_.scheduler.rng_seed;
  log_.append(now, EventKind::SessionStart, std::move(payload));
  const auto& p = config_.descriptor.parts[0];
  scheduler_.reconfigure(p.mode, config_.trigger == TriggerMode::Manual &&
                                     config_.scheduler.randomize_condition);
  send_mode(std::nullopt, now);
  if (wants_intervention()) activate(now);
}

void Router::end_session(double t, std::string_view reason) {
  if (scheduler_.active()) deactivate(t);
  finished_ = true;
  log_.append(t, EventKind::SessionEnd, {{"reason", reason}});
  for (const auto& [id, c] : std::map(connections_))
    if (c.role) send(id, MessageType::SessionEnd, {{"reason", reason}}, t);
  revealed_ = true;

  Json parts = Json::array();
  double start = session_start_;
  for (std::size_t i = 0; i < config_.descriptor.parts.size(); ++i) {
    const auto& p = config_.descriptor.parts[i];
    const double end = std::min(part_ends_[i], t);
    parts.push_back({{"end", end}, {"index", i}, {"mode", sched::to_string(p.mode)},
                     {"part_id", p.part_id}, {"start", std::min(start, t)}});
    start = part_ends_[i];
  }
  Json episodes = Json::array();
  for (const auto& e : scheduler_.episodes()) {
    Json j = {{"activated_at", e.activated_at}, {"condition", sched::to_string(e.condition)},
              {"episode", e.id}, {"mode", sched::to_string(e.mode)}};
    if (e.deactivated_at) j["deactivated_at"] = *e.deactivated_at;
    if (e.pattern) j["pattern"] = audio::to_string(*e.pattern);
    episodes.push_back(std::move(j));
  }
  send_role(Role::Console, MessageType::ConditionReveal, {{"episodes", episodes}, {"parts", parts}}, t);
}

void Router::send_mode(std::optional<ConnectionId> only, double now) {
  const auto& p = config_.descriptor.parts[part_];
  const Json payload = {{"duration", p.duration}, {"mode", sched::to_string(p.mode)},
                        {"part", part_}, {"part_id", p.part_id},
                        {"parts", config_.descriptor.parts.size()}};
  if (only) {
    send(*only, MessageType::ModeSet, payload, now);
    return;
  }
  send_role(Role::Client, MessageType::ModeSet, payload, now);
  send_role(Role::Sensor, MessageType::ModeSet, payload, now);
  send_role(Role::Console, MessageType::ModeSet, payload, now);
}

// ---- role joins and dispatch -------------------------------------------

void Router::join(ConnectionId id, Role role, double now) {
  connections_[id].role = role;
  send(id, MessageType::Hello,
       {{"blinded", config_.descriptor.blinded}, {"role", to_string(role)},
        {"session_id", config_.descriptor.session_id}, {"trigger", to_string(config_.trigger)}},
       now);
  if (role == Role::Sensor && profile_)
    send(id, MessageType::CalibrationDone, profile_json(*profile_), now);
  if (started_ && !finished_) {
    send_mode(id, now);
    if (role == Role::Client && scheduler_.active()) send_activation(id, now);
  }
  maybe_start(now);
}

void Router::dispatch(ConnectionId id, Role role, const Message& m, double now) {
  if (m.type == MessageType::Error) return;  // logged, nothing to route
  switch (role) {
    case Role::Sensor:
      if (m.type == MessageType::AttentionState) return on_attention(m, now);
      if (m.type == MessageType::CalibrationPoint) return on_calibration_point(id, m, now);
      if (m.type == MessageType::CalibrationDone) return on_calibration_done(id, m, now);
      break;
    case Role::Console:
      if (m.type == MessageType::Annotation) return on_annotation(id, m, now);
      if (m.type == MessageType::CalibrationStart) return on_calibration_start(id, m, now);
      if (m.type == MessageType::CalibrationDone) return on_calibration_done(id, m, now);
      if (m.type == MessageType::SessionEnd) {
        if (!started_ || finished_) return reply_error(id, "no session running", now);
        return end_session(now, "console");
      }
      break;
    case Role::Client:
      break;
  }
  reply_error(id, std::string(to_string(m.type)) + " not accepted from " + std::string(to_string(role)),
              now);
}

void Router::on_attention(const Message& m, double now) {
  const auto& field = m.payload.at("state");
  const auto state = field.is_string() ? sensor::attention_state_from_string(field.get<std::string>())
                                       : std::nullopt;
  if (!state) return reply_error(*connection_of(Role::Sensor), "unknown attention state", now);
  if (*state == sensed_) return;
  sensed_ = *state;
  log_.append(now, EventKind::DetectionChange, {{"state", sensor::to_string(*state)}});
  send_role(Role::Console, MessageType::AttentionState, {{"state", sensor::to_string(*state)}}, now);
  if (!started_ || finished_ || config_.trigger != TriggerMode::Auto) return;
  if (*state == AttentionState::Distracted) activate(now);
  else deactivate(now);
}

void Router::on_annotation(ConnectionId id, const Message& m, double now) {
  const auto& field = m.payload.at("mark");
  const std::string mark = field.is_string() ? field.get<std::string>() : "";
  AttentionState next;
  if (mark == "distraction_start") next = AttentionState::Distracted;
  else if (mark == "refocus") next = AttentionState::Attentive;
  else return reply_error(id, "unknown annotation mark", now);
  if (next == annotated_) return reply_error(id, "annotation " + mark + " repeats the previous mark", now);
  if (finished_) return reply_error(id, "session has ended", now);

  annotated_ = next;
  log_.append(now, EventKind::Annotation, {{"mark", mark}});
  if (started_ && config_.trigger == TriggerMode::Manual) {
    if (next == AttentionState::Distracted) activate(now);
    else deactivate(now);
  }
  Json ack = {{"ack", true}, {"mark", mark}};
  if (scheduler_.active()) ack["episode"] = scheduler_.current()->id;
  send(id, MessageType::Annotation, std::move(ack), now);
}

void Router::on_calibration_start(ConnectionId id, const Message& m, double now) {
  const auto sensor_id = connection_of(Role::Sensor);
  if (!sensor_id) return reply_error(id, "sensor not connected", now);
  if (started_) return reply_error(id, "calibration is only possible before the session starts", now);
  calibrating_ = true;
  calibration_points_.clear();
  send(*sensor_id, MessageType::CalibrationStart, m.payload, now);
}

void Router::on_calibration_point(ConnectionId id, const Message& m, double now) {
  if (!calibrating_) return reply_error(id, "no calibration in progress", now);
  const auto& yaw = m.payload.at("yaw");
  const auto& pitch = m.payload.at("pitch");
  if (!yaw.is_number() || !pitch.is_number())
    return reply_error(id, "calibration_point needs numeric yaw and pitch", now);
  sensor::HeadPose pose;
  pose.yaw = yaw.get<double>();
  pose.pitch = pitch.get<double>();
  calibration_points_.push_back(pose);
  send_role(Role::Console, MessageType::CalibrationPoint,
            {{"count", calibration_points_.size()}, {"pitch", pose.pitch}, {"yaw", pose.yaw}}, now);
}

void Router::on_calibration_done(ConnectionId id, const Message& m, double now) {
  if (!calibrating_) return reply_error(id, "no calibration in progress", now);
  calibrating_ = false;
  if (m.payload.value("abort", false)) {
    send_role(Role::Console, MessageType::CalibrationDone, {{"aborted", true}}, now);
    send_role(Role::Sensor, MessageType::CalibrationDone, {{"aborted", true}}, now);
    return maybe_start(now);
  }
  try {
    const auto p = sensor::calibrate(calibration_points_, now);
    profile_ = p;
    log_.append(now, EventKind::Calibration,
                {{"points", calibration_points_.size()}, {"profile", profile_json(p)}});
    send_role(Role::Console, MessageType::CalibrationDone, profile_json(p), now);
    send_role(Role::Sensor, MessageType::CalibrationDone, profile_json(p), now);
  } catch (const DataError& e) {
    send_role(Role::Console, MessageType::Error, {{"reason", e.what()}}, now);
    if (id != connection_of(Role::Console)) reply_error(id, e.what(), now);
  }
  maybe_start(now);
}

// ---- interventions -----------------------------------------------------

bool Router::wants_intervention() const {
  return config_.trigger == TriggerMode::Auto ? sensed_ == AttentionState::Distracted
                                              : annotated_ == AttentionState::Distracted;
}

void Router::send_activation(ConnectionId to, double now) {
  const auto* e = scheduler_.current();
  if (!e) return;
  const bool delivered = e->condition == sched::Condition::Treatment && e->mode != sched::Mode::Control;
  Json payload = {{"condition", sched::to_string(e->condition)}, {"episode", e->id},
                  {"mode", sched::to_string(e->mode)},
                  {"toggle_period", scheduler_.config().toggle_period}};
  if (e->pattern) payload["pattern"] = audio::to_string(*e->pattern);
  if (scheduler_.config().per_cycle_patterns && e->pattern)
    payload["cycle_seed"] = scheduler_.config().rng_seed;
  const auto role = connections_[to].role;
  if (role == Role::Client) {
    if (!delivered) return;
    payload.erase("condition");
  }
  send(to, MessageType::Activate, std::move(payload), now);
}

void Router::activate(double now) {
  if (scheduler_.active()) return;
  pending_deactivate_ = false;
  scheduler_.activate(now);
  if (const auto id = connection_of(Role::Client)) send_activation(*id, now);
  if (const auto id = connection_of(Role::Console)) send_activation(*id, now);
}

void Router::deactivate(double now) {
  if (!scheduler_.active()) return;
  if (now <= scheduler_.current()->activated_at) {
    pending_deactivate_ = true;
    return;
  }
  const auto e = scheduler_.deactivate(now);
  const bool delivered = e.condition == sched::Condition::Treatment && e.mode != sched::Mode::Control;
  if (delivered) send_role(Role::Client, MessageType::Deactivate, {{"episode", e.id}}, now);
  send_role(Role::Console, MessageType::Deactivate, {{"episode", e.id}}, now);
}

} // namespace mindless::control
