#include "mindless/control/message.hpp"

#include <array>
#include <cmath>
#include <span>

#include "mindless/error.hpp"

namespace mindless::control {

namespace {

constexpr std::array<std::string_view, kMessageTypeCount> kTypeNames = {
    "hello",         "activate",          "deactivate",       "attention_state",
    "annotation",    "calibration_start", "calibration_point", "calibration_done",
    "mode_set",      "condition_reveal",  "session_end",      "error",
};

constexpr std::array<std::string_view, 1> kRole = {"role"};
constexpr std::array<std::string_view, 1> kEpisode = {"episode"};
constexpr std::array<std::string_view, 1> kState = {"state"};
constexpr std::array<std::string_view, 1> kMark = {"mark"};
constexpr std::array<std::string_view, 2> kAngles = {"yaw", "pitch"};
constexpr std::array<std::string_view, 1> kPart = {"part"};
constexpr std::array<std::string_view, 1> kParts = {"parts"};
constexpr std::array<std::string_view, 1> kReason = {"reason"};

} // namespace

std::string_view to_string(MessageType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

std::optional<MessageType> message_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i)
    if (kTypeNames[i] == s) return static_cast<MessageType>(i);
  return std::nullopt;
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Client: return "client";
    case Role::Sensor: return "sensor";
    case Role::Console: return "console";
  }
  return "?";
}

std::optional<Role> role_from_string(std::string_view s) {
  if (s == "client") return Role::Client;
  if (s == "sensor") return Role::Sensor;
  if (s == "console") return Role::Console;
  return std::nullopt;
}

std::span<const std::string_view> required_fields(MessageType t) {
  switch (t) {
    case MessageType::Hello: return kRole;
    case MessageType::Activate:
    case MessageType::Deactivate: return kEpisode;
    case MessageType::AttentionState: return kState;
    case MessageType::Annotation: return kMark;
    case MessageType::CalibrationPoint: return kAngles;
    case MessageType::ModeSet: return kPart;
    case MessageType::ConditionReveal: return kParts;
    case MessageType::Error: return kReason;
    case MessageType::CalibrationStart:
    case MessageType::CalibrationDone:
    case MessageType::SessionEnd: return {};
  }
  return {};
}

Json to_json(const Message& m) {
  return {{"payload", m.payload}, {"seq", m.seq}, {"t", m.t}, {"type", to_string(m.type)}};
}

std::string encode(const Message& m) { return to_json(m).dump(); }

Message from_json(const Json& j) {
  if (!j.is_object()) throw DecodeError(0, "frame is not an object");
  for (auto key : {"type", "t", "seq", "payload"})
    if (!j.contains(key)) throw DecodeError(0, std::string("missing field '") + key + "'");

  const auto& type = j.at("type");
  if (!type.is_string()) throw DecodeError(0, "field 'type' must be a string");
  const auto kind = message_type_from_string(type.get<std::string>());
  if (!kind) throw DecodeError(0, "unknown type '" + type.get<std::string>() + "'");

  const auto& t = j.at("t");
  if (!t.is_number() || !std::isfinite(t.get<double>()))
    throw DecodeError(0, "field 't' must be a finite number");
  const auto& seq = j.at("seq");
  if (!seq.is_number_integer()) throw DecodeError(0, "field 'seq' must be an integer");
  const auto& payload = j.at("payload");
  if (!payload.is_object()) throw DecodeError(0, "field 'payload' must be an object");

  for (auto field : required_fields(*kind))
    if (!payload.contains(field))
      throw DecodeError(0, "missing field 'payload." + std::string(field) + "' for " +
                               std::string(type.get<std::string>()));

  Message m;
  m.type = *kind;
  m.t = t.get<double>();
  m.seq = seq.get<std::int64_t>();
  m.payload = payload;
  return m;
}

Message decode(std::string_view frame) {
  Json j;
  try {
    j = Json::parse(frame);
  } catch (const Json::parse_error& e) {
    throw DecodeError(e.byte > 0 ? e.byte - 1 : 0, "malformed JSON");
  }
  return from_json(j);
}

Message make_error(std::string reason, double t, std::int64_t seq) {
  return Message{MessageType::Error, t, seq, {{"reason", std::move(reason)}}};
}

} // namespace mindless::control
