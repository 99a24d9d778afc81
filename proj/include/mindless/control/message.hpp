#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

namespace mindless::control {

using Json = nlohmann::json;

enum class MessageType {
  Hello,
  Activate,
  Deactivate,
  AttentionState,
  Annotation,
  CalibrationStart,
  CalibrationPoint,
  CalibrationDone,
  ModeSet,
  ConditionReveal,
  SessionEnd,
  Error,
};

inline constexpr std::size_t kMessageTypeCount = 12;

std::string_view to_string(MessageType t);
std::optional<MessageType> message_type_from_string(std::string_view s);

enum class Role { Client, Sensor, Console };
std::string_view to_string(Role r);
std::optional<Role> role_from_string(std::string_view s);

struct Message {
  MessageType type = MessageType::Hello;
  double t = 0.0;         // sender clock, seconds
  std::int64_t seq = 0;   // strictly increasing per sender
  Json payload = Json::object();

  friend bool operator==(const Message&, const Message&) = default;
};

/// Payload keys each type must carry.
std::span<const std::string_view> required_fields(MessageType t);

/// One frame: {"payload":{..},"seq":n,"t":x,"type":"..."} with sorted keys
/// and no insignificant whitespace.
std::string encode(const Message& m);
Json to_json(const Message& m);

/// Throws DecodeError(offset, reason). Schema violations (unknown type,
/// missing field) report offset 0 and name the offending key.
Message decode(std::string_view frame);
Message from_json(const Json& j);

Message make_error(std::string reason, double t = 0.0, std::int64_t seq = 0);

} // namespace mindless::control
