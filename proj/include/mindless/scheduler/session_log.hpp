#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mindless::sched {

using Json = nlohmann::json;

enum class EventKind {
  Activate,
  Deactivate,
  ToggleOn,
  ToggleOff,
  PatternSelected,
  ConditionAssigned,
  Annotation,
  DetectionChange,
  // Control-plane records sharing the same log.
  Message,
  SessionStart,
  ModeBoundary,
  PartDegraded,
  SessionEnd,
  Calibration,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

struct SessionEvent {
  double t = 0.0;
  EventKind kind = EventKind::Annotation;
  Json payload = Json::object();

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

/// One line of `session-<id>.events.jsonl`: {"kind":..,"payload":{..},"t":..}
/// with keys in lexicographic order.
std::string encode_event(const SessionEvent& event);
SessionEvent decode_event(std::string_view line);

/// Append-only, time-ordered event record.
class SessionLog {
public:
  using Sink = std::function<void(const SessionEvent&)>;

  SessionLog() = default;

  /// Throws InvalidArgument if `event.t` is earlier than the last entry.
  const SessionEvent& append(SessionEvent event);
  const SessionEvent& append(double t, EventKind kind, Json payload = Json::object()) {
    return append(SessionEvent{t, kind, std::move(payload)});
  }

  /// Called after every successful append (used to stream the log to disk).
  void set_sink(Sink sink) { sink_ = std::move(sink); }

  std::span<const SessionEvent> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  std::optional<double> last_time() const;

  std::string to_jsonl() const;
  /// Parses a whole log; DecodeError offsets are byte offsets into `text`.
  static SessionLog parse_jsonl(std::string_view text);

  static SessionLog read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

private:
  std::vector<SessionEvent> events_;
  Sink sink_;
};

} // namespace mindless::sched
