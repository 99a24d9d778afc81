#include "mindless/scheduler/session_log.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "mindless/error.hpp"

namespace mindless::sched {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 14> kKindNames{{
    {EventKind::Activate, "activate"},
    {EventKind::Deactivate, "deactivate"},
    {EventKind::ToggleOn, "toggle_on"},
    {EventKind::ToggleOff, "toggle_off"},
    {EventKind::PatternSelected, "pattern_selected"},
    {EventKind::ConditionAssigned, "condition_assigned"},
    {EventKind::Annotation, "annotation"},
    {EventKind::DetectionChange, "detection_change"},
    {EventKind::Message, "message"},
    {EventKind::SessionStart, "session_start"},
    {EventKind::ModeBoundary, "mode_boundary"},
    {EventKind::PartDegraded, "part_degraded"},
    {EventKind::SessionEnd, "session_end"},
    {EventKind::Calibration, "calibration"},
}};

} // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

std::string encode_event(const SessionEvent& event) {
  Json j = {{"t", event.t}, {"kind", std::string(to_string(event.kind))}, {"payload", event.payload}};
  return j.dump();
}

SessionEvent decode_event(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw DecodeError(e.byte == 0 ? 0 : e.byte - 1, "malformed JSON");
  }
  if (!j.is_object()) throw DecodeError(0, "event is not an object");
  SessionEvent ev;
  const auto t = j.find("t");
  if (t == j.end() || !t->is_number() || !std::isfinite(t->get<double>()))
    throw DecodeError(0, "missing or non-numeric field 't'");
  ev.t = t->get<double>();
  const auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_string()) throw DecodeError(0, "missing field 'kind'");
  const auto parsed = event_kind_from_string(kind->get<std::string>());
  if (!parsed) throw DecodeError(0, "unknown event kind '" + kind->get<std::string>() + "'");
  ev.kind = *parsed;
  const auto payload = j.find("payload");
  if (payload != j.end()) {
    if (!payload->is_object()) throw DecodeError(0, "field 'payload' is not an object");
    ev.payload = *payload;
  }
  return ev;
}

const SessionEvent& SessionLog::append(SessionEvent event) {
  if (!std::isfinite(event.t)) throw InvalidArgument("event timestamp is not finite");
  if (!events_.empty() && event.t < events_.back().t) {
    std::ostringstream msg;
    msg << "out-of-order event at t=" << event.t << " after t=" << events_.back().t;
    throw InvalidArgument(msg.str());
  }
  events_.push_back(std::move(event));
  if (sink_) sink_(events_.back());
  return events_.back();
}

std::optional<double> SessionLog::last_time() const {
  if (events_.empty()) return std::nullopt;
  return events_.back().t;
}

std::string SessionLog::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += encode_event(e);
    out += '\n';
  }
  return out;
}

SessionLog SessionLog::parse_jsonl(std::string_view text) {
  SessionLog log;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::size_t end = eol == std::string_view::npos ? text.size() : eol;
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      try {
        auto ev = decode_event(line);
        log.append(std::move(ev));
      } catch (const DecodeError& e) {
        throw DecodeError(pos + e.offset(), "line " + std::to_string(line_no) + ": " + e.reason());
      } catch (const InvalidArgument& e) {
        throw DecodeError(pos, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = end + 1;
  }
  return log;
}

SessionLog SessionLog::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_jsonl(buf.str());
  } catch (const DecodeError& e) {
    throw DecodeError(e.offset(), path.string() + ": " + e.reason());
  }
}

void SessionLog::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_jsonl();
}

} // namespace mindless::sched
