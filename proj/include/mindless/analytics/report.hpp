#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mindless/analytics/intervals.hpp"
#include "mindless/scheduler/session_log.hpp"

namespace mindless::analytics {

struct PairedScores {
  std::vector<double> before;
  std::vector<double> after;
};

struct SessionInput {
  std::string name;
  sched::SessionLog log;
  /// Detection track in session-relative seconds (0 = session start). When
  /// present it replaces the log's own detection_change events.
  std::optional<IntervalTrack> detections;
};

struct ReportInput {
  std::vector<SessionInput> sessions;
  std::map<std::string, PairedScores> questionnaires;
};

/// One part of a session as recovered from the log.
struct PartSpan {
  std::size_t index = 0;
  std::string part_id;
  std::string mode;  // empty when the log does not say
  double start = 0.0;
  double end = 0.0;
  bool degraded = false;
};

std::vector<PartSpan> session_parts(const sched::SessionLog& log);

/// Machine-readable analysis. Metrics that cannot be computed are listed under
/// "omissions" with the reason instead of failing the whole report.
nlohmann::json build_report(const ReportInput& input);

/// Plain-text table rendering of a report.
std::string render_text(const nlohmann::json& report);

/// Bar charts of per-mode distracted time/count and per-condition recovery.
std::string render_svg(const nlohmann::json& report);

} // namespace mindless::analytics
