#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "mindless/analytics/hypothesis_tests.hpp"
#include "mindless/scheduler/scheduler.hpp"
#include "mindless/scheduler/session_log.hpp"

namespace mindless::analytics {

using audio::PerturbationPattern;
using sched::Condition;

/// One annotated distraction, from distraction_start to refocus.
struct Episode {
  double start = 0.0;
  double end = 0.0;  // refocus time, or the log end for open episodes
  bool open = false;
  std::optional<Condition> condition;
  std::optional<PerturbationPattern> last_pattern;
  std::vector<PerturbationPattern> pattern_history;  // every enabled phase

  double recovery_time() const { return end - start; }
};

inline constexpr std::string_view kDistractionStart = "distraction_start";
inline constexpr std::string_view kRefocus = "refocus";

/// Pairs annotation marks into episodes and attaches the condition assigned
/// and the patterns enabled between start and refocus. Other events are
/// ignored. A start still pending at the end of the log yields an open
/// episode. Throws DataError naming the timestamp on a second start before
/// refocus or a refocus with no start.
std::vector<Episode> extract_episodes(const sched::SessionLog& log);

struct RecoveryStats {
  GroupSummary treatment;
  GroupSummary control;
  /// control minus treatment, so a positive d means faster recovery under
  /// treatment.
  TestResult test;
};

/// Closed episodes only. Throws InsufficientData if a group has < 2.
RecoveryStats recovery_time_stats(std::span<const Episode> episodes);

struct PatternAttribution {
  std::array<double, 4> last_before_refocus{};
  std::array<double, 4> total_occurrence{};
  TestResult test;
};

/// Pattern tallies over treatment episodes that ended in refocus.
struct PatternCounts {
  std::array<double, 4> last_before_refocus{};
  std::array<double, 4> total_occurrence{};
};
PatternCounts pattern_counts(std::span<const Episode> episodes);

PatternAttribution pattern_attribution(std::span<const Episode> episodes);
/// 2 x 4 test on pre-counted rows. Throws DegenerateInput on a zero margin.
PatternAttribution pattern_attribution(const std::array<double, 4>& last_before_refocus,
                                       const std::array<double, 4>& total_occurrence);

} // namespace mindless::analytics
