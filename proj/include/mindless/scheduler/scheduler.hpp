#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mindless/audio/effect.hpp"
#include "mindless/scheduler/session_log.hpp"

namespace mindless::sched {

using audio::Effect;
using audio::PerturbationPattern;

enum class Mode { Mindless, Alerting, Control };
enum class Condition { Treatment, Control };

std::string_view to_string(Mode m);
std::string_view to_string(Condition c);
std::optional<Mode> mode_from_string(std::string_view s);
std::optional<Condition> condition_from_string(std::string_view s);

struct SchedulerConfig {
  double toggle_period = 3.0;
  double treatment_probability = 0.5;
  Mode mode = Mode::Mindless;
  std::uint64_t rng_seed = 0;
  /// Per-episode Bernoulli assignment (manual RCT). When false the condition
  /// follows the mode: control mode gives control, anything else treatment.
  bool randomize_condition = true;
  /// Draw a fresh pattern on every enabled phase instead of once per episode.
  bool per_cycle_patterns = false;

  void validate() const;
};

struct ToggleRecord {
  double t = 0.0;
  bool enabled = false;
  std::optional<PerturbationPattern> pattern;  // set on enabling toggles

  friend bool operator==(const ToggleRecord&, const ToggleRecord&) = default;
};

struct InterventionEpisode {
  int id = 0;
  double activated_at = 0.0;
  std::optional<double> deactivated_at;
  Condition condition = Condition::Control;
  Mode mode = Mode::Mindless;
  /// The pattern of the first enabled phase; present iff treatment + mindless.
  std::optional<PerturbationPattern> pattern;
  std::vector<ToggleRecord> toggle_history;

  bool open() const noexcept { return !deactivated_at.has_value(); }
  std::optional<double> duration() const {
    if (!deactivated_at) return std::nullopt;
    return *deactivated_at - activated_at;
  }

  friend bool operator==(const InterventionEpisode&, const InterventionEpisode&) = default;
};

/// Counter-based draws keyed by (seed, episode, slot); identical for live
/// runs and replays.
double unit_draw(std::uint64_t seed, int episode, std::uint64_t slot);
PerturbationPattern pattern_draw(std::uint64_t seed, int episode, std::uint64_t cycle);

/// Index of the enable/disable phase `now` falls in, or nullopt before t0.
std::optional<std::int64_t> cycle_index(double activated_at, double period, double now);

/// Intervention state machine. Time is always supplied by the caller.
///
/// Toggle boundaries are materialized lazily: `advance(now)` appends every
/// boundary at or before `now` to the log at its exact boundary time, so
/// callers that share the log must advance before appending their own events.
class Scheduler {
public:
  explicit Scheduler(SchedulerConfig config, SessionLog* log = nullptr);

  /// Throws StateError if an episode is already active.
  const InterventionEpisode& activate(double now);
  /// Throws StateError if idle.
  InterventionEpisode deactivate(double now);

  Effect current_effect(double now) const;
  void advance(double now);

  /// Switch mode/assignment between parts; StateError while active.
  void reconfigure(Mode mode, bool randomize_condition);

  bool active() const noexcept { return !episodes_.empty() && episodes_.back().open(); }
  const InterventionEpisode* current() const noexcept {
    return active() ? &episodes_.back() : nullptr;
  }
  std::span<const InterventionEpisode> episodes() const noexcept { return episodes_; }
  const SchedulerConfig& config() const noexcept { return config_; }

  /// Rebuilds episodes and toggle history from recorded events only.
  static Scheduler replay(const SessionLog& log, SchedulerConfig config);

private:
  void record(double t, EventKind kind, Json payload);
  void advance_until(double now, bool inclusive);
  std::optional<PerturbationPattern> pattern_for(const InterventionEpisode& e,
                                                 std::int64_t cycle) const;
  bool cycles(const InterventionEpisode& e) const {
    return e.condition == Condition::Treatment && e.mode == Mode::Mindless;
  }

  SchedulerConfig config_;
  SessionLog* log_;
  std::vector<InterventionEpisode> episodes_;
  std::int64_t materialized_cycle_ = 0;  // last boundary index already recorded
};

} // namespace mindless::sched
