#include "mindless/scheduler/scheduler.hpp"

#include <cmath>
#include <string>

#include "mindless/error.hpp"

namespace mindless::sched {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, int episode, std::uint64_t slot) {
  return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(episode)) ^ slot);
}

// Slot 0 decides the condition; slots 1.. decide patterns per cycle.
constexpr std::uint64_t kConditionSlot = 0;

// Boundary arithmetic tolerates accumulated floating error in timestamps.
constexpr double kBoundaryEpsilon = 1e-9;

int episode_of(const Json& payload) { return payload.at("episode").get<int>(); }

} // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Mindless: return "mindless";
    case Mode::Alerting: return "alerting";
    case Mode::Control: return "control";
  }
  return "?";
}

std::string_view to_string(Condition c) {
  return c == Condition::Treatment ? "treatment" : "control";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  if (s == "mindless") return Mode::Mindless;
  if (s == "alerting") return Mode::Alerting;
  if (s == "control") return Mode::Control;
  return std::nullopt;
}

std::optional<Condition> condition_from_string(std::string_view s) {
  if (s == "treatment") return Condition::Treatment;
  if (s == "control") return Condition::Control;
  return std::nullopt;
}

void SchedulerConfig::validate() const {
  if (!(toggle_period > 0.0) || !std::isfinite(toggle_period))
    throw InvalidArgument("toggle_period must be positive");
  if (!(treatment_probability >= 0.0 && treatment_probability <= 1.0))
    throw InvalidArgument("treatment_probability must be in [0, 1]");
}

double unit_draw(std::uint64_t seed, int episode, std::uint64_t slot) {
  return static_cast<double>(mix(seed, episode, slot) >> 11) * 0x1.0p-53;
}

PerturbationPattern pattern_draw(std::uint64_t seed, int episode, std::uint64_t cycle) {
  return audio::kAllPatterns[mix(seed, episode, 1 + cycle) >> 62];
}

std::optional<std::int64_t> cycle_index(double activated_at, double period, double now) {
  const double phase = (now - activated_at) / period;
  if (phase < -kBoundaryEpsilon) return std::nullopt;
  return static_cast<std::int64_t>(std::floor(phase + kBoundaryEpsilon));
}

Scheduler::Scheduler(SchedulerConfig config, SessionLog* log) : config_(config), log_(log) {
  config_.validate();
}

void Scheduler::record(double t, EventKind kind, Json payload) {
  if (log_) log_->append(t, kind, std::move(payload));
}

std::optional<PerturbationPattern> Scheduler::pattern_for(const InterventionEpisode& e,
                                                          std::int64_t cycle) const {
  if (!cycles(e)) return std::nullopt;
  if (!config_.per_cycle_patterns || cycle == 0) return e.pattern;
  return pattern_draw(config_.rng_seed, e.id, static_cast<std::uint64_t>(cycle));
}

const InterventionEpisode& Scheduler::activate(double now) {
  if (active())
    throw StateError("activate while episode " + std::to_string(episodes_.back().id) +
                     " is active");
  advance(now);

  InterventionEpisode e;
  e.id = static_cast<int>(episodes_.size()) + 1;
  e.activated_at = now;
  e.mode = config_.mode;
  if (config_.randomize_condition) {
    e.condition = unit_draw(config_.rng_seed, e.id, kConditionSlot) < config_.treatment_probability
                      ? Condition::Treatment
                      : Condition::Control;
  } else {
    e.condition = config_.mode == Mode::Control ? Condition::Control : Condition::Treatment;
  }
  if (cycles(e)) e.pattern = pattern_draw(config_.rng_seed, e.id, 0);

  record(now, EventKind::ConditionAssigned,
         {{"episode", e.id}, {"condition", to_string(e.condition)}});
  if (e.pattern)
    record(now, EventKind::PatternSelected,
           {{"episode", e.id}, {"cycle", 0}, {"pattern", audio::to_string(*e.pattern)}});
  record(now, EventKind::Activate,
         {{"episode", e.id}, {"mode", to_string(e.mode)}, {"toggle_period", config_.toggle_period}});

  if (e.condition == Condition::Treatment && e.mode != Mode::Control) {
    e.toggle_history.push_back({now, true, e.pattern});
    Json payload = {{"episode", e.id}, {"cycle", 0}};
    if (e.pattern) payload["pattern"] = audio::to_string(*e.pattern);
    record(now, EventKind::ToggleOn, std::move(payload));
  }
  materialized_cycle_ = 0;
  episodes_.push_back(std::move(e));
  return episodes_.back();
}

InterventionEpisode Scheduler::deactivate(double now) {
  if (!active()) throw StateError("deactivate while idle");
  auto& e = episodes_.back();
  if (now <= e.activated_at)
    throw InvalidArgument("deactivation must come after activation");
  // Boundaries that coincide with the deactivation are not materialized.
  advance_until(now, false);
  e.deactivated_at = now;
  record(now, EventKind::Deactivate, {{"episode", e.id}});
  return e;
}

void Scheduler::advance(double now) { advance_until(now, true); }

void Scheduler::advance_until(double now, bool inclusive) {
  if (!active()) return;
  auto& e = episodes_.back();
  if (!cycles(e)) return;
  const auto idx = cycle_index(e.activated_at, config_.toggle_period, now);
  if (!idx) return;
  std::int64_t last = *idx;
  if (!inclusive &&
      std::abs(e.activated_at + static_cast<double>(last) * config_.toggle_period - now) <=
          kBoundaryEpsilon * config_.toggle_period)
    --last;
  for (std::int64_t c = materialized_cycle_ + 1; c <= last; ++c) {
    const double t = e.activated_at + static_cast<double>(c) * config_.toggle_period;
    const bool enabled = c % 2 == 0;
    if (enabled) {
      const auto p = pattern_for(e, c);
      if (config_.per_cycle_patterns)
        record(t, EventKind::PatternSelected,
               {{"episode", e.id}, {"cycle", c}, {"pattern", audio::to_string(*p)}});
      e.toggle_history.push_back({t, true, p});
      record(t, EventKind::ToggleOn,
             {{"episode", e.id}, {"cycle", c}, {"pattern", audio::to_string(*p)}});
    } else {
      e.toggle_history.push_back({t, false, std::nullopt});
      record(t, EventKind::ToggleOff, {{"episode", e.id}, {"cycle", c}});
    }
  }
  materialized_cycle_ = std::max(materialized_cycle_, last);
}

Effect Scheduler::current_effect(double now) const {
  if (!active()) return Effect::none();
  const auto& e = episodes_.back();
  if (now < e.activated_at || e.condition == Condition::Control) return Effect::none();
  switch (e.mode) {
    case Mode::Control: return Effect::none();
    case Mode::Alerting: return Effect::alert();
    case Mode::Mindless: {
      const auto idx = cycle_index(e.activated_at, config_.toggle_period, now);
      if (!idx || *idx % 2 != 0) return Effect::none();
      return Effect::mindless(*pattern_for(e, *idx));
    }
  }
  return Effect::none();
}

void Scheduler::reconfigure(Mode mode, bool randomize_condition) {
  if (active()) throw StateError("cannot change mode during an active episode");
  config_.mode = mode;
  config_.randomize_condition = randomize_condition;
}

Scheduler Scheduler::replay(const SessionLog& log, SchedulerConfig config) {
  Scheduler s(config, nullptr);
  for (const auto& ev : log.events()) {
    switch (ev.kind) {
      case EventKind::ConditionAssigned: {
        if (s.active()) throw DataError("condition assigned during an active episode");
        InterventionEpisode e;
        e.id = episode_of(ev.payload);
        e.activated_at = ev.t;
        e.condition = *condition_from_string(ev.payload.at("condition").get<std::string>());
        s.episodes_.push_back(std::move(e));
        break;
      }
      case EventKind::PatternSelected: {
        if (ev.payload.value("cycle", 0) == 0 && !s.episodes_.empty())
          s.episodes_.back().pattern =
              audio::pattern_from_string(ev.payload.at("pattern").get<std::string>());
        break;
      }
      case EventKind::Activate: {
        if (s.episodes_.empty() || s.episodes_.back().id != episode_of(ev.payload))
          throw DataError("activate without condition assignment at t=" + std::to_string(ev.t));
        auto& e = s.episodes_.back();
        e.mode = *mode_from_string(ev.payload.at("mode").get<std::string>());
        s.config_.mode = e.mode;
        s.materialized_cycle_ = 0;
        break;
      }
      case EventKind::ToggleOn:
      case EventKind::ToggleOff: {
        if (!s.active()) throw DataError("toggle outside an episode at t=" + std::to_string(ev.t));
        auto& e = s.episodes_.back();
        ToggleRecord r{ev.t, ev.kind == EventKind::ToggleOn, std::nullopt};
        if (ev.payload.contains("pattern"))
          r.pattern = audio::pattern_from_string(ev.payload.at("pattern").get<std::string>());
        e.toggle_history.push_back(r);
        s.materialized_cycle_ = ev.payload.value("cycle", std::int64_t{0});
        break;
      }
      case EventKind::Deactivate: {
        if (!s.active()) throw DataError("deactivate while idle at t=" + std::to_string(ev.t));
        s.episodes_.back().deactivated_at = ev.t;
        break;
      }
      default:
        break;
    }
  }
  return s;
}

} // namespace mindless::sched
