#include "mindless/analytics/episodes.hpp"

#include <sstream>

#include "mindless/error.hpp"

namespace mindless::analytics {

namespace {

using sched::EventKind;

std::string at_time(double t) {
  std::ostringstream os;
  os << "t=" << t;
  return os.str();
}

std::optional<std::string> annotation_mark(const sched::SessionEvent& ev) {
  if (ev.kind != EventKind::Annotation || !ev.payload.is_object()) return std::nullopt;
  const auto it = ev.payload.find("mark");
  if (it == ev.payload.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::size_t pattern_index(PerturbationPattern p) { return static_cast<std::size_t>(p); }

} // namespace

std::vector<Episode> extract_episodes(const sched::SessionLog& log) {
  std::vector<Episode> out;
  std::optional<Episode> current;
  // Intervention state carried across annotations: the pattern currently
  // audible and the condition of the most recent assignment.
  std::optional<PerturbationPattern> audible;
  std::optional<Condition> assigned;
  double last_t = 0.0;

  for (const auto& ev : log.events()) {
    last_t = ev.t;
    switch (ev.kind) {
      case EventKind::ConditionAssigned: {
        assigned = sched::condition_from_string(ev.payload.value("condition", std::string{}));
        if (current) current->condition = assigned;
        break;
      }
      case EventKind::ToggleOn: {
        audible.reset();
        if (ev.payload.contains("pattern"))
          audible = audio::pattern_from_string(ev.payload.at("pattern").get<std::string>());
        if (current && audible) {
          current->pattern_history.push_back(*audible);
          current->last_pattern = audible;
        }
        break;
      }
      case EventKind::ToggleOff:
      case EventKind::Deactivate:
        audible.reset();
        break;
      case EventKind::Annotation: {
        const auto mark = annotation_mark(ev);
        if (mark == kDistractionStart) {
          if (current)
            throw DataError("second distraction_start at " + at_time(ev.t) +
                            " before refocus of the one at " + at_time(current->start));
          current = Episode{};
          current->start = ev.t;
          // An assignment made since the last refocus belongs to this episode.
          current->condition = assigned;
          if (audible) {
            current->pattern_history.push_back(*audible);
            current->last_pattern = audible;
          }
        } else if (mark == kRefocus) {
          if (!current) throw DataError("refocus without distraction_start at " + at_time(ev.t));
          current->end = ev.t;
          out.push_back(std::move(*current));
          current.reset();
          assigned.reset();
        }
        break;
      }
      default:
        break;
    }
  }
  if (current) {
    current->open = true;
    current->end = last_t;
    out.push_back(std::move(*current));
  }
  return out;
}

RecoveryStats recovery_time_stats(std::span<const Episode> episodes) {
  std::vector<double> treatment, control;
  for (const auto& e : episodes) {
    if (e.open || !e.condition) continue;
    (*e.condition == Condition::Treatment ? treatment : control).push_back(e.recovery_time());
  }
  if (treatment.size() < 2 || control.size() < 2)
    throw InsufficientData("recovery-time comparison needs at least 2 closed episodes per condition");
  RecoveryStats s;
  s.treatment = summarize(treatment);
  s.control = summarize(control);
  s.test = unpaired_t_test(control, treatment);
  return s;
}

PatternCounts pattern_counts(std::span<const Episode> episodes) {
  PatternCounts c;
  for (const auto& e : episodes) {
    if (e.open || e.condition != Condition::Treatment) continue;
    for (auto p : e.pattern_history) c.total_occurrence[pattern_index(p)] += 1.0;
    if (e.last_pattern) c.last_before_refocus[pattern_index(*e.last_pattern)] += 1.0;
  }
  return c;
}

PatternAttribution pattern_attribution(std::span<const Episode> episodes) {
  const auto c = pattern_counts(episodes);
  return pattern_attribution(c.last_before_refocus, c.total_occurrence);
}

PatternAttribution pattern_attribution(const std::array<double, 4>& last_before_refocus,
                                       const std::array<double, 4>& total_occurrence) {
  PatternAttribution a;
  a.last_before_refocus = last_before_refocus;
  a.total_occurrence = total_occurrence;
  const Table table = {
      {last_before_refocus.begin(), last_before_refocus.end()},
      {total_occurrence.begin(), total_occurrence.end()},
  };
  a.test = chi_square_contingency(table);
  return a;
}

} // namespace mindless::analytics
