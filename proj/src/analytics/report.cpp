#include "mindless/analytics/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mindless/analytics/episodes.hpp"
#include "mindless/error.hpp"

namespace mindless::analytics {

namespace {

using nlohmann::json;
using sched::EventKind;

struct Omissions {
  json list = json::array();
  void add(std::string metric, std::string reason) {
    list.push_back({{"metric", std::move(metric)}, {"reason", std::move(reason)}});
  }
};

std::vector<StateMark> annotation_marks(const sched::SessionLog& log) {
  std::vector<StateMark> marks;
  for (const auto& ev : log.events()) {
    if (ev.kind != EventKind::Annotation) continue;
    const auto mark = ev.payload.value("mark", std::string{});
    if (mark == kDistractionStart) marks.push_back({ev.t, AttentionState::Distracted});
    else if (mark == kRefocus) marks.push_back({ev.t, AttentionState::Attentive});
  }
  return marks;
}

std::vector<StateMark> detection_marks(const sched::SessionLog& log) {
  std::vector<StateMark> marks;
  for (const auto& ev : log.events()) {
    if (ev.kind != EventKind::DetectionChange) continue;
    const auto s = sensor::attention_state_from_string(ev.payload.value("state", std::string{}));
    if (s) marks.push_back({ev.t, *s});
  }
  return marks;
}

std::optional<double> session_start_time(const sched::SessionLog& log) {
  for (const auto& ev : log.events())
    if (ev.kind == EventKind::SessionStart) return ev.t;
  return std::nullopt;
}

json summary_json(std::span<const double> values) {
  auto j = to_json(summarize(values));
  j["values"] = std::vector<double>(values.begin(), values.end());
  return j;
}

json confusion_json(const ConfusionMatrix& m) {
  return {{"minutes",
           {{"attentive_attentive", m.attentive_attentive},
            {"attentive_distracted", m.attentive_distracted},
            {"distracted_attentive", m.distracted_attentive},
            {"distracted_distracted", m.distracted_distracted}}},
          {"total_minutes", m.total()},
          {"accuracy", m.accuracy()},
          {"precision", m.precision()},
          {"recall", m.recall()}};
}

json episode_json(const Episode& e) {
  json j = {{"start", e.start}, {"end", e.end}, {"open", e.open}};
  j["condition"] = e.condition ? json(sched::to_string(*e.condition)) : json(nullptr);
  j["last_pattern"] = e.last_pattern ? json(audio::to_string(*e.last_pattern)) : json(nullptr);
  json hist = json::array();
  for (auto p : e.pattern_history) hist.push_back(audio::to_string(p));
  j["pattern_history"] = std::move(hist);
  if (!e.open) j["recovery_time"] = e.recovery_time();
  return j;
}

const std::array<std::string_view, 3> kModes = {"mindless", "alerting", "control"};

} // namespace

std::vector<PartSpan> session_parts(const sched::SessionLog& log) {
  std::vector<PartSpan> parts;
  if (log.empty()) return parts;
  const auto events = log.events();
  const double log_end = events.back().t;

  std::vector<json> declared;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::SessionStart) {
      if (ev.payload.contains("parts")) declared = ev.payload.at("parts").get<std::vector<json>>();
      PartSpan p;
      p.start = ev.t;
      if (!declared.empty()) {
        p.part_id = declared[0].value("part_id", std::string{});
        p.mode = declared[0].value("mode", std::string{});
      }
      parts.push_back(p);
    } else if (ev.kind == EventKind::ModeBoundary) {
      if (parts.empty()) parts.push_back(PartSpan{0, "", "", events.front().t, ev.t, false});
      parts.back().end = ev.t;
      PartSpan p;
      p.index = ev.payload.value("index", parts.size());
      p.start = ev.t;
      p.part_id = ev.payload.value("part_id", std::string{});
      p.mode = ev.payload.value("mode", std::string{});
      parts.push_back(p);
    } else if (ev.kind == EventKind::PartDegraded) {
      const auto idx = ev.payload.value("index", parts.empty() ? 0 : parts.size() - 1);
      for (auto& p : parts)
        if (p.index == idx) p.degraded = true;
    } else if (ev.kind == EventKind::SessionEnd) {
      if (!parts.empty()) parts.back().end = ev.t;
      break;
    }
  }
  if (parts.empty()) {
    parts.push_back(PartSpan{0, "", "", events.front().t, log_end, false});
    return parts;
  }
  if (parts.back().end <= parts.back().start) parts.back().end = std::max(parts.back().start, log_end);
  return parts;
}

json build_report(const ReportInput& input) {
  Omissions omissions;
  json sessions = json::array();
  std::vector<Episode> all_episodes;
  std::map<std::string, std::vector<double>> time_by_mode, count_by_mode;
  ConfusionMatrix overall;
  bool any_confusion = false;

  for (const auto& session : input.sessions) {
    json sj = {{"name", session.name}};
    std::vector<Episode> episodes;
    try {
      episodes = extract_episodes(session.log);
    } catch (const DataError& e) {
      omissions.add("episodes:" + session.name, e.what());
    }
    json ej = json::array();
    for (const auto& e : episodes) ej.push_back(episode_json(e));
    sj["episodes"] = std::move(ej);
    all_episodes.insert(all_episodes.end(), episodes.begin(), episodes.end());

    const auto parts = session_parts(session.log);
    const auto marks = annotation_marks(session.log);
    auto det_marks = detection_marks(session.log);
    std::optional<IntervalTrack> external;
    if (session.detections) {
      det_marks.clear();
      const double origin = session_start_time(session.log).value_or(
          session.log.empty() ? 0.0 : session.log.events().front().t);
      external = session.detections->shifted(origin);
    }
    const bool have_detection = !det_marks.empty() || external.has_value();
    if (!have_detection && !parts.empty())
      omissions.add("confusion_matrix:" + session.name, "no detection track");
    if (marks.empty() && !parts.empty())
      omissions.add("annotations:" + session.name, "no annotation marks; distracted time assumes attentive");

    json pj = json::array();
    for (const auto& part : parts) {
      const auto annotated = IntervalTrack::from_marks(LabelSource::Annotation, part.start,
                                                       part.end, AttentionState::Attentive, marks);
      json p = {{"index", part.index},
                {"part_id", part.part_id},
                {"mode", part.mode},
                {"start", part.start},
                {"end", part.end},
                {"degraded", part.degraded},
                {"distracted_time", total_distracted_time(annotated)},
                {"distraction_count", distraction_count(annotated)}};
      if (!part.mode.empty() && !part.degraded) {
        time_by_mode[part.mode].push_back(total_distracted_time(annotated));
        count_by_mode[part.mode].push_back(static_cast<double>(distraction_count(annotated)));
      }
      if (have_detection) {
        std::optional<IntervalTrack> detected;
        std::optional<IntervalTrack> reference;
        if (!det_marks.empty()) {
          detected = IntervalTrack::from_marks(LabelSource::Detection, part.start, part.end,
                                               AttentionState::Attentive, det_marks);
          reference = annotated;
        } else {
          // An external track may start or stop a frame or two off the part
          // edges; compare on the overlap when it covers most of the part.
          const double lo = std::max(part.start, external->start());
          const double hi = std::min(part.end, external->end());
          if (hi - lo >= 0.5 * (part.end - part.start) && hi > lo) {
            detected = external->slice(lo, hi);
            reference = annotated.slice(lo, hi);
          } else {
            omissions.add("confusion_matrix:" + session.name + ":" + std::to_string(part.index),
                          "detection track does not cover the part");
          }
        }
        if (detected) {
          const auto m = confusion_matrix(*reference, *detected);
          p["detection"] = {{"distracted_time", total_distracted_time(*detected)},
                            {"distraction_count", distraction_count(*detected)},
                            {"confusion_matrix", confusion_json(m)}};
          overall += m;
          any_confusion = true;
        }
      }
      pj.push_back(std::move(p));
    }
    sj["parts"] = std::move(pj);
    sessions.push_back(std::move(sj));
  }

  json report;
  report["sessions"] = std::move(sessions);
  std::size_t open = 0;
  for (const auto& e : all_episodes) open += e.open ? 1 : 0;
  report["episode_count"] = all_episodes.size();
  report["open_episode_count"] = open;

  // Recovery time by condition.
  {
    std::vector<double> t, c;
    for (const auto& e : all_episodes) {
      if (e.open || !e.condition) continue;
      (*e.condition == Condition::Treatment ? t : c).push_back(e.recovery_time());
    }
    json rj = {{"treatment", summary_json(t)}, {"control", summary_json(c)}};
    try {
      rj["test"] = to_json(recovery_time_stats(all_episodes).test);
      rj["test"]["direction"] = "control_minus_treatment";
    } catch (const DataError& e) {
      omissions.add("recovery_time.test", e.what());
    }
    report["recovery_time"] = std::move(rj);
  }

  // Pattern attribution.
  {
    const auto c = pattern_counts(all_episodes);
    json rows = json::object();
    for (std::size_t i = 0; i < audio::kAllPatterns.size(); ++i)
      rows[std::string(audio::to_string(audio::kAllPatterns[i]))] = {
          {"last_before_refocus", c.last_before_refocus[i]},
          {"total_occurrence", c.total_occurrence[i]}};
    json pj = {{"patterns", rows}};
    try {
      pj["test"] = to_json(pattern_attribution(c.last_before_refocus, c.total_occurrence).test);
    } catch (const DataError& e) {
      omissions.add("pattern_attribution.test", e.what());
    }
    report["pattern_attribution"] = std::move(pj);
  }

  // Per-mode distracted time and count with one-way ANOVA.
  auto by_mode = [&](const std::map<std::string, std::vector<double>>& m, const std::string& name) {
    json j = json::object();
    std::vector<std::vector<double>> groups;
    std::vector<std::string> labels;
    for (auto mode : kModes) {
      const auto it = m.find(std::string(mode));
      if (it == m.end()) continue;
      j[std::string(mode)] = summary_json(it->second);
      groups.push_back(it->second);
      labels.emplace_back(mode);
    }
    if (groups.empty()) {
      omissions.add(name, "no session parts with a known mode");
      return j;
    }
    try {
      auto a = to_json(one_way_anova(groups));
      a["groups"] = labels;
      j["anova"] = std::move(a);
    } catch (const DataError& e) {
      omissions.add(name + ".anova", e.what());
    }
    return j;
  };
  report["distracted_time_by_mode"] = by_mode(time_by_mode, "distracted_time_by_mode");
  report["distraction_count_by_mode"] = by_mode(count_by_mode, "distraction_count_by_mode");

  if (any_confusion) report["confusion_matrix"] = confusion_json(overall);
  else omissions.add("confusion_matrix", "no detection track for any session");

  json q = json::object();
  for (const auto& [name, scores] : input.questionnaires) {
    json j = {{"before", summary_json(scores.before)}, {"after", summary_json(scores.after)}};
    try {
      j["test"] = to_json(paired_t_test(scores.before, scores.after));
    } catch (const std::exception& e) {
      omissions.add("questionnaire:" + name, e.what());
    }
    q[name] = std::move(j);
  }
  report["questionnaires"] = std::move(q);
  report["omissions"] = std::move(omissions.list);
  return report;
}

namespace {

std::string fmt(const json& v, int precision = 3) {
  if (v.is_number()) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v.get<double>();
    return os.str();
  }
  if (v.is_null()) return "-";
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string percent(const json& v) {
  return v.is_number() ? fmt(v.get<double>() * 100.0, 1) + "%" : "-";
}

std::string test_line(const json& t) {
  std::ostringstream os;
  os << "stat=" << fmt(t.value("statistic", json())) << " df=" << fmt(t.value("df", json()), 0);
  if (t.contains("df2")) os << "," << fmt(t["df2"], 0);
  os << " p=" << fmt(t.value("p_value", json()), 4);
  for (auto key : {"cohens_d", "cramers_v", "eta_squared"})
    if (t.contains(key)) os << ' ' << key << '=' << fmt(t[key], 4);
  return os.str();
}

} // namespace

std::string render_text(const json& report) {
  std::ostringstream os;
  os << "episodes: " << report.value("episode_count", 0) << " (open "
     << report.value("open_episode_count", 0) << ")\n";

  if (const auto it = report.find("recovery_time"); it != report.end()) {
    os << "\nrecovery time (s)\n";
    for (auto cond : {"treatment", "control"}) {
      const auto& g = (*it)[cond];
      os << "  " << std::left << std::setw(10) << cond << " n=" << g.value("n", 0)
         << " mean=" << fmt(g["mean"]) << " sd=" << fmt(g["sd"]) << '\n';
    }
    if (it->contains("test")) os << "  t-test " << test_line((*it)["test"]) << '\n';
  }

  if (const auto it = report.find("pattern_attribution"); it != report.end()) {
    os << "\npattern        last  total\n";
    for (const auto& [name, row] : (*it)["patterns"].items())
      os << "  " << std::left << std::setw(13) << name << std::right << std::setw(4)
         << fmt(row["last_before_refocus"], 0) << std::setw(7) << fmt(row["total_occurrence"], 0)
         << '\n';
    if (it->contains("test")) os << "  chi-square " << test_line((*it)["test"]) << '\n';
  }

  for (auto key : {"distracted_time_by_mode", "distraction_count_by_mode"}) {
    const auto it = report.find(key);
    if (it == report.end() || it->empty()) continue;
    os << '\n' << key << '\n';
    for (const auto& [mode, g] : it->items()) {
      if (mode == "anova") continue;
      os << "  " << std::left << std::setw(10) << mode << " n=" << g.value("n", 0)
         << " mean=" << fmt(g["mean"]) << " sd=" << fmt(g["sd"]) << '\n';
    }
    if (it->contains("anova")) {
      const auto& a = (*it)["anova"];
      os << "  anova " << test_line(a) << '\n';
      const auto groups = a.value("groups", std::vector<std::string>{});
      for (const auto& c : a["post_hoc"])
        os << "    " << groups.at(c["first"].get<std::size_t>()) << " vs "
           << groups.at(c["second"].get<std::size_t>()) << ": " << test_line(c)
           << " p_bonferroni=" << fmt(c["p_adjusted"], 4) << '\n';
    }
  }

  if (const auto it = report.find("confusion_matrix"); it != report.end()) {
    const auto& m = (*it)["minutes"];
    os << "\nconfusion matrix (minutes; rows annotation, columns detection)\n"
       << "              attentive  distracted\n"
       << "  attentive   " << std::setw(9) << fmt(m["attentive_attentive"], 1) << std::setw(12)
       << fmt(m["attentive_distracted"], 1) << '\n'
       << "  distracted  " << std::setw(9) << fmt(m["distracted_attentive"], 1) << std::setw(12)
       << fmt(m["distracted_distracted"], 1) << '\n'
       << "  accuracy " << percent((*it)["accuracy"]) << "  precision " << percent((*it)["precision"])
       << '\n';
  }

  if (const auto it = report.find("questionnaires"); it != report.end())
    for (const auto& [name, q] : it->items())
      if (q.contains("test")) os << "\nquestionnaire " << name << ": " << test_line(q["test"]) << '\n';

  if (const auto it = report.find("omissions"); it != report.end() && !it->empty()) {
    os << "\nomitted\n";
    for (const auto& o : *it)
      os << "  " << o.value("metric", "") << ": " << o.value("reason", "") << '\n';
  }
  return os.str();
}

} // namespace mindless::analytics
