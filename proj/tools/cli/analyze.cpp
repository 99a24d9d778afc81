#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "mindless/analytics/report.hpp"
#include "mindless/error.hpp"

namespace mindless::cli {

namespace {

using nlohmann::json;

void write_text(const Path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string session_name(const Path& events) {
  auto name = events.filename().string();
  for (const std::string suffix : {".events.jsonl", ".jsonl"})
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      return name.substr(0, name.size() - suffix.size());
  return name;
}

// {"<instrument>": {"before": [...], "after": [...]}}
std::map<std::string, analytics::PairedScores> read_scores(const Path& path) {
  std::ifstream in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DecodeError(e.byte, e.what());
  }
  std::map<std::string, analytics::PairedScores> out;
  if (!j.is_object()) throw DataError("scores file must be a JSON object");
  for (const auto& [name, v] : j.items()) {
    try {
      out[name] = {v.at("before").get<std::vector<double>>(), v.at("after").get<std::vector<double>>()};
    } catch (const json::exception& e) {
      throw DataError("scores." + name + ": " + e.what());
    }
  }
  return out;
}

} // namespace

void analyze(const AnalyzeOptions& o) {
  if (o.events.empty()) throw UsageError("at least one --events file is needed");
  if (o.detections.size() > o.events.size())
    throw UsageError("more --detections than --events files");
  for (const auto& p : o.events)
    if (!std::filesystem::exists(p)) throw DataError("no such events file: " + p.string());
  for (const auto& p : o.detections)
    if (!std::filesystem::exists(p)) throw DataError("no such detections file: " + p.string());
  if (o.scores && !std::filesystem::exists(*o.scores))
    throw DataError("no such scores file: " + o.scores->string());

  analytics::ReportInput input;
  for (std::size_t i = 0; i < o.events.size(); ++i) {
    analytics::SessionInput s;
    s.name = session_name(o.events[i]);
    s.log = sched::SessionLog::read(o.events[i]);
    if (i < o.detections.size())
      s.detections = analytics::read_track(o.detections[i], analytics::LabelSource::Detection);
    input.sessions.push_back(std::move(s));
  }
  if (o.scores) input.questionnaires = read_scores(*o.scores);

  const auto report = analytics::build_report(input);
  write_text(o.report, report.dump(2) + "\n");
  if (o.text) write_text(*o.text, analytics::render_text(report));
  if (o.svg) write_text(*o.svg, analytics::render_svg(report));
}

} // namespace mindless::cli
