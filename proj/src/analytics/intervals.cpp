#include "mindless/analytics/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mindless/error.hpp"

namespace mindless::analytics {

namespace {

constexpr double kSpanTolerance = 1e-6;

} // namespace

IntervalTrack::IntervalTrack(LabelSource source, double start, double end)
    : source_(source), start_(start), end_(end) {
  if (!std::isfinite(start) || !std::isfinite(end) || end < start)
    throw InvalidArgument("interval track needs finite start <= end");
}

void IntervalTrack::push(double a, double b, AttentionState s) {
  if (b <= a) return;
  if (!intervals_.empty() && intervals_.back().state == s) {
    intervals_.back().end = b;
    return;
  }
  intervals_.push_back({a, b, s});
}

IntervalTrack IntervalTrack::from_marks(LabelSource source, double start, double end,
                                        AttentionState initial,
                                        std::span<const StateMark> marks) {
  IntervalTrack track(source, start, end);
  AttentionState state = initial;
  double cursor = start;
  for (const auto& m : marks) {
    if (m.t <= start) {
      state = m.state;
      continue;
    }
    if (m.t >= end) break;
    track.push(cursor, m.t, state);
    cursor = m.t;
    state = m.state;
  }
  track.push(cursor, end, state);
  return track;
}

IntervalTrack IntervalTrack::from_intervals(LabelSource source, std::vector<Interval> intervals) {
  if (intervals.empty()) throw InvalidArgument("interval track needs at least one interval");
  IntervalTrack track(source, intervals.front().start, intervals.back().end);
  double cursor = track.start_;
  for (const auto& iv : intervals) {
    if (std::abs(iv.start - cursor) > kSpanTolerance || iv.end < iv.start)
      throw InvalidArgument("intervals must be contiguous and ordered");
    track.push(cursor, iv.end, iv.state);
    cursor = iv.end;
  }
  return track;
}

IntervalTrack IntervalTrack::slice(double a, double b) const {
  a = std::clamp(a, start_, end_);
  b = std::clamp(b, a, end_);
  IntervalTrack out(source_, a, b);
  for (const auto& iv : intervals_) out.push(std::max(iv.start, a), std::min(iv.end, b), iv.state);
  return out;
}

IntervalTrack IntervalTrack::shifted(double offset) const {
  IntervalTrack out(source_, start_ + offset, end_ + offset);
  for (const auto& iv : intervals_) out.push(iv.start + offset, iv.end + offset, iv.state);
  return out;
}

IntervalTrack IntervalTrack::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidArgument("scale factor must be positive");
  IntervalTrack out(source_, start_ * factor, end_ * factor);
  for (const auto& iv : intervals_) out.push(iv.start * factor, iv.end * factor, iv.state);
  return out;
}

double total_distracted_time(const IntervalTrack& track) {
  double total = 0.0;
  for (const auto& iv : track.intervals())
    if (iv.state == AttentionState::Distracted) total += iv.length();
  return total;
}

std::size_t distraction_count(const IntervalTrack& track) {
  return static_cast<std::size_t>(
      std::count_if(track.intervals().begin(), track.intervals().end(),
                    [](const Interval& iv) { return iv.state == AttentionState::Distracted; }));
}

double ConfusionMatrix::total() const {
  return attentive_attentive + attentive_distracted + distracted_attentive +
         distracted_distracted;
}

double ConfusionMatrix::accuracy() const {
  const double t = total();
  return t > 0.0 ? (attentive_attentive + distracted_distracted) / t : 0.0;
}

double ConfusionMatrix::precision() const {
  const double predicted = attentive_distracted + distracted_distracted;
  return predicted > 0.0 ? distracted_distracted / predicted : 0.0;
}

double ConfusionMatrix::recall() const {
  const double actual = distracted_attentive + distracted_distracted;
  return actual > 0.0 ? distracted_distracted / actual : 0.0;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  attentive_attentive += o.attentive_attentive;
  attentive_distracted += o.attentive_distracted;
  distracted_attentive += o.distracted_attentive;
  distracted_distracted += o.distracted_distracted;
  return *this;
}

ConfusionMatrix confusion_matrix(const IntervalTrack& annotation, const IntervalTrack& detection) {
  if (std::abs(annotation.start() - detection.start()) > kSpanTolerance ||
      std::abs(annotation.end() - detection.end()) > kSpanTolerance)
    throw DataError("annotation and detection tracks cover different spans");

  ConfusionMatrix m;
  const auto a = annotation.intervals();
  const auto d = detection.intervals();
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < d.size()) {
    const double lo = std::max(a[i].start, d[j].start);
    const double hi = std::min(a[i].end, d[j].end);
    if (hi > lo) {
      const double minutes = (hi - lo) / 60.0;
      const bool ad = a[i].state == AttentionState::Distracted;
      const bool dd = d[j].state == AttentionState::Distracted;
      (ad ? (dd ? m.distracted_distracted : m.distracted_attentive)
          : (dd ? m.attentive_distracted : m.attentive_attentive)) += minutes;
    }
    if (a[i].end < d[j].end) ++i;
    else ++j;
  }
  return m;
}

void write_track(const std::filesystem::path& path, const IntervalTrack& track) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& iv : track.intervals()) {
    nlohmann::json j = {{"end", iv.end}, {"start", iv.start}, {"state", sensor::to_string(iv.state)}};
    out << j.dump() << '\n';
  }
  if (track.intervals().empty()) {
    // A zero-length track still records its position.
    nlohmann::json j = {{"end", track.end()}, {"start", track.start()}, {"state", "attentive"}};
    out << j.dump() << '\n';
  }
}

IntervalTrack read_track(const std::filesystem::path& path, LabelSource source) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Interval> intervals;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t here = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto state = sensor::attention_state_from_string(j.at("state").get<std::string>());
      if (!state) throw DecodeError(here, "unknown state");
      intervals.push_back({j.at("start").get<double>(), j.at("end").get<double>(), *state});
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError(here, e.what());
    }
  }
  if (intervals.empty()) throw DataError(path.string() + " holds no intervals");
  if (intervals.size() == 1 && intervals.front().length() == 0.0)
    return IntervalTrack(source, intervals.front().start, intervals.front().end);
  try {
    return IntervalTrack::from_intervals(source, std::move(intervals));
  } catch (const InvalidArgument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

} // namespace mindless::analytics
