#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mindless/sensor/calibration.hpp"

namespace mindless::analytics {

using sensor::AttentionState;

enum class LabelSource { Annotation, Detection };

struct Interval {
  double start = 0.0;
  double end = 0.0;
  AttentionState state = AttentionState::Attentive;
  double length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct StateMark {
  double t = 0.0;
  AttentionState state = AttentionState::Attentive;
};

/// Alternating attentive/distracted intervals covering [start, end] exactly.
class IntervalTrack {
public:
  IntervalTrack(LabelSource source, double start, double end);

  /// Builds a track from state marks; marks outside [start, end] are clipped
  /// and repeated states merged. `initial` holds until the first mark.
  static IntervalTrack from_marks(LabelSource source, double start, double end,
                                  AttentionState initial, std::span<const StateMark> marks);
  static IntervalTrack from_intervals(LabelSource source, std::vector<Interval> intervals);

  LabelSource source() const noexcept { return source_; }
  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  double span() const noexcept { return end_ - start_; }
  std::span<const Interval> intervals() const noexcept { return intervals_; }

  /// Portion of the track inside [a, b] (clamped to the track span).
  IntervalTrack slice(double a, double b) const;
  IntervalTrack shifted(double offset) const;
  IntervalTrack scaled(double factor) const;

private:
  void push(double a, double b, AttentionState s);

  LabelSource source_;
  double start_;
  double end_;
  std::vector<Interval> intervals_;
};

double total_distracted_time(const IntervalTrack& track);
std::size_t distraction_count(const IntervalTrack& track);

/// Duration-weighted overlap in minutes; rows are the annotation, columns the
/// detection. "Distracted" is the positive class.
struct ConfusionMatrix {
  double attentive_attentive = 0.0;
  double attentive_distracted = 0.0;
  double distracted_attentive = 0.0;
  double distracted_distracted = 0.0;

  double total() const;
  double accuracy() const;
  double precision() const;
  double recall() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

/// Throws DataError if the two tracks do not cover the same span.
ConfusionMatrix confusion_matrix(const IntervalTrack& annotation, const IntervalTrack& detection);

/// `*.detections.jsonl`: one {"end":..,"start":..,"state":..} interval per line.
void write_track(const std::filesystem::path& path, const IntervalTrack& track);
IntervalTrack read_track(const std::filesystem::path& path, LabelSource source);

} // namespace mindless::analytics
