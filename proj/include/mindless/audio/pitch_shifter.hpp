#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "mindless/audio/audio_chunk.hpp"

namespace mindless::audio {

struct PitchShifterConfig {
  int sample_rate = kDefaultSampleRate;
  std::size_t window = 1024;
  std::size_t hop = 256;
};

inline constexpr double kMinPitchRatio = 0.5;
inline constexpr double kMaxPitchRatio = 2.0;

/// Streaming pitch shifter: a phase vocoder stretches time by the ratio, then
/// a linear-interpolation resampler reads the stretched stream at `ratio`
/// samples per output sample. Output length always equals input length; the
/// stream carries a constant latency of `latency()` samples.
///
/// Synthesis hops are integers whose running sum tracks `hop * ratio`, and the
/// overlap-add is normalized by the accumulated squared window, so the ratio
/// may change between calls without drifting the stream.
class PitchShifter {
public:
  explicit PitchShifter(PitchShifterConfig config = {});
  ~PitchShifter();
  PitchShifter(PitchShifter&&) noexcept;
  PitchShifter& operator=(PitchShifter&&) noexcept;
  PitchShifter(const PitchShifter&) = delete;
  PitchShifter& operator=(const PitchShifter&) = delete;

  /// Throws InvalidArgument if ratio is outside [0.5, 2.0] or the chunk rate
  /// does not match the configured rate.
  AudioChunk process(const AudioChunk& chunk, double ratio);

  void reset();

  const PitchShifterConfig& config() const noexcept { return config_; }
  std::size_t latency() const noexcept { return config_.window + config_.hop; }
  /// Output samples that had to be zero-filled because the stretched stream
  /// ran dry. Stays zero in steady operation.
  std::uint64_t underruns() const noexcept { return underruns_; }

private:
  struct Fft;

  void analyze_frame(double ratio);
  float read_stretched(double position);
  void compact();

  PitchShifterConfig config_;
  std::unique_ptr<Fft> fft_;
  std::vector<double> window_;

  // Input samples not yet consumed by an analysis frame.
  std::vector<double> input_;
  std::vector<double> prev_phase_;
  std::vector<double> synth_phase_;
  bool first_frame_ = true;

  // Overlap-add accumulators for the time-stretched stream. Index 0 of these
  // vectors corresponds to absolute stretched position `stretched_base_`.
  std::vector<double> ola_;
  std::vector<double> norm_;
  std::int64_t stretched_base_ = 0;
  std::int64_t synth_pos_ = 0;     // where the next frame is added
  double synth_pos_exact_ = 0.0;   // fractional running sum of hops
  double read_pos_ = 0.0;          // resampler position in the stretched stream
  std::uint64_t underruns_ = 0;
};

} // namespace mindless::audio
