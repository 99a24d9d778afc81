#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mindless::audio {

inline constexpr int kDefaultSampleRate = 16000;
inline constexpr int kChunksPerSecond = 16;

constexpr std::size_t chunk_length(int sample_rate) {
  return static_cast<std::size_t>(sample_rate / kChunksPerSecond);
}

/// Fixed-duration mono buffer; the unit of real-time processing.
///
/// `samples.size()` is always the full chunk length. A chunk read from the
/// tail of a file may carry fewer real samples than that; the rest are zero
/// padding and `valid` says how many are real.
struct AudioChunk {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;
  std::int64_t start_index = 0;
  std::size_t valid = 0;

  static AudioChunk silence(std::int64_t start_index, int sample_rate = kDefaultSampleRate);
  static AudioChunk from_samples(std::span<const float> samples, std::int64_t start_index,
                                 int sample_rate = kDefaultSampleRate);

  std::size_t size() const noexcept { return samples.size(); }
  bool partial() const noexcept { return valid < samples.size(); }
  double start_time() const noexcept {
    return static_cast<double>(start_index) / sample_rate;
  }
  double duration() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Throws InvalidArgument unless the chunk has the canonical length for its
/// rate and every sample lies in [-1, 1].
void validate(const AudioChunk& chunk);

} // namespace mindless::audio
