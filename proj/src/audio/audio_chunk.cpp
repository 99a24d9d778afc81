#include "mindless/audio/audio_chunk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mindless/error.hpp"

namespace mindless::audio {

AudioChunk AudioChunk::silence(std::int64_t start_index, int sample_rate) {
  AudioChunk c;
  c.samples.assign(chunk_length(sample_rate), 0.0f);
  c.sample_rate = sample_rate;
  c.start_index = start_index;
  c.valid = c.samples.size();
  return c;
}

AudioChunk AudioChunk::from_samples(std::span<const float> samples, std::int64_t start_index,
                                    int sample_rate) {
  AudioChunk c;
  c.samples.assign(samples.begin(), samples.end());
  c.sample_rate = sample_rate;
  c.start_index = start_index;
  c.valid = c.samples.size();
  return c;
}

void validate(const AudioChunk& chunk) {
  if (chunk.sample_rate <= 0 || chunk.sample_rate % kChunksPerSecond != 0)
    throw InvalidArgument("sample rate must be a positive multiple of 16, got " +
                          std::to_string(chunk.sample_rate));
  if (chunk.samples.size() != chunk_length(chunk.sample_rate))
    throw InvalidArgument("chunk length " + std::to_string(chunk.samples.size()) +
                          " != " + std::to_string(chunk_length(chunk.sample_rate)));
  if (chunk.valid > chunk.samples.size())
    throw InvalidArgument("valid sample count exceeds chunk length");
  const bool in_range = std::all_of(chunk.samples.begin(), chunk.samples.end(), [](float s) {
    return std::isfinite(s) && s >= -1.0f && s <= 1.0f;
  });
  if (!in_range) throw InvalidArgument("chunk sample outside [-1, 1]");
}

} // namespace mindless::audio
