#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "mindless/audio/audio_chunk.hpp"

namespace mindless::audio {

struct PcmData {
  int sample_rate = kDefaultSampleRate;
  std::vector<float> samples;
};

/// Reads a 16-bit PCM mono RIFF/WAVE file. Unknown chunks are skipped.
/// Throws UnsupportedFormat for other encodings or channel counts.
PcmData read_wav(const std::filesystem::path& path);

/// Writes a canonical 44-byte-header 16-bit PCM mono WAV.
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate = kDefaultSampleRate);

/// Splits a sample stream into full-length chunks; the last one is
/// zero-padded and marked partial when the length is not a multiple.
std::vector<AudioChunk> chunk_stream(std::span<const float> samples,
                                     int sample_rate = kDefaultSampleRate);

/// Concatenates chunks, dropping the padding of partial chunks.
std::vector<float> join_chunks(std::span<const AudioChunk> chunks);

inline std::vector<AudioChunk> read_pcm(const std::filesystem::path& path) {
  auto pcm = read_wav(path);
  return chunk_stream(pcm.samples, pcm.sample_rate);
}

void write_pcm(const std::filesystem::path& path, std::span<const AudioChunk> chunks);

float from_pcm16(std::int16_t v);
std::int16_t to_pcm16(float v);

} // namespace mindless::audio
