#include "mindless/audio/wav_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mindless/error.hpp"

namespace mindless::audio {

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

} // namespace

float from_pcm16(std::int16_t v) { return static_cast<float>(v) / 32768.0f; }

std::int16_t to_pcm16(float v) {
  const float scaled = std::round(v * 32768.0f);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0f, 32767.0f));
}

PcmData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), {}};
  const std::string name = path.string();

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw UnsupportedFormat(name + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  PcmData pcm;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = le32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size() && std::memcmp(hdr, "data", 4) != 0)
      throw UnsupportedFormat(name + ": truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw UnsupportedFormat(name + ": short fmt chunk");
      const auto format = le16(bytes.data() + body);
      const auto channels = le16(bytes.data() + body + 2);
      pcm.sample_rate = static_cast<int>(le32(bytes.data() + body + 4));
      const auto bits = le16(bytes.data() + body + 14);
      if (format != 1) throw UnsupportedFormat(name + ": only PCM encoding is supported");
      if (channels != 1)
        throw UnsupportedFormat(name + ": expected mono, got " + std::to_string(channels) +
                                " channels");
      if (bits != 16)
        throw UnsupportedFormat(name + ": expected 16-bit samples, got " + std::to_string(bits));
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw UnsupportedFormat(name + ": data chunk before fmt chunk");
      // Tolerate writers that leave the size field unset on streams.
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      pcm.samples.reserve(avail / 2);
      for (std::size_t i = 0; i + 1 < avail; i += 2)
        pcm.samples.push_back(from_pcm16(static_cast<std::int16_t>(le16(bytes.data() + body + i))));
      return pcm;
    }
    pos = body + size + (size & 1);
  }
  throw UnsupportedFormat(name + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (float s : samples) put16(out, static_cast<std::uint16_t>(to_pcm16(s)));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::vector<AudioChunk> chunk_stream(std::span<const float> samples, int sample_rate) {
  const std::size_t len = chunk_length(sample_rate);
  std::vector<AudioChunk> chunks;
  for (std::size_t start = 0; start < samples.size(); start += len) {
    const std::size_t n = std::min(len, samples.size() - start);
    AudioChunk c = AudioChunk::silence(static_cast<std::int64_t>(start), sample_rate);
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start), n, c.samples.begin());
    c.valid = n;
    chunks.push_back(std::move(c));
  }
  return chunks;
}

std::vector<float> join_chunks(std::span<const AudioChunk> chunks) {
  std::vector<float> out;
  for (const auto& c : chunks)
    out.insert(out.end(), c.samples.begin(),
               c.samples.begin() + static_cast<std::ptrdiff_t>(c.valid));
  return out;
}

void write_pcm(const std::filesystem::path& path, std::span<const AudioChunk> chunks) {
  const int rate = chunks.empty() ? kDefaultSampleRate : chunks.front().sample_rate;
  write_wav(path, join_chunks(chunks), rate);
}

} // namespace mindless::audio
