#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "mindless/audio/audio_chunk.hpp"
#include "mindless/audio/beep.hpp"
#include "mindless/audio/engine.hpp"
#include "mindless/audio/gain.hpp"
#include "mindless/audio/pitch_shifter.hpp"
#include "mindless/audio/wav_io.hpp"
#include "mindless/error.hpp"
#include "../support/spectrum_oracle.hpp"

using namespace mindless::audio;

namespace {

std::vector<float> tone(double freq, double seconds, double amp = 0.5, int rate = 16000) {
  std::vector<float> x(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * freq * i / rate));
  return x;
}

std::vector<float> shift_stream(const std::vector<float>& in, double ratio) {
  PitchShifter shifter;
  std::vector<float> out;
  for (const auto& c : chunk_stream(in)) {
    auto o = shifter.process(c, ratio);
    out.insert(out.end(), o.samples.begin(), o.samples.end());
  }
  CHECK(shifter.underruns() == 0);
  return out;
}

// Steady-state tail: skip the first second (latency + vocoder warm-up).
std::span<const float> steady(const std::vector<float>& x) {
  return std::span<const float>(x).subspan(16000, 16000);
}

} // namespace

TEST_CASE("apply_gain scales and clamps") {
  auto c = AudioChunk::silence(0);
  c.samples[0] = 0.1f;
  c.samples[1] = -0.2f;
  c.samples[2] = 0.8f;
  auto out = apply_gain(c, 2.0);
  CHECK(out.samples[0] == doctest::Approx(0.2f));
  CHECK(out.samples[1] == doctest::Approx(-0.4f));
  CHECK(out.samples[2] == 1.0f);
  CHECK(out.size() == c.size());

  CHECK(apply_gain(c, 1.0).samples == c.samples);

  CHECK_THROWS_AS(apply_gain(c, 0.0), mindless::InvalidArgument);
  CHECK_THROWS_AS(apply_gain(c, -1.0), mindless::InvalidArgument);
  CHECK_THROWS_AS(apply_gain(c, std::nan("")), mindless::InvalidArgument);
  CHECK_THROWS_AS(apply_gain(c, INFINITY), mindless::InvalidArgument);
}

TEST_CASE("gain is exact before clamping and always within [-1, 1]") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = AudioChunk::silence(0);
    for (auto& s : c.samples) s = u(rng);
    for (double f : {0.5, 2.0}) {
      auto out = apply_gain(c, f);
      for (std::size_t i = 0; i < c.size(); ++i) {
        REQUIRE(out.samples[i] >= -1.0f);
        REQUIRE(out.samples[i] <= 1.0f);
        if (std::abs(c.samples[i] * f) <= 1.0)
          REQUIRE(out.samples[i] == static_cast<float>(c.samples[i] * static_cast<float>(f)));
      }
    }
  }
}

TEST_CASE("pattern constants") {
  CHECK(kAllPatterns.size() == 4);
  CHECK(gain_of(PerturbationPattern::VolumeHalve) == 0.5);
  CHECK(gain_of(PerturbationPattern::VolumeDouble) == 2.0);
  CHECK(ratio_of(PerturbationPattern::PitchUpOneTone) == std::pow(2.0, 2.0 / 12.0));
  CHECK(ratio_of(PerturbationPattern::PitchDownOneTone) == std::pow(2.0, -2.0 / 12.0));
  for (auto p : kAllPatterns) CHECK(pattern_from_string(to_string(p)) == p);
  CHECK_FALSE(pattern_from_string("speed_up").has_value());
  for (auto e : {Effect::none(), Effect::alert(), Effect::mindless(PerturbationPattern::PitchUpOneTone)})
    CHECK(Effect::unpack(e.pack()) == e);
}

TEST_CASE("pitch_shift moves a steady tone by the ratio") {
  struct Case {
    double f, ratio, expected;
  };
  // Expected values: 440 * 2^(+-1/6) = 493.883, 391.995.
  for (auto [f, r, expected] : {Case{440.0, kToneUpRatio, 493.883},
                                Case{440.0, 1.0, 440.0},
                                Case{440.0, kToneDownRatio, 391.995}}) {
    CAPTURE(r);
    const auto out = shift_stream(tone(f, 2.5), r);
    const double peak = oracle::dominant_frequency(steady(out), 16000);
    CHECK(std::abs(peak - expected) / expected < 0.01);
  }
}

TEST_CASE("pitch ratio property over the speech band") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> freq(100.0, 2000.0);
  for (int trial = 0; trial < 6; ++trial) {
    const double f = freq(rng);
    for (double r : {kToneDownRatio, kToneUpRatio}) {
      CAPTURE(f);
      CAPTURE(r);
      const auto out = shift_stream(tone(f, 2.2), r);
      const double peak = oracle::dominant_frequency(steady(out), 16000, 50.0, 2600.0);
      CHECK(std::abs(peak - f * r) / (f * r) < 0.01);
    }
  }
}

TEST_CASE("pitch_shift preserves length, is deterministic and rejects bad ratios") {
  const auto in = tone(300.0, 1.0);
  PitchShifter a, b;
  for (const auto& c : chunk_stream(in)) {
    auto oa = a.process(c, 1.3);
    auto ob = b.process(c, 1.3);
    CHECK(oa.size() == c.size());
    CHECK(oa.samples == ob.samples);
  }
  a.reset();
  PitchShifter fresh;
  const auto c0 = chunk_stream(in).front();
  CHECK(a.process(c0, 1.3).samples == fresh.process(c0, 1.3).samples);

  CHECK_THROWS_AS(a.process(c0, 0.49), mindless::InvalidArgument);
  CHECK_THROWS_AS(a.process(c0, 2.01), mindless::InvalidArgument);
  CHECK_NOTHROW(a.process(c0, 0.5));
  CHECK_NOTHROW(a.process(c0, 2.0));
}

TEST_CASE("pitch shifter survives ratio changes without underrun") {
  PitchShifter s;
  const auto chunks = chunk_stream(tone(250.0, 3.0));
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const double r = (i / 5) % 2 == 0 ? 0.5 : 2.0;
    auto out = s.process(chunks[i], r);
    for (float v : out.samples) REQUIRE(std::abs(v) <= 1.0f);
  }
  CHECK(s.underruns() == 0);
}

TEST_CASE("beep bursts every period") {
  BeepSpec spec;
  const ChunkGeometry g{0, 1600, 16000};  // 0.1 s
  auto first = synthesize_beep(spec, 0.0, g);
  double energy = 0.0;
  for (float v : first) energy += v * v;
  CHECK(energy > 1.0);
  CHECK(std::abs(first[0]) < 1e-6);  // ramp starts at zero

  // Zero crossings over the middle of the burst match 1 kHz.
  int crossings = 0;
  for (std::size_t i = 200; i < 1400; ++i)
    if ((first[i - 1] < 0) != (first[i] < 0)) ++crossings;
  CHECK(crossings == doctest::Approx(2.0 * 1000.0 * 1200.0 / 16000.0).epsilon(0.05));

  for (double t : {0.1, 1.0, 2.5, 2.9}) {
    auto quiet = synthesize_beep(spec, t, ChunkGeometry{0, 1000, 16000});
    for (float v : quiet) CHECK(v == 0.0f);
  }
  auto again = synthesize_beep(spec, 3.0, ChunkGeometry{0, 1600, 16000});
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i] == doctest::Approx(first[i]).epsilon(1e-4));

  CHECK_THROWS_AS((BeepSpec{0.1, 0.05}.validate()), mindless::InvalidArgument);
  CHECK_THROWS_AS((BeepSpec{0.1, 3.0, 1000, 0.5, 0.06}.validate()), mindless::InvalidArgument);
}

TEST_CASE("engine dispatch") {
  AudioEngine engine;
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(-0.9f, 0.9f);
  auto c = AudioChunk::silence(0);
  for (auto& s : c.samples) s = u(rng);

  CHECK(engine.process_chunk(c, Effect::none()).samples == c.samples);

  auto halved = engine.process_chunk(c, Effect::mindless(PerturbationPattern::VolumeHalve));
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(halved.samples[i] == c.samples[i] * 0.5f);

  AudioEngine fresh;
  auto beep = fresh.process_chunk(AudioChunk::silence(0), Effect::alert());
  CHECK(beep.samples == synthesize_beep(BeepSpec{}, 0.0, ChunkGeometry{0, 1000, 16000}));

  auto bad = c;
  bad.samples.pop_back();
  CHECK_THROWS_AS(engine.process_chunk(bad, Effect::none()), mindless::InvalidArgument);
  bad = c;
  bad.samples[5] = 1.5f;
  CHECK_THROWS_AS(engine.process_chunk(bad, Effect::none()), mindless::InvalidArgument);
}

TEST_CASE("engine output is clamped, length-preserving and deterministic for every effect") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> noise(16000);
  for (auto& s : noise) s = u(rng);
  const auto chunks = chunk_stream(noise);
  const Effect effects[] = {Effect::none(), Effect::alert(),
                            Effect::mindless(PerturbationPattern::VolumeHalve),
                            Effect::mindless(PerturbationPattern::VolumeDouble),
                            Effect::mindless(PerturbationPattern::PitchDownOneTone),
                            Effect::mindless(PerturbationPattern::PitchUpOneTone)};
  AudioEngine a, b;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const Effect e = effects[(i / 3) % 6];
    auto oa = a.process_chunk(chunks[i], e);
    auto ob = b.process_chunk(chunks[i], e);
    REQUIRE(oa.size() == chunks[i].size());
    REQUIRE(oa.samples == ob.samples);
    for (float v : oa.samples) REQUIRE((v >= -1.0f && v <= 1.0f));
  }
}

TEST_CASE("alert restarts its period when re-activated") {
  AudioEngine engine;
  const auto overlay0 = synthesize_beep(BeepSpec{}, 0.0, ChunkGeometry{0, 1000, 16000});
  auto silent = [](std::int64_t idx) { return AudioChunk::silence(idx); };
  engine.process_chunk(silent(0), Effect::alert());
  engine.process_chunk(silent(1000), Effect::none());
  auto again = engine.process_chunk(silent(2000), Effect::alert());
  CHECK(again.samples == overlay0);
}

TEST_CASE("wav round trip and chunking") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "mindless_audio_test.wav";
  std::mt19937 rng(9);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> x(1000);
  for (auto& s : x) s = u(rng);
  write_wav(path, x);
  const auto back = read_wav(path);
  REQUIRE(back.samples.size() == x.size());
  CHECK(back.sample_rate == 16000);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(back.samples[i] - x[i]) <= 1.0f / 32768.0f);

  std::vector<float> y(1500, 0.25f);
  write_wav(path, y);
  const auto chunks = read_pcm(path);
  REQUIRE(chunks.size() == 2);
  CHECK_FALSE(chunks[0].partial());
  CHECK(chunks[1].partial());
  CHECK(chunks[1].valid == 500);
  CHECK(chunks[1].size() == 1000);
  CHECK(chunks[1].samples[600] == 0.0f);
  CHECK(chunks[1].start_index == 1000);

  write_pcm(path, chunks);
  CHECK(read_wav(path).samples.size() == 1500);
  std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects unsupported formats") {
  const auto path = std::filesystem::temp_directory_path() / "mindless_stereo.wav";
  // Hand-built stereo header.
  std::string h = "RIFF";
  auto put32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) h.push_back(char((v >> (8 * i)) & 0xff)); };
  auto put16 = [&](std::uint16_t v) { h.push_back(char(v & 0xff)); h.push_back(char(v >> 8)); };
  put32(36 + 8); h += "WAVEfmt "; put32(16); put16(1); put16(2); put32(16000); put32(64000);
  put16(4); put16(16); h += "data"; put32(8); h += std::string(8, '\0');
  {
    std::ofstream f(path, std::ios::binary);
    f << h;
  }
  CHECK_THROWS_AS(read_wav(path), mindless::UnsupportedFormat);
  try {
    read_wav(path);
  } catch (const mindless::UnsupportedFormat& e) {
    CHECK(std::string(e.what()).find("mono") != std::string::npos);
  }
  {
    std::ofstream f(path, std::ios::binary);
    f << "not a wav file at all";
  }
  CHECK_THROWS_AS(read_wav(path), mindless::UnsupportedFormat);
  std::filesystem::remove(path);
}

TEST_CASE("pcm16 quantization is bit-exact on re-encode") {
  for (int v = -32768; v <= 32767; v += 97) {
    const auto s = static_cast<std::int16_t>(v);
    CHECK(to_pcm16(from_pcm16(s)) == s);
  }
  CHECK(to_pcm16(1.0f) == 32767);
  CHECK(to_pcm16(-1.0f) == -32768);
}
