#include "mindless/audio/pitch_shifter.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "mindless/error.hpp"

namespace mindless::audio {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double wrap_phase(double phase) {
  return phase - 2.0 * std::numbers::pi * std::round(phase / (2.0 * std::numbers::pi));
}

constexpr double kNormFloor = 1e-6;

} // namespace

struct PitchShifter::Fft {
  explicit Fft(std::size_t n) : size(n) {
    time = fftw_alloc_real(n);
    freq = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), time, freq, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq, time, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
    fftw_free(time);
    fftw_free(freq);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size;
  double* time = nullptr;
  fftw_complex* freq = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

PitchShifter::PitchShifter(PitchShifterConfig config) : config_(config) {
  if (config_.window < 16 || (config_.window & (config_.window - 1)) != 0)
    throw InvalidArgument("pitch shifter window must be a power of two >= 16");
  if (config_.hop == 0 || config_.hop * 2 > config_.window)
    throw InvalidArgument("pitch shifter hop must be in (0, window/2]");
  if (config_.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");

  fft_ = std::make_unique<Fft>(config_.window);
  window_.resize(config_.window);
  for (std::size_t n = 0; n < config_.window; ++n)
    window_[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                        static_cast<double>(config_.window)));
  reset();
}

PitchShifter::~PitchShifter() = default;
PitchShifter::PitchShifter(PitchShifter&&) noexcept = default;
PitchShifter& PitchShifter::operator=(PitchShifter&&) noexcept = default;

void PitchShifter::reset() {
  const std::size_t bins = config_.window / 2 + 1;
  // Priming with window + hop zeros keeps the resampler behind the finalized
  // part of the stretched stream for every ratio in range.
  input_.assign(latency(), 0.0);
  prev_phase_.assign(bins, 0.0);
  synth_phase_.assign(bins, 0.0);
  first_frame_ = true;
  ola_.clear();
  norm_.clear();
  stretched_base_ = 0;
  synth_pos_ = 0;
  synth_pos_exact_ = 0.0;
  read_pos_ = 0.0;
  underruns_ = 0;
}

AudioChunk PitchShifter::process(const AudioChunk& chunk, double ratio) {
  if (!(ratio >= kMinPitchRatio && ratio <= kMaxPitchRatio))
    throw InvalidArgument("pitch ratio " + std::to_string(ratio) + " outside [0.5, 2.0]");
  if (chunk.sample_rate != config_.sample_rate)
    throw InvalidArgument("chunk sample rate does not match pitch shifter");

  input_.insert(input_.end(), chunk.samples.begin(), chunk.samples.end());
  std::size_t consumed = 0;
  while (input_.size() - consumed >= config_.window) {
    std::copy_n(input_.begin() + static_cast<std::ptrdiff_t>(consumed), config_.window,
                fft_->time);
    analyze_frame(ratio);
    consumed += config_.hop;
  }
  input_.erase(input_.begin(), input_.begin() + static_cast<std::ptrdiff_t>(consumed));

  AudioChunk out = chunk;
  for (auto& s : out.samples) {
    s = read_stretched(read_pos_);
    read_pos_ += ratio;
  }
  compact();
  return out;
}

void PitchShifter::analyze_frame(double ratio) {
  const std::size_t n = config_.window;
  const std::size_t bins = n / 2 + 1;
  const double hop_a = static_cast<double>(config_.hop);

  for (std::size_t i = 0; i < n; ++i) fft_->time[i] *= window_[i];
  fftw_execute(fft_->forward);

  std::int64_t hop_s = 0;
  if (!first_frame_) {
    synth_pos_exact_ += hop_a * ratio;
    const auto next = static_cast<std::int64_t>(std::llround(synth_pos_exact_));
    hop_s = next - synth_pos_;
    synth_pos_ = next;
  }

  for (std::size_t k = 0; k < bins; ++k) {
    const double re = fft_->freq[k][0];
    const double im = fft_->freq[k][1];
    const double magnitude = std::hypot(re, im);
    const double phase = std::atan2(im, re);
    if (first_frame_) {
      synth_phase_[k] = phase;
    } else {
      const double bin_freq = 2.0 * std::numbers::pi * static_cast<double>(k) /
                              static_cast<double>(n);
      const double deviation = wrap_phase(phase - prev_phase_[k] - bin_freq * hop_a);
      const double true_freq = bin_freq + deviation / hop_a;
      synth_phase_[k] = wrap_phase(synth_phase_[k] + true_freq * static_cast<double>(hop_s));
    }
    prev_phase_[k] = phase;
    fft_->freq[k][0] = magnitude * std::cos(synth_phase_[k]);
    fft_->freq[k][1] = magnitude * std::sin(synth_phase_[k]);
  }
  first_frame_ = false;

  fftw_execute(fft_->inverse);

  const auto offset = static_cast<std::size_t>(synth_pos_ - stretched_base_);
  if (ola_.size() < offset + n) {
    ola_.resize(offset + n, 0.0);
    norm_.resize(offset + n, 0.0);
  }
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    ola_[offset + i] += fft_->time[i] * scale * window_[i];
    norm_[offset + i] += window_[i] * window_[i];
  }
}

float PitchShifter::read_stretched(double position) {
  // Samples before the start of the next frame (at least hop * 0.5 ahead)
  // will receive no further overlap-add contributions.
  const std::int64_t finalized_end =
      synth_pos_ + static_cast<std::int64_t>(static_cast<double>(config_.hop) * kMinPitchRatio);
  const auto base = static_cast<std::int64_t>(std::floor(position));
  if (first_frame_ || base + 1 >= finalized_end || base < stretched_base_) {
    ++underruns_;
    return 0.0f;
  }
  const double frac = position - static_cast<double>(base);
  auto sample_at = [&](std::int64_t idx) {
    const auto i = static_cast<std::size_t>(idx - stretched_base_);
    if (i >= ola_.size() || norm_[i] < kNormFloor) return 0.0;
    return ola_[i] / norm_[i];
  };
  const double v = (1.0 - frac) * sample_at(base) + frac * sample_at(base + 1);
  return static_cast<float>(std::clamp(v, -1.0, 1.0));
}

void PitchShifter::compact() {
  const auto keep_from = static_cast<std::int64_t>(std::floor(read_pos_)) - 1;
  const std::int64_t drop = keep_from - stretched_base_;
  if (drop < static_cast<std::int64_t>(4 * config_.window)) return;
  ola_.erase(ola_.begin(), ola_.begin() + drop);
  norm_.erase(norm_.begin(), norm_.begin() + drop);
  stretched_base_ += drop;
}

} // namespace mindless::audio
