#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mindless::audio {

/// The four mindless perturbations applied to the lecture voice.
enum class PerturbationPattern : std::uint8_t {
  VolumeHalve,
  VolumeDouble,
  PitchDownOneTone,
  PitchUpOneTone,
};

inline constexpr std::array<PerturbationPattern, 4> kAllPatterns{
    PerturbationPattern::VolumeHalve, PerturbationPattern::VolumeDouble,
    PerturbationPattern::PitchDownOneTone, PerturbationPattern::PitchUpOneTone};

inline constexpr double kHalveGain = 0.5;
inline constexpr double kDoubleGain = 2.0;

// A whole tone is two equal-tempered semitones.
inline const double kToneDownRatio = std::exp2(-2.0 / 12.0);
inline const double kToneUpRatio = std::exp2(2.0 / 12.0);

constexpr bool is_pitch(PerturbationPattern p) {
  return p == PerturbationPattern::PitchDownOneTone || p == PerturbationPattern::PitchUpOneTone;
}

double gain_of(PerturbationPattern p);   // only for volume patterns
double ratio_of(PerturbationPattern p);  // only for pitch patterns

std::string_view to_string(PerturbationPattern p);
std::optional<PerturbationPattern> pattern_from_string(std::string_view name);

/// What the client applies to the outgoing audio right now.
class Effect {
public:
  enum class Kind : std::uint8_t { None, Mindless, Alert };

  constexpr Effect() = default;
  static constexpr Effect none() { return Effect{}; }
  static constexpr Effect mindless(PerturbationPattern p) { return Effect{Kind::Mindless, p}; }
  static constexpr Effect alert() { return Effect{Kind::Alert, PerturbationPattern::VolumeHalve}; }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_none() const { return kind_ == Kind::None; }
  /// Only meaningful when kind() == Mindless.
  constexpr PerturbationPattern pattern() const { return pattern_; }

  friend constexpr bool operator==(const Effect& a, const Effect& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Kind::Mindless || a.pattern_ == b.pattern_;
  }

  std::string describe() const;

  // Packed form for lock-free publication.
  constexpr std::uint16_t pack() const {
    return static_cast<std::uint16_t>((static_cast<unsigned>(kind_) << 8) |
                                      static_cast<unsigned>(pattern_));
  }
  static constexpr Effect unpack(std::uint16_t bits) {
    return Effect{static_cast<Kind>(bits >> 8), static_cast<PerturbationPattern>(bits & 0xff)};
  }

private:
  constexpr Effect(Kind k, PerturbationPattern p) : kind_(k), pattern_(p) {}

  Kind kind_ = Kind::None;
  PerturbationPattern pattern_ = PerturbationPattern::VolumeHalve;
};

/// Single-writer/many-reader slot carrying the currently published Effect.
/// The control context stores, the audio context loads once per chunk.
class EffectCell {
public:
  void publish(Effect e) noexcept { bits_.store(e.pack(), std::memory_order_release); }
  Effect load() const noexcept { return Effect::unpack(bits_.load(std::memory_order_acquire)); }

private:
  std::atomic<std::uint16_t> bits_{Effect::none().pack()};
  static_assert(std::atomic<std::uint16_t>::is_always_lock_free);
};

} // namespace mindless::audio
