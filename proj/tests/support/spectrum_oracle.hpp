#pragma once

// Test-only spectral peak finder. Evaluates a Hann-windowed DFT directly at
// candidate frequencies (no FFT library), so it is independent of the
// vocoder's own transform.

#include <cmath>
#include <numbers>
#include <complex>
#include <span>
#include <vector>

namespace oracle {

inline std::vector<double> hann_weighted(std::span<const float> x) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1))) * x[i];
  return w;
}

// |sum_i w[i] e^{-j 2 pi f i / fs}| via a unit phasor recurrence.
inline double dft_magnitude(const std::vector<double>& w, double freq, int sample_rate) {
  const std::complex<double> step = std::polar(1.0, -2.0 * std::numbers::pi * freq / sample_rate);
  std::complex<double> phasor{1.0, 0.0}, acc{0.0, 0.0};
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i] * phasor;
    phasor *= step;
    if ((i & 1023) == 1023) phasor /= std::abs(phasor);
  }
  return std::abs(acc);
}

/// Dominant frequency in [lo, hi] Hz: coarse 2 Hz scan, then golden-section
/// refinement around the best coarse bin.
inline double dominant_frequency(std::span<const float> x, int sample_rate, double lo = 50.0,
                                 double hi = 4000.0) {
  const auto w = hann_weighted(x);
  double best_f = lo, best_m = -1.0;
  for (double f = lo; f <= hi; f += 2.0) {
    const double m = dft_magnitude(w, f, sample_rate);
    if (m > best_m) {
      best_m = m;
      best_f = f;
    }
  }
  double a = best_f - 2.0, b = best_f + 2.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 40; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (dft_magnitude(w, c, sample_rate) > dft_magnitude(w, d, sample_rate))
      b = d;
    else
      a = c;
  }
  return 0.5 * (a + b);
}

} // namespace oracle
