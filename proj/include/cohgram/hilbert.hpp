#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "cohgram/error.hpp"
#include "cohgram/fft.hpp"
#include "cohgram/types.hpp"

namespace cohgram {

// FFT analytic signal: double the positive frequencies, zero the negative
// ones, inverse transform (the matlab hilbert() recipe).
inline std::vector<std::complex<double>> analytic_signal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) fail(errc::signal_too_short, "analytic signal needs at least 4 samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]))
      fail_at(errc::non_finite_input, "non-finite sample at index " + std::to_string(i), -1,
              static_cast<long>(i));
  }

  std::vector<std::complex<double>> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::complex<double>(x[i], 0.0);
  fft::transform(f, false);

  const std::size_t half = n / 2;
  if (n % 2 == 0) {
    for (std::size_t k = 1; k < half; ++k) f[k] *= 2.0;
    // f[0] and f[half] (Nyquist) stay as-is
    for (std::size_t k = half + 1; k < n; ++k) f[k] = 0.0;
  } else {
    for (std::size_t k = 1; k <= half; ++k) f[k] *= 2.0;
    for (std::size_t k = half + 1; k < n; ++k) f[k] = 0.0;
  }

  fft::transform(f, true);
  return f;
}

// Instantaneous phase per sample, radians in (-pi, pi].
struct PhaseSeries {
  std::vector<double> values;
  BandDefinition source_band;
};

inline PhaseSeries analytic_phase(std::span<const double> x, const BandDefinition& band = {}) {
  const auto a = analytic_signal(x);
  PhaseSeries out;
  out.source_band = band;
  out.values.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double p = std::atan2(a[i].imag(), a[i].real());
    if (p <= -fft::kPi) p += 2.0 * fft::kPi;  // atan2 can return exactly -pi
    out.values[i] = p;
  }
  return out;
}

inline std::vector<double> unwrap(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double d = phase[i] - phase[i - 1];
    if (d > fft::kPi) offset -= 2.0 * fft::kPi;
    else if (d < -fft::kPi) offset += 2.0 * fft::kPi;
    out[i] = phase[i] + offset;
  }
  return out;
}

}  // namespace cohgram
