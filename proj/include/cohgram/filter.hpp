#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "cohgram/error.hpp"
#include "cohgram/types.hpp"

// Butterworth band-pass as cascaded biquads, applied forward-backward for
// zero phase. `order` is the analog prototype order (matlab/scipy butter
// convention); the band-pass transform doubles the pole count and the two
// passes square the magnitude response.

namespace cohgram {

struct FilterSpec {
  int order = 4;  // even, >= 2
};

struct Biquad {
  double b0, b1, b2;  // numerator
  double a1, a2;      // denominator, a0 normalized to 1
};

namespace detail {

inline double biquad_dc_gain(const Biquad& s) {
  return (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
}

// Steady-state filter state for a constant input x0 (transposed direct
// form II), the standard filtfilt startup trick.
inline void biquad_initial_state(const Biquad& s, double x0, double& z1, double& z2) {
  const double g = biquad_dc_gain(s);
  z2 = (s.b2 - s.a2 * g) * x0;
  z1 = (g - s.b0) * x0;
}

inline void biquad_run(const Biquad& s, std::vector<double>& x, double x0) {
  double z1, z2;
  biquad_initial_state(s, x0, z1, z2);
  for (double& v : x) {
    const double in = v;
    const double out = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * out + z2;
    z2 = s.b2 * in - s.a2 * out;
    v = out;
  }
}

}  // namespace detail

// Band-pass Butterworth design. Returns `order` biquad sections, each
// holding one conjugate pole pair and a zero at z=+1 and z=-1; the overall
// gain sits in the first section.
inline std::vector<Biquad> butter_bandpass(int order, double low_hz, double high_hz, double fs) {
  if (order < 2 || order % 2 != 0) fail(errc::invalid_config, "filter order must be even and >= 2");
  if (!(low_hz > 0.0) || !(high_hz > low_hz) || !(high_hz < fs / 2.0))
    fail(errc::band_exceeds_nyquist, "band edges must satisfy 0 < low < high < fs/2");

  using cd = std::complex<double>;
  const double pi = 3.14159265358979323846264338327950288;
  const int n = order;

  // prototype poles on the unit circle, left half-plane
  std::vector<cd> proto(n);
  for (int k = 1; k <= n; ++k) {
    const double ang = pi * (2.0 * k + n - 1.0) / (2.0 * n);
    proto[k - 1] = std::exp(cd(0.0, ang));
  }

  // bilinear prewarp of the edges, then low-pass -> band-pass on the poles
  const double w1 = 2.0 * fs * std::tan(pi * low_hz / fs);
  const double w2 = 2.0 * fs * std::tan(pi * high_hz / fs);
  const double bw = w2 - w1;
  const double wo2 = w1 * w2;

  std::vector<cd> poles;
  poles.reserve(2 * n);
  for (const cd& p : proto) {
    const cd a = p * (bw / 2.0);
    const cd d = std::sqrt(a * a - wo2);
    poles.push_back(a + d);
    poles.push_back(a - d);
  }

  // bilinear transform; n zeros at s=0 -> z=+1, n at infinity -> z=-1
  const double fs2 = 2.0 * fs;
  cd denom(1.0, 0.0);
  std::vector<cd> zpoles;
  zpoles.reserve(poles.size());
  for (const cd& p : poles) {
    zpoles.push_back((fs2 + p) / (fs2 - p));
    denom *= (fs2 - p);
  }
  const double gain = std::pow(bw, n) * std::pow(fs2, n) / denom.real();

  // one section per conjugate pair, ordered by pole radius ascending so the
  // sharpest sections run last
  std::vector<cd> upper;
  for (const cd& p : zpoles)
    if (p.imag() > 0.0) upper.push_back(p);
  std::sort(upper.begin(), upper.end(), [](const cd& a, const cd& b) { return std::abs(a) < std::abs(b); });

  std::vector<Biquad> sos;
  sos.reserve(upper.size());
  for (std::size_t i = 0; i < upper.size(); ++i) {
    const double k = (i == 0) ? gain : 1.0;
    Biquad s;
    s.b0 = k;
    s.b1 = 0.0;
    s.b2 = -k;
    s.a1 = -2.0 * upper[i].real();
    s.a2 = std::norm(upper[i]);
    sos.push_back(s);
  }
  return sos;
}

// H(e^{j 2 pi f / fs}) of the cascade; the analytic response oracle used by
// the dsp tests.
inline std::complex<double> sos_response(const std::vector<Biquad>& sos, double freq_hz, double fs) {
  using cd = std::complex<double>;
  const double pi = 3.14159265358979323846264338327950288;
  const cd z = std::exp(cd(0.0, -2.0 * pi * freq_hz / fs));  // z^-1
  cd h(1.0, 0.0);
  for (const Biquad& s : sos) {
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
  }
  return h;
}

inline std::size_t filtfilt_pad_len(const FilterSpec& spec) {
  return 3 * static_cast<std::size_t>(spec.order + 1);
}

// Zero-phase filtering: odd-reflect pad, forward pass, backward pass, trim.
inline std::vector<double> filtfilt(const std::vector<Biquad>& sos, std::span<const double> x,
                                    std::size_t pad) {
  if (x.size() <= pad)
    fail(errc::signal_too_short,
         "signal length " + std::to_string(x.size()) + " <= pad length " + std::to_string(pad));

  std::vector<double> ext;
  ext.reserve(x.size() + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[0] - x[pad - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  auto run_cascade = [&sos](std::vector<double>& v) {
    double x0 = v.front();
    for (const Biquad& s : sos) {
      detail::biquad_run(s, v, x0);
      x0 *= detail::biquad_dc_gain(s);
    }
  };

  run_cascade(ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(ext);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

// Mean-subtract, then zero-phase band-pass. Output length equals input
// length; pass-band gain ~1, no phase shift.
inline std::vector<double> bandpass(std::span<const double> x, const BandDefinition& band, double fs,
                                    const FilterSpec& spec = {}) {
  validate_band(band, fs);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]))
      fail_at(errc::non_finite_input, "non-finite sample at index " + std::to_string(i), -1,
              static_cast<long>(i));
  }
  const std::vector<Biquad> sos = butter_bandpass(spec.order, band.low_hz, band.high_hz, fs);

  // amplifier offset would leak through the band edges
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.empty() ? 1.0 : static_cast<double>(x.size());
  std::vector<double> centered(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) centered[i] = x[i] - mean;

  return filtfilt(sos, centered, filtfilt_pad_len(spec));
}

}  // namespace cohgram
