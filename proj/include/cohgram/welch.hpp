#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cohgram/error.hpp"
#include "cohgram/fft.hpp"

// Welch auto-/cross-spectral estimation: mean-subtract, slice into
// overlapping Hann-windowed segments, average the segment periodograms.
// One-sided density scaling, so integrating an auto-spectrum over frequency
// recovers the signal variance (up to windowing bias).

namespace cohgram {

struct WelchParams {
  std::size_t segment_len = 256;  // even; nfft == segment_len
  double overlap = 0.5;           // fraction in [0, 1)
};

struct CrossSpectrum {
  std::vector<double> frequencies_hz;
  std::vector<std::complex<double>> values;
};

struct AutoSpectrum {
  std::vector<double> frequencies_hz;
  std::vector<double> values;  // nonnegative
};

namespace detail {

inline void validate_welch(std::size_t n, const WelchParams& p) {
  if (p.segment_len < 8 || p.segment_len % 2 != 0)
    fail(errc::invalid_config, "segment_len must be even and >= 8");
  if (!(p.overlap >= 0.0) || !(p.overlap < 1.0)) fail(errc::invalid_config, "overlap must be in [0, 1)");
  if (p.segment_len > n)
    fail(errc::too_few_segments, "segment_len " + std::to_string(p.segment_len) + " exceeds signal length " +
                                     std::to_string(n));
}

inline std::size_t welch_hop(const WelchParams& p) {
  const auto hop = p.segment_len - static_cast<std::size_t>(std::floor(p.overlap * static_cast<double>(p.segment_len)));
  return hop == 0 ? 1 : hop;
}

inline std::size_t welch_segment_count(std::size_t n, const WelchParams& p) {
  return (n - p.segment_len) / welch_hop(p) + 1;
}

// periodic Hann
inline std::vector<double> hann_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t i = 0; i < len; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * fft::kPi * static_cast<double>(i) / static_cast<double>(len)));
  return w;
}

}  // namespace detail

// Windowed segment FFTs of one channel, positive-frequency bins only.
// Shared across every pair the channel participates in.
struct SegmentSpectra {
  std::size_t n_bins = 0;
  std::size_t n_segments = 0;
  double fs = 0.0;
  double window_power = 0.0;                             // sum of squared window
  std::vector<std::complex<double>> bins;                // [segment * n_bins + k]
  std::vector<double> frequencies_hz;
};

inline SegmentSpectra segment_spectra(std::span<const double> x, double fs, const WelchParams& params) {
  detail::validate_welch(x.size(), params);
  const std::size_t hop = detail::welch_hop(params);
  const std::size_t n_seg = detail::welch_segment_count(x.size(), params);
  if (n_seg < 4)
    fail(errc::too_few_segments,
         "only " + std::to_string(n_seg) + " Welch segments; need at least 4");

  const std::size_t len = params.segment_len;
  const std::size_t n_bins = len / 2 + 1;
  const std::vector<double> window = detail::hann_window(len);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());

  SegmentSpectra out;
  out.n_bins = n_bins;
  out.n_segments = n_seg;
  out.fs = fs;
  out.window_power = 0.0;
  for (double w : window) out.window_power += w * w;
  out.bins.resize(n_seg * n_bins);
  out.frequencies_hz.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k)
    out.frequencies_hz[k] = static_cast<double>(k) * fs / static_cast<double>(len);

  std::vector<std::complex<double>> seg(len);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const std::size_t start = s * hop;
    for (std::size_t i = 0; i < len; ++i)
      seg[i] = std::complex<double>((x[start + i] - mean) * window[i], 0.0);
    fft::transform(seg, false);
    for (std::size_t k = 0; k < n_bins; ++k) out.bins[s * n_bins + k] = seg[k];
  }
  return out;
}

// Averaged one-sided cross-spectral density from two cached channels.
inline CrossSpectrum cross_from_spectra(const SegmentSpectra& a, const SegmentSpectra& b) {
  if (a.n_bins != b.n_bins || a.n_segments != b.n_segments || a.fs != b.fs)
    fail(errc::length_mismatch, "segment spectra are not from the same segmentation");

  const std::size_t n_bins = a.n_bins;
  CrossSpectrum out;
  out.frequencies_hz = a.frequencies_hz;
  out.values.assign(n_bins, std::complex<double>(0.0, 0.0));

  for (std::size_t s = 0; s < a.n_segments; ++s) {
    const std::size_t base = s * n_bins;
    for (std::size_t k = 0; k < n_bins; ++k)
      out.values[k] += a.bins[base + k] * std::conj(b.bins[base + k]);
  }

  const double scale = 1.0 / (a.fs * a.window_power * static_cast<double>(a.n_segments));
  for (std::size_t k = 0; k < n_bins; ++k) {
    double f = scale;
    if (k != 0 && k != n_bins - 1) f *= 2.0;  // fold negative frequencies
    out.values[k] *= f;
  }
  return out;
}

inline CrossSpectrum welch_cross(std::span<const double> x, std::span<const double> y, double fs,
                                 const WelchParams& params = {}) {
  if (x.size() != y.size())
    fail(errc::length_mismatch,
         "signal lengths differ: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  const SegmentSpectra sa = segment_spectra(x, fs, params);
  const SegmentSpectra sb = segment_spectra(y, fs, params);
  return cross_from_spectra(sa, sb);
}

inline AutoSpectrum welch_auto(std::span<const double> x, double fs, const WelchParams& params = {}) {
  // same accumulation path as welch_cross(x, x); the imaginary parts are
  // identically zero
  const CrossSpectrum c = welch_cross(x, x, fs, params);
  AutoSpectrum out;
  out.frequencies_hz = c.frequencies_hz;
  out.values.resize(c.values.size());
  for (std::size_t k = 0; k < c.values.size(); ++k) out.values[k] = c.values[k].real();
  return out;
}

}  // namespace cohgram
