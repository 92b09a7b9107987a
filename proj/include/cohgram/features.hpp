#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cohgram/error.hpp"
#include "cohgram/hilbert.hpp"
#include "cohgram/types.hpp"
#include "cohgram/welch.hpp"

namespace cohgram {

// ---------------------------------------------------------------------------
// Mean phase coherence

struct MpcValue {
  double value = 0.0;        // in [0, 1]
  std::size_t n_samples = 0; // samples accumulated after edge exclusion
};

// |mean over n of exp(-j (phi_i(n) - phi_k(n)))|. Symmetric in its
// arguments bit-exactly. `edge_fraction` drops that share of samples at
// each end (Hilbert edge transients corrupt phase there).
inline MpcValue mpc(const PhaseSeries& phase_i, const PhaseSeries& phase_k, double edge_fraction = 0.0) {
  if (phase_i.values.size() != phase_k.values.size())
    fail(errc::length_mismatch, "phase series lengths differ");
  if (!(phase_i.source_band == phase_k.source_band))
    fail(errc::band_mismatch, "phase series come from different bands");
  if (!(edge_fraction >= 0.0) || !(edge_fraction < 0.5))
    fail(errc::invalid_config, "edge_fraction must be in [0, 0.5)");

  const std::size_t n = phase_i.values.size();
  const std::size_t excl = static_cast<std::size_t>(std::floor(edge_fraction * static_cast<double>(n)));
  const std::size_t lo = excl, hi = n - excl;
  if (hi <= lo) fail(errc::signal_too_short, "edge exclusion leaves no samples");

  double sum_cos = 0.0, sum_sin = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = phase_i.values[i] - phase_k.values[i];
    sum_cos += std::cos(d);
    sum_sin += std::sin(d);
  }
  const double m = static_cast<double>(hi - lo);
  MpcValue out;
  out.n_samples = hi - lo;
  out.value = std::sqrt((sum_cos / m) * (sum_cos / m) + (sum_sin / m) * (sum_sin / m));
  return out;
}

// ---------------------------------------------------------------------------
// Magnitude squared coherence

struct MscSpectrum {
  std::vector<double> frequencies_hz;
  std::vector<double> values;                // per bin, in [0, 1]
  std::vector<std::uint32_t> zero_power_bins;  // bins where Sxx*Syy == 0, value forced to 0
};

inline MscSpectrum msc_from_spectra(const SegmentSpectra& sx, const SegmentSpectra& sy) {
  const CrossSpectrum sxy = cross_from_spectra(sx, sy);
  const CrossSpectrum sxx = cross_from_spectra(sx, sx);
  const CrossSpectrum syy = cross_from_spectra(sy, sy);

  MscSpectrum out;
  out.frequencies_hz = sxy.frequencies_hz;
  out.values.resize(sxy.values.size());
  for (std::size_t k = 0; k < sxy.values.size(); ++k) {
    const double denom = sxx.values[k].real() * syy.values[k].real();
    if (denom == 0.0) {
      out.values[k] = 0.0;
      out.zero_power_bins.push_back(static_cast<std::uint32_t>(k));
    } else {
      out.values[k] = std::norm(sxy.values[k]) / denom;
    }
  }
  return out;
}

// |Sxy|^2 / (Sxx * Syy) per bin from Welch estimates on the raw signals.
inline MscSpectrum msc_spectrum(std::span<const double> x, std::span<const double> y, double fs,
                                const WelchParams& params = {}) {
  if (x.size() != y.size())
    fail(errc::length_mismatch,
         "signal lengths differ: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  const SegmentSpectra sx = segment_spectra(x, fs, params);
  const SegmentSpectra sy = segment_spectra(y, fs, params);
  return msc_from_spectra(sx, sy);
}

struct MscBandValue {
  double value = 0.0;  // in [0, 1]
  BandDefinition band;
  std::size_t n_bins = 0;
};

// Mean of the MSC bins whose center frequency falls in [low, high) -- the
// "summed and normalized" reading that keeps the value in [0, 1]
// independent of band width.
inline MscBandValue band_msc(const MscSpectrum& spectrum, const BandDefinition& band) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < spectrum.frequencies_hz.size(); ++k) {
    const double f = spectrum.frequencies_hz[k];
    if (f >= band.low_hz && f < band.high_hz) {
      sum += spectrum.values[k];
      ++count;
    }
  }
  if (count == 0)
    fail(errc::empty_band, "no spectrum bin falls inside band '" + band.name + "'");
  MscBandValue out;
  out.band = band;
  out.n_bins = count;
  out.value = sum / static_cast<double>(count);
  return out;
}

// ---------------------------------------------------------------------------
// Differential entropy

struct DeValue {
  double value = 0.0;  // nats, may be negative
  BandDefinition band;
};

// Gaussian closed form 0.5 * ln(2 pi e sigma^2), unbiased (N-1) variance.
inline double differential_entropy(std::span<const double> window) {
  if (window.size() < 8) fail(errc::signal_too_short, "DE window needs at least 8 samples");
  double lo = window[0], hi = window[0];
  double mean = 0.0;
  for (double v : window) {
    if (!std::isfinite(v)) fail(errc::non_finite_input, "non-finite sample in DE window");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  if (lo == hi) fail(errc::zero_variance, "constant window has no differential entropy");
  mean /= static_cast<double>(window.size());
  double ss = 0.0;
  for (double v : window) {
    const double d = v - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(window.size() - 1);
  if (var <= 0.0) fail(errc::zero_variance, "window variance underflowed to zero");
  const double two_pi_e = 2.0 * fft::kPi * 2.71828182845904523536028747135266250;
  return 0.5 * std::log(two_pi_e * var);
}

// Mean DE over consecutive non-overlapping windows of `window_s` seconds;
// the trailing partial window is discarded.
inline double channel_de(std::span<const double> band_signal, double fs, double window_s = 1.0) {
  if (!(window_s > 0.0) || !(fs > 0.0)) fail(errc::invalid_config, "window_s and fs must be positive");
  const std::size_t win = static_cast<std::size_t>(std::llround(window_s * fs));
  if (win < 8) fail(errc::invalid_config, "DE window shorter than 8 samples");
  if (band_signal.size() < win)
    fail(errc::signal_shorter_than_window,
         "signal of " + std::to_string(band_signal.size()) + " samples shorter than one " +
             std::to_string(win) + "-sample window");
  const std::size_t n_windows = band_signal.size() / win;
  double sum = 0.0;
  for (std::size_t w = 0; w < n_windows; ++w) {
    sum += differential_entropy(band_signal.subspan(w * win, win));
  }
  return sum / static_cast<double>(n_windows);
}

}  // namespace cohgram
