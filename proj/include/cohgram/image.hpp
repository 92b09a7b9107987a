#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cohgram/config.hpp"
#include "cohgram/features.hpp"
#include "cohgram/filter.hpp"
#include "cohgram/hilbert.hpp"
#include "cohgram/parallel.hpp"
#include "cohgram/png.hpp"
#include "cohgram/tensor_io.hpp"
#include "cohgram/types.hpp"
#include "cohgram/welch.hpp"

// Per-band connectivity matrices and their stack into the C x C x 3 feature
// image: MPC above the diagonal, band MSC below, DE on the diagonal, one
// band per color plane.

namespace cohgram {

struct ConnectivityMatrix {
  BandDefinition band;
  std::size_t channels = 0;
  std::vector<double> values;  // row-major C x C

  double& at(std::size_t i, std::size_t k) { return values[i * channels + k]; }
  double at(std::size_t i, std::size_t k) const { return values[i * channels + k]; }
};

struct FeatureImage {
  std::size_t channels = 0;
  std::vector<ConnectivityMatrix> planes;  // band order from the config
  bool diagonal_normalized = false;
};

namespace detail {

// Channel work shared by every pair within one band.
struct BandChannelState {
  std::vector<PhaseSeries> phases;  // per channel
  std::vector<double> de;           // per channel, raw nats
};

inline BandChannelState band_channel_state(const MultichannelRecording& rec,
                                           const BandDefinition& band, const PipelineConfig& cfg,
                                           int jobs) {
  const std::size_t c = rec.channels();
  BandChannelState st;
  st.phases.resize(c);
  st.de.resize(c);
  parallel_for(c, jobs, [&](std::size_t ch) {
    const auto filtered = bandpass(rec.data[ch], band, rec.sample_rate_hz, cfg.filter);
    st.phases[ch] = analytic_phase(filtered, band);
    st.de[ch] = channel_de(filtered, rec.sample_rate_hz, cfg.de_window_s);
  });
  return st;
}

// MSC is band-agnostic until the final bin average, so the per-pair spectra
// are computed once per trial and averaged per band afterwards.
struct PairMsc {
  std::size_t channels = 0;
  std::vector<MscSpectrum> upper;  // pair (i, k) with i < k at pair_index

  std::size_t pair_index(std::size_t i, std::size_t k) const {
    // i < k; offset of (i, k) in row-major upper-triangle order
    return i * channels - i * (i + 1) / 2 + (k - i - 1);
  }
};

inline PairMsc pair_msc(const MultichannelRecording& rec, const PipelineConfig& cfg, int jobs) {
  const std::size_t c = rec.channels();
  std::vector<SegmentSpectra> spectra(c);
  parallel_for(c, jobs, [&](std::size_t ch) {
    spectra[ch] = segment_spectra(rec.data[ch], rec.sample_rate_hz, cfg.welch);
  });

  PairMsc out;
  out.channels = c;
  out.upper.resize(c * (c - 1) / 2);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(out.upper.size());
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t k = i + 1; k < c; ++k) pairs.emplace_back(i, k);
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    out.upper[p] = msc_from_spectra(spectra[pairs[p].first], spectra[pairs[p].second]);
  });
  return out;
}

inline BandDefinition msc_band_range(const PipelineConfig& cfg, const BandDefinition& band) {
  if (!cfg.msc_shared_across_bands) return band;
  BandDefinition shared{"shared", band.low_hz, band.high_hz};
  for (const auto& b : cfg.bands) {
    shared.low_hz = std::min(shared.low_hz, b.low_hz);
    shared.high_hz = std::max(shared.high_hz, b.high_hz);
  }
  return shared;
}

inline ConnectivityMatrix assemble_from_state(const MultichannelRecording& rec,
                                              const BandDefinition& band,
                                              const PipelineConfig& cfg,
                                              const BandChannelState& st, const PairMsc& msc,
                                              int jobs) {
  const std::size_t c = rec.channels();
  ConnectivityMatrix m;
  m.band = band;
  m.channels = c;
  m.values.assign(c * c, 0.0);
  const BandDefinition msc_range = msc_band_range(cfg, band);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(c * (c - 1) / 2);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t k = i + 1; k < c; ++k) pairs.emplace_back(i, k);
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    const auto [i, k] = pairs[p];
    m.at(i, k) = mpc(st.phases[i], st.phases[k], cfg.edge_exclusion_fraction).value;
    m.at(k, i) = band_msc(msc.upper[msc.pair_index(i, k)], msc_range).value;
  });
  for (std::size_t i = 0; i < c; ++i) m.at(i, i) = st.de[i];
  return m;
}

}  // namespace detail

inline ConnectivityMatrix assemble_band(const MultichannelRecording& rec,
                                        const BandDefinition& band, const PipelineConfig& cfg,
                                        int jobs = 1) {
  validate(rec);
  validate_band(band, rec.sample_rate_hz);
  const auto state = detail::band_channel_state(rec, band, cfg, jobs);
  const auto msc = detail::pair_msc(rec, cfg, jobs);
  return detail::assemble_from_state(rec, band, cfg, state, msc, jobs);
}

// Full image: every plane shares one set of per-pair MSC spectra; phases
// and DE are band-specific. The diagonal is raw DE until
// normalize_diagonal runs.
inline FeatureImage assemble_image(const MultichannelRecording& rec, const PipelineConfig& cfg,
                                   int jobs = 1) {
  validate(rec);
  validate_config(cfg);
  for (const auto& band : cfg.bands) validate_band(band, rec.sample_rate_hz);

  FeatureImage img;
  img.channels = rec.channels();
  const auto msc = detail::pair_msc(rec, cfg, jobs);
  for (const auto& band : cfg.bands) {
    const auto state = detail::band_channel_state(rec, band, cfg, jobs);
    img.planes.push_back(detail::assemble_from_state(rec, band, cfg, state, msc, jobs));
  }
  return img;
}

// Maps each plane's diagonal into [0, 1]; off-diagonals are untouched.
inline FeatureImage normalize_diagonal(FeatureImage img, const DiagNormConfig& cfg) {
  for (auto& plane : img.planes) {
    const std::size_t c = plane.channels;
    double lo, hi;
    if (cfg.mode == DiagNormConfig::Mode::minmax_per_image) {
      lo = hi = plane.at(0, 0);
      for (std::size_t i = 1; i < c; ++i) {
        lo = std::min(lo, plane.at(i, i));
        hi = std::max(hi, plane.at(i, i));
      }
    } else {
      lo = cfg.lo;
      hi = cfg.hi;
    }
    for (std::size_t i = 0; i < c; ++i) {
      double v;
      if (lo == hi) {
        v = 0.5;  // degenerate all-equal diagonal
      } else {
        v = (plane.at(i, i) - lo) / (hi - lo);
        v = std::clamp(v, 0.0, 1.0);
      }
      plane.at(i, i) = v;
    }
  }
  img.diagonal_normalized = true;
  return img;
}

inline void check_image_range(const FeatureImage& img) {
  for (const auto& plane : img.planes)
    for (double v : plane.values)
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        fail(errc::non_finite_input, "feature image entry " + std::to_string(v) + " outside [0, 1]");
}

// Tensor layout: dims [C, C, 3], index (row * C + col) * 3 + plane.
inline Tensor image_to_tensor(const FeatureImage& img) {
  const std::size_t c = img.channels;
  Tensor t;
  t.dims = {c, c, img.planes.size()};
  t.axes = {"row_channel", "col_channel", "band"};
  t.data.resize(c * c * img.planes.size());
  for (std::size_t b = 0; b < img.planes.size(); ++b)
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t k = 0; k < c; ++k)
        t.data[(i * c + k) * img.planes.size() + b] = static_cast<float>(img.planes[b].at(i, k));
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& p : img.planes)
    bands.push_back({{"name", p.band.name}, {"low_hz", p.band.low_hz}, {"high_hz", p.band.high_hz}});
  t.meta["bands"] = bands;
  t.meta["layout"] = {{"upper", "mpc"}, {"lower", "msc"}, {"diagonal", "de"}};
  t.meta["diagonal_normalized"] = img.diagonal_normalized;
  return t;
}

inline FeatureImage image_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3 || t.dims[0] != t.dims[1] || t.dims[2] < 1)
    fail(errc::dim_mismatch, "feature tensor must have dims [C, C, bands]");
  FeatureImage img;
  img.channels = t.dims[0];
  const std::size_t c = img.channels;
  const std::size_t nb = t.dims[2];
  img.planes.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    auto& plane = img.planes[b];
    plane.channels = c;
    plane.values.resize(c * c);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t k = 0; k < c; ++k)
        plane.values[i * c + k] = t.data[(i * c + k) * nb + b];
  }
  if (t.meta.contains("bands") && t.meta["bands"].size() == nb) {
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& jb = t.meta["bands"][b];
      img.planes[b].band = {jb.value("name", std::string{}), jb.value("low_hz", 0.0),
                            jb.value("high_hz", 0.0)};
    }
  }
  img.diagonal_normalized = t.meta.value("diagonal_normalized", false);
  return img;
}

// round(v * 255), half away from zero; v is clamped to [0, 1] first.
inline std::uint8_t quantize8(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

inline std::vector<std::uint8_t> image_to_rgb8(const FeatureImage& img) {
  if (img.planes.size() != 3) fail(errc::dim_mismatch, "PNG export needs exactly 3 planes");
  const std::size_t c = img.channels;
  std::vector<std::uint8_t> px(3 * c * c);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t b = 0; b < 3; ++b)
        px[(i * c + k) * 3 + b] = quantize8(img.planes[b].at(i, k));
  return px;
}

enum class ImageFormat { tensor, png8 };

inline void export_image(const FeatureImage& img, const std::filesystem::path& path,
                         ImageFormat format) {
  if (format == ImageFormat::tensor) {
    const Tensor t = image_to_tensor(img);
    write_tensor_file(path, t.data, t.dims, t.meta, t.axes);
  } else {
    png::write_rgb8(path, image_to_rgb8(img), img.channels, img.channels);
  }
}

}  // namespace cohgram
