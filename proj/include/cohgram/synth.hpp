#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "cohgram/error.hpp"
#include "cohgram/manifest.hpp"
#include "cohgram/recording_io.hpp"
#include "cohgram/rng.hpp"
#include "cohgram/types.hpp"

// Synthetic recordings with known ground-truth connectivity. Phase
// oscillators give direct control over the quantity MPC measures; linear
// source mixtures have closed-form coherence.

namespace cohgram {

// Angular pull rate at full coupling strength. With per-step phase noise
// std sigma, a coupled pair's phase difference is an OU process with
// stationary variance sigma^2 * fs / (2 * kappa * kCouplingRate), so
// expected MPC is approximately exp(-var / 2).
inline constexpr double kCouplingRate = 8.0;  // rad/s

struct Coupling {
  std::size_t i = 0;
  std::size_t k = 0;
  double strength = 0.0;  // kappa in [0, 1]

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

struct OscillatorSpec {
  double base_freq_hz = 10.0;
  std::vector<Coupling> coupling;
  double phase_noise_std = 0.0;  // rad per step
  double amplitude = 1.0;
  // White per-channel measurement noise; infinity disables it.
  double sensor_snr_db = 10.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void validate_oscillator(const OscillatorSpec& spec, std::size_t n_channels, double duration_s,
                                double fs) {
  if (n_channels < 2) fail(errc::invalid_spec, "need at least 2 channels");
  if (!(fs > 0.0) || !(duration_s > 0.0)) fail(errc::invalid_spec, "fs and duration must be positive");
  if (!(fs > 2.0 * spec.base_freq_hz))
    fail(errc::invalid_spec, "fs must exceed twice the base frequency");
  if (!(spec.amplitude > 0.0)) fail(errc::invalid_spec, "amplitude must be positive");
  if (!(spec.phase_noise_std >= 0.0)) fail(errc::invalid_spec, "phase_noise_std must be >= 0");
  for (const auto& c : spec.coupling) {
    if (c.i == c.k) fail(errc::invalid_spec, "coupling must join two distinct channels");
    if (c.i >= n_channels || c.k >= n_channels)
      fail(errc::invalid_spec, "coupling channel index out of range");
    if (!(c.strength >= 0.0) || !(c.strength <= 1.0))
      fail(errc::invalid_spec, "coupling strength must be in [0, 1]");
  }
}

inline double sensor_noise_std(const OscillatorSpec& spec) {
  if (std::isinf(spec.sensor_snr_db)) return 0.0;
  const double signal_power = spec.amplitude * spec.amplitude / 2.0;
  return std::sqrt(signal_power / std::pow(10.0, spec.sensor_snr_db / 10.0));
}

}  // namespace detail

// Kuramoto-style phase oscillators: theta_c advances at 2 pi f0 plus the
// symmetric sin coupling pull, plus per-step phase noise. Output is
// amplitude * cos(theta) plus sensor noise.
inline MultichannelRecording gen_coupled(const OscillatorSpec& spec, std::size_t n_channels,
                                         double duration_s, double fs) {
  detail::validate_oscillator(spec, n_channels, duration_s, fs);
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  if (n < 2) fail(errc::invalid_spec, "duration too short at this sample rate");

  rng::stream rng(spec.seed);
  const double dt = 1.0 / fs;
  const double two_pi = 2.0 * 3.14159265358979323846264338327950288;
  const double noise_std = detail::sensor_noise_std(spec);

  std::vector<double> theta(n_channels);
  for (auto& t : theta) t = two_pi * rng.uniform();

  MultichannelRecording rec;
  rec.sample_rate_hz = fs;
  rec.data.assign(n_channels, std::vector<double>(n));
  rec.channel_labels = default_channel_labels(n_channels);

  std::vector<double> pull(n_channels);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < n_channels; ++c) rec.data[c][s] = spec.amplitude * std::cos(theta[c]);
    std::fill(pull.begin(), pull.end(), 0.0);
    for (const auto& cp : spec.coupling) {
      const double force = cp.strength * kCouplingRate * std::sin(theta[cp.k] - theta[cp.i]);
      pull[cp.i] += force;
      pull[cp.k] -= force;
    }
    for (std::size_t c = 0; c < n_channels; ++c) {
      theta[c] += dt * (two_pi * spec.base_freq_hz + pull[c]);
      if (spec.phase_noise_std > 0.0) theta[c] += spec.phase_noise_std * rng.gaussian();
    }
  }
  if (noise_std > 0.0) {
    for (std::size_t c = 0; c < n_channels; ++c)
      for (std::size_t s = 0; s < n; ++s) rec.data[c][s] += noise_std * rng.gaussian();
  }
  return rec;
}

struct CommonSourceResult {
  MultichannelRecording recording;
  // Closed-form expected MSC per channel pair, row-major C x C; the
  // diagonal holds 1.
  std::vector<double> expected_msc;
};

// Channels are fixed linear mixtures of independent unit-variance white
// sources plus independent white sensor noise. MSC between channels a, b:
// (sum_s M[a][s] M[b][s])^2 / ((sum M[a]^2 + nv) (sum M[b]^2 + nv)).
inline CommonSourceResult gen_common_source(std::size_t n_channels,
                                            const std::vector<std::vector<double>>& mixing,
                                            double duration_s, double fs, std::uint64_t seed,
                                            double sensor_noise_std = 0.0) {
  if (n_channels < 2) fail(errc::invalid_spec, "need at least 2 channels");
  if (mixing.size() != n_channels) fail(errc::invalid_spec, "mixing must have one row per channel");
  if (mixing[0].empty()) fail(errc::invalid_spec, "mixing needs at least one source column");
  const std::size_t n_sources = mixing[0].size();
  for (const auto& row : mixing)
    if (row.size() != n_sources) fail(errc::invalid_spec, "mixing rows differ in length");
  if (!(fs > 0.0) || !(duration_s > 0.0)) fail(errc::invalid_spec, "fs and duration must be positive");
  if (!(sensor_noise_std >= 0.0)) fail(errc::invalid_spec, "sensor_noise_std must be >= 0");
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  if (n < 2) fail(errc::invalid_spec, "duration too short at this sample rate");

  rng::stream rng(seed);
  CommonSourceResult out;
  out.recording.sample_rate_hz = fs;
  out.recording.data.assign(n_channels, std::vector<double>(n));
  out.recording.channel_labels = default_channel_labels(n_channels);

  std::vector<double> sources(n_sources);
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& u : sources) u = rng.gaussian();
    for (std::size_t c = 0; c < n_channels; ++c) {
      double v = 0.0;
      for (std::size_t q = 0; q < n_sources; ++q) v += mixing[c][q] * sources[q];
      if (sensor_noise_std > 0.0) v += sensor_noise_std * rng.gaussian();
      out.recording.data[c][s] = v;
    }
  }

  const double nv = sensor_noise_std * sensor_noise_std;
  out.expected_msc.assign(n_channels * n_channels, 1.0);
  for (std::size_t a = 0; a < n_channels; ++a) {
    double pa = nv;
    for (double m : mixing[a]) pa += m * m;
    for (std::size_t b = 0; b < n_channels; ++b) {
      if (a == b) continue;
      double pb = nv, cross = 0.0;
      for (std::size_t q = 0; q < n_sources; ++q) {
        pb += mixing[b][q] * mixing[b][q];
        cross += mixing[a][q] * mixing[b][q];
      }
      out.expected_msc[a * n_channels + b] = (pa > 0.0 && pb > 0.0) ? cross * cross / (pa * pb) : 0.0;
    }
  }
  return out;
}

struct SynthDatasetSpec {
  std::size_t n_channels = 8;
  std::size_t n_subjects = 5;
  std::size_t n_trials_per_class = 10;
  double duration_s = 30.0;
  double fs = 200.0;
  // Coupling template per class, indexed by label_code.
  std::array<std::vector<Coupling>, 3> class_connectivity_templates;
  double base_freq_hz = 10.0;
  double phase_noise_std = 0.1;
  double sensor_snr_db = 10.0;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
};

struct SynthDataset {
  std::vector<MultichannelRecording> recordings;  // meta filled per trial
  Manifest manifest;                              // file names assigned by write_dataset
};

inline void validate_dataset_spec(const SynthDatasetSpec& spec) {
  if (spec.n_trials_per_class == 0) fail(errc::invalid_spec, "n_trials_per_class must be >= 1");
  if (spec.n_subjects == 0) fail(errc::invalid_spec, "n_subjects must be >= 1");
  OscillatorSpec osc;
  osc.base_freq_hz = spec.base_freq_hz;
  osc.phase_noise_std = spec.phase_noise_std;
  osc.amplitude = spec.amplitude;
  for (const auto& tpl : spec.class_connectivity_templates) {
    osc.coupling = tpl;
    detail::validate_oscillator(osc, spec.n_channels, spec.duration_s, spec.fs);
  }
  const auto& t = spec.class_connectivity_templates;
  if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2])
    fail(errc::invalid_spec, "class connectivity templates must be pairwise distinct");
}

// Subjects are assigned round-robin over repetitions, so each (subject,
// session) block holds one trial per class; trial seeds derive from the
// dataset seed and the global trial index.
inline SynthDataset gen_labeled_dataset(const SynthDatasetSpec& spec) {
  validate_dataset_spec(spec);
  SynthDataset out;
  out.manifest.kind = "recordings";
  std::uint64_t trial_counter = 0;
  for (std::size_t rep = 0; rep < spec.n_trials_per_class; ++rep) {
    const std::size_t subject = rep % spec.n_subjects;
    const std::size_t session = rep / spec.n_subjects + 1;
    for (int cls = 0; cls < 3; ++cls) {
      OscillatorSpec osc;
      osc.base_freq_hz = spec.base_freq_hz;
      osc.coupling = spec.class_connectivity_templates[static_cast<std::size_t>(cls)];
      osc.phase_noise_std = spec.phase_noise_std;
      osc.amplitude = spec.amplitude;
      osc.sensor_snr_db = spec.sensor_snr_db;
      osc.seed = rng::derive_seed(spec.seed, trial_counter++);

      MultichannelRecording rec = gen_coupled(osc, spec.n_channels, spec.duration_s, spec.fs);
      char subj[32];
      std::snprintf(subj, sizeof(subj), "s%02zu", subject + 1);
      rec.meta.subject_id = subj;
      rec.meta.session_index = static_cast<int>(session);
      rec.meta.trial_index = cls + 1;
      rec.meta.label = label_from_code(cls);

      ManifestEntry entry;
      entry.meta = rec.meta;
      out.manifest.entries.push_back(entry);
      out.recordings.push_back(std::move(rec));
    }
  }
  out.manifest.extra["ground_truth"] = {{"model", "kuramoto"},
                                        {"coupling_rate_rad_per_s", kCouplingRate},
                                        {"base_freq_hz", spec.base_freq_hz},
                                        {"phase_noise_std", spec.phase_noise_std},
                                        {"sensor_snr_db", spec.sensor_snr_db},
                                        {"seed", spec.seed}};
  return out;
}

inline std::string trial_stem(const TrialMeta& meta) {
  return meta.subject_id + "_" + std::to_string(meta.session_index) + "_" +
         std::to_string(meta.trial_index);
}

// Writes every trial in the ingestion formats (CSV + sidecar, or tensor
// container) plus the dataset manifest.
inline void write_dataset(SynthDataset& ds, const std::filesystem::path& dir,
                          RecordingFormat format = RecordingFormat::csv) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
    const auto& rec = ds.recordings[i];
    const std::string name =
        trial_stem(rec.meta) + (format == RecordingFormat::csv ? ".csv" : ".rec.bin");
    if (format == RecordingFormat::csv)
      save_recording_csv(rec, dir / name);
    else
      save_recording_tensor(rec, dir / name);
    ds.manifest.entries[i].file = name;
  }
  save_manifest(ds.manifest, dir / "manifest.json");
}

}  // namespace cohgram
