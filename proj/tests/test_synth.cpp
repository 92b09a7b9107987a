#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <unistd.h>

#include "cohgram/features.hpp"
#include "cohgram/filter.hpp"
#include "cohgram/hilbert.hpp"
#include "cohgram/synth.hpp"

using namespace cohgram;
namespace fs = std::filesystem;

namespace {

const BandDefinition kAlpha{"alpha", 8.0, 13.0};

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / ("cohgram_syn_" + std::to_string(::getpid()) +
                                                    "_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

// bandpass -> analytic phase -> MPC with 5% edges excluded, the same chain
// the assembly module runs
double pipeline_mpc(const MultichannelRecording& rec, std::size_t i, std::size_t k) {
  const auto fi = bandpass(rec.data[i], kAlpha, rec.sample_rate_hz);
  const auto fk = bandpass(rec.data[k], kAlpha, rec.sample_rate_hz);
  return mpc(analytic_phase(fi, kAlpha), analytic_phase(fk, kAlpha), 0.05).value;
}

OscillatorSpec pair_spec(double kappa, double noise, std::uint64_t seed) {
  OscillatorSpec spec;
  spec.base_freq_hz = 10.0;
  spec.coupling = {{0, 1, kappa}};
  spec.phase_noise_std = noise;
  spec.sensor_snr_db = std::numeric_limits<double>::infinity();
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("full coupling with zero phase noise locks to MPC 1") {
  const auto rec = gen_coupled(pair_spec(1.0, 0.0, 1), 2, 30.0, 200.0);
  REQUIRE(pipeline_mpc(rec, 0, 1) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("uncoupled oscillators with phase noise decohere") {
  // 99th percentile over 50 seeds stays under 0.1
  std::vector<double> values;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rec = gen_coupled(pair_spec(0.0, 0.3, seed), 2, 240.0, 200.0);
    values.push_back(pipeline_mpc(rec, 0, 1));
  }
  std::sort(values.begin(), values.end());
  REQUIRE(values[49] < 0.1);
}

TEST_CASE("measured MPC increases monotonically with coupling strength") {
  const std::vector<double> kappas{0.0, 0.3, 0.6, 1.0};
  std::vector<double> means;
  for (double kappa : kappas) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto rec = gen_coupled(pair_spec(kappa, 0.2, 100 + seed), 2, 60.0, 200.0);
      sum += pipeline_mpc(rec, 0, 1);
    }
    means.push_back(sum / 20.0);
  }
  for (std::size_t i = 1; i < means.size(); ++i) REQUIRE(means[i] > means[i - 1]);
  // OU prediction exp(-var/2) with var = sigma^2 fs / (2 kappa G); the sin
  // linearization only holds where the stationary spread is moderate
  for (std::size_t i = 2; i < kappas.size(); ++i) {
    const double var = 0.2 * 0.2 * 200.0 / (2.0 * kappas[i] * kCouplingRate);
    REQUIRE(means[i] == Catch::Approx(std::exp(-var / 2.0)).margin(0.1));
  }
}

TEST_CASE("identical seeds reproduce recordings bit-exactly") {
  OscillatorSpec spec = pair_spec(0.5, 0.1, 77);
  spec.sensor_snr_db = 10.0;
  const auto a = gen_coupled(spec, 3, 10.0, 200.0);
  const auto b = gen_coupled(spec, 3, 10.0, 200.0);
  REQUIRE(a.data == b.data);
  spec.seed = 78;
  const auto c = gen_coupled(spec, 3, 10.0, 200.0);
  REQUIRE(a.data != c.data);
}

TEST_CASE("oscillator spec validation") {
  try {
    gen_coupled(pair_spec(1.2, 0.0, 1), 2, 10.0, 200.0);
    FAIL("expected invalid_spec");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::invalid_spec);
  }
  OscillatorSpec self;
  self.coupling = {{1, 1, 0.5}};
  REQUIRE_THROWS_AS(gen_coupled(self, 3, 10.0, 200.0), error);
  OscillatorSpec fast;
  fast.base_freq_hz = 150.0;  // above Nyquist at 200 Hz
  REQUIRE_THROWS_AS(gen_coupled(fast, 2, 10.0, 200.0), error);
}

TEST_CASE("identical mixing rows give MSC 1 at every powered bin") {
  const std::vector<std::vector<double>> mixing{{1.0}, {1.0}};
  const auto res = gen_common_source(2, mixing, 60.0, 200.0, 9);
  const auto spectrum = msc_spectrum(res.recording.data[0], res.recording.data[1], 200.0);
  for (std::size_t k = 0; k < spectrum.values.size(); ++k) {
    if (std::find(spectrum.zero_power_bins.begin(), spectrum.zero_power_bins.end(),
                  static_cast<std::uint32_t>(k)) != spectrum.zero_power_bins.end())
      continue;
    REQUIRE(spectrum.values[k] == Catch::Approx(1.0).margin(1e-6));
  }
  REQUIRE(res.expected_msc[1] == 1.0);
}

TEST_CASE("orthogonal single-source rows are incoherent") {
  const std::vector<std::vector<double>> mixing{{1.0, 0.0}, {0.0, 1.0}};
  const auto res = gen_common_source(2, mixing, 120.0, 200.0, 10);
  const auto spectrum = msc_spectrum(res.recording.data[0], res.recording.data[1], 200.0);
  std::vector<double> v = spectrum.values;
  std::sort(v.begin(), v.end());
  REQUIRE(v[v.size() / 2] < 0.15);
  REQUIRE(res.expected_msc[1] == 0.0);
}

TEST_CASE("shared source at SNR 1:1 matches the closed-form MSC 0.25") {
  const std::vector<std::vector<double>> mixing{{1.0}, {1.0}};
  double sum = 0.0;
  const int n_seeds = 10;
  for (int s = 0; s < n_seeds; ++s) {
    const auto res = gen_common_source(2, mixing, 120.0, 200.0, 200 + s, 1.0);
    REQUIRE(res.expected_msc[1] == Catch::Approx(0.25).margin(1e-12));
    const auto spectrum = msc_spectrum(res.recording.data[0], res.recording.data[1], 200.0);
    sum += band_msc(spectrum, {"wide", 5.0, 95.0}).value;
  }
  REQUIRE(sum / n_seeds == Catch::Approx(0.25).margin(0.05));
}

TEST_CASE("common-source validation rejects bad mixing shapes") {
  REQUIRE_THROWS_AS(gen_common_source(2, {{1.0}}, 10.0, 200.0, 0), error);
  REQUIRE_THROWS_AS(gen_common_source(2, {{1.0}, {1.0, 2.0}}, 10.0, 200.0, 0), error);
  try {
    gen_common_source(2, {{1.0}, {1.0}}, 10.0, 200.0, 0, -1.0);
    FAIL("expected invalid_spec");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::invalid_spec);
  }
}

TEST_CASE("labeled dataset layout and determinism") {
  SynthDatasetSpec spec;
  spec.n_channels = 4;
  spec.n_subjects = 3;
  spec.n_trials_per_class = 6;
  spec.duration_s = 5.0;
  spec.class_connectivity_templates = {
      std::vector<Coupling>{{0, 1, 1.0}},
      std::vector<Coupling>{{1, 2, 1.0}},
      std::vector<Coupling>{{2, 3, 1.0}},
  };
  spec.seed = 4;

  const auto ds = gen_labeled_dataset(spec);
  REQUIRE(ds.recordings.size() == 18);
  REQUIRE(ds.manifest.entries.size() == 18);
  std::array<int, 3> class_counts{};
  std::set<std::string> subjects;
  for (const auto& entry : ds.manifest.entries) {
    ++class_counts[static_cast<std::size_t>(label_code(entry.meta.label))];
    subjects.insert(entry.meta.subject_id);
  }
  REQUIRE(class_counts == std::array<int, 3>{6, 6, 6});
  REQUIRE(subjects == std::set<std::string>{"s01", "s02", "s03"});
  // each (subject, session) block carries one trial per class
  REQUIRE(ds.manifest.entries[0].meta.subject_id == "s01");
  REQUIRE(ds.manifest.entries[0].meta.session_index == 1);
  REQUIRE(ds.manifest.entries[3].meta.subject_id == "s02");
  REQUIRE(ds.recordings[0].meta.trial_index == 1);
  REQUIRE(ds.recordings[1].meta.trial_index == 2);

  const auto again = gen_labeled_dataset(spec);
  for (std::size_t i = 0; i < ds.recordings.size(); ++i)
    REQUIRE(ds.recordings[i].data == again.recordings[i].data);
}

TEST_CASE("dataset spec validation") {
  SynthDatasetSpec spec;
  spec.class_connectivity_templates = {
      std::vector<Coupling>{{0, 1, 1.0}},
      std::vector<Coupling>{{1, 2, 1.0}},
      std::vector<Coupling>{{2, 3, 1.0}},
  };
  SECTION("zero trials per class") {
    spec.n_trials_per_class = 0;
    try {
      gen_labeled_dataset(spec);
      FAIL("expected invalid_spec");
    } catch (const error& e) {
      REQUIRE(e.code() == errc::invalid_spec);
    }
  }
  SECTION("duplicate templates") {
    spec.class_connectivity_templates[2] = spec.class_connectivity_templates[0];
    REQUIRE_THROWS_AS(gen_labeled_dataset(spec), error);
  }
  SECTION("coupling index beyond channel count") {
    spec.n_channels = 3;  // template uses channel 3
    REQUIRE_THROWS_AS(gen_labeled_dataset(spec), error);
  }
}

TEST_CASE("write_dataset emits loadable recordings and manifest") {
  SynthDatasetSpec spec;
  spec.n_channels = 3;
  spec.n_subjects = 2;
  spec.n_trials_per_class = 2;
  spec.duration_s = 4.0;
  spec.class_connectivity_templates = {
      std::vector<Coupling>{{0, 1, 1.0}},
      std::vector<Coupling>{{1, 2, 1.0}},
      std::vector<Coupling>{{0, 2, 1.0}},
  };
  spec.seed = 11;

  const auto dir = temp_dir();
  auto ds = gen_labeled_dataset(spec);
  write_dataset(ds, dir, RecordingFormat::csv);
  const Manifest manifest = load_manifest(dir / "manifest.json");
  REQUIRE(manifest.kind == "recordings");
  REQUIRE(manifest.entries.size() == 6);
  for (const auto& entry : manifest.entries) {
    const auto rec = load_recording(dir / entry.file, RecordingFormat::csv);
    REQUIRE(rec.channels() == 3);
    REQUIRE(rec.meta.subject_id == entry.meta.subject_id);
    REQUIRE(rec.meta.label == entry.meta.label);
  }
  fs::remove_all(dir);
}

TEST_CASE("sensor noise follows the requested SNR") {
  OscillatorSpec clean = pair_spec(0.0, 0.0, 3);
  OscillatorSpec noisy = clean;
  noisy.sensor_snr_db = 10.0;
  const auto a = gen_coupled(clean, 2, 60.0, 200.0);
  const auto b = gen_coupled(noisy, 2, 60.0, 200.0);
  double signal_power = 0.0, diff_power = 0.0;
  for (std::size_t i = 0; i < a.data[0].size(); ++i) {
    signal_power += a.data[0][i] * a.data[0][i];
    const double d = b.data[0][i] - a.data[0][i];
    diff_power += d * d;
  }
  const double snr_db = 10.0 * std::log10(signal_power / diff_power);
  REQUIRE(snr_db == Catch::Approx(10.0).margin(0.5));
}
