#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cohgram/config.hpp"
#include "cohgram/manifest.hpp"
#include "cohgram/png.hpp"
#include "cohgram/recording_io.hpp"
#include "cohgram/rng.hpp"
#include "cohgram/tensor_io.hpp"

using namespace cohgram;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / ("cohgram_io_" + std::to_string(::getpid()) +
                                                    "_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
  rng::stream rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform() * 2.0 - 1.0);
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  f << text;
}

MultichannelRecording small_recording() {
  MultichannelRecording rec;
  rec.sample_rate_hz = 200.0;
  rec.data.assign(2, std::vector<double>(400));
  rng::stream rng(7);
  for (auto& row : rec.data)
    for (auto& v : row) v = rng.gaussian();
  rec.channel_labels = {"Fp1", "Fp2"};
  rec.meta.subject_id = "s01";
  rec.meta.session_index = 1;
  rec.meta.trial_index = 2;
  rec.meta.label = ClassLabel::positive;
  return rec;
}

}  // namespace

TEST_CASE("tensor round-trip is bitwise exact for random tensors") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    rng::stream shape_rng(rng::derive_seed(101, seed));
    std::vector<std::size_t> dims(1 + shape_rng.below(3));
    std::size_t count = 1;
    for (auto& d : dims) {
      d = 1 + shape_rng.below(9);
      count *= d;
    }
    const auto data = random_floats(count, seed);
    const auto bytes = write_tensor(data, dims, {{"seed", seed}}, {});
    const Tensor t = read_tensor(bytes);
    REQUIRE(t.dims == dims);
    REQUIRE(t.data.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      REQUIRE(std::memcmp(&t.data[i], &data[i], 4) == 0);
    }
    REQUIRE(t.meta["seed"].get<std::uint64_t>() == seed);
  }
}

TEST_CASE("62x62x3 tensor payload is 46128 bytes") {
  const std::vector<std::size_t> dims{62, 62, 3};
  const auto data = random_floats(62 * 62 * 3, 42);
  const auto bytes = write_tensor(data, dims);
  const std::uint32_t header_len = static_cast<std::uint32_t>(bytes[8]) |
                                   (static_cast<std::uint32_t>(bytes[9]) << 8) |
                                   (static_cast<std::uint32_t>(bytes[10]) << 16) |
                                   (static_cast<std::uint32_t>(bytes[11]) << 24);
  REQUIRE(bytes.size() - 12 - header_len == 46128);
}

TEST_CASE("scalar tensor with dims [1] round-trips") {
  const std::vector<float> data{3.25f};
  const Tensor t = read_tensor(write_tensor(data, {1}));
  REQUIRE(t.dims == std::vector<std::size_t>{1});
  REQUIRE(t.data[0] == 3.25f);
}

TEST_CASE("tensor reader rejects corruption with the documented errors") {
  const auto data = random_floats(24, 5);
  auto bytes = write_tensor(data, {4, 6});

  SECTION("flipped magic byte") {
    auto bad = bytes;
    bad[0] ^= 0xFF;
    try {
      read_tensor(bad);
      FAIL("expected bad_magic");
    } catch (const error& e) {
      REQUIRE(e.code() == errc::bad_magic);
    }
  }
  SECTION("payload shortened by 4 bytes") {
    auto bad = bytes;
    bad.resize(bad.size() - 4);
    try {
      read_tensor(bad);
      FAIL("expected truncated_payload");
    } catch (const error& e) {
      REQUIRE(e.code() == errc::truncated_payload);
    }
  }
  SECTION("non-JSON header") {
    auto bad = bytes;
    bad[12] = '!';
    try {
      read_tensor(bad);
      FAIL("expected header_not_json or malformed_header");
    } catch (const error& e) {
      const bool expected = e.code() == errc::header_not_json || e.code() == errc::malformed_header;
      REQUIRE(expected);
    }
  }
  SECTION("trailing garbage") {
    auto bad = bytes;
    bad.push_back(0);
    try {
      read_tensor(bad);
      FAIL("expected malformed_header");
    } catch (const error& e) {
      REQUIRE(e.code() == errc::malformed_header);
    }
  }
}

TEST_CASE("write_tensor rejects dims that do not match the data") {
  const auto data = random_floats(10, 1);
  try {
    write_tensor(data, {3, 4});
    FAIL("expected dim_mismatch");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::dim_mismatch);
  }
}

TEST_CASE("CSV recording round-trips through save and load") {
  const auto dir = temp_dir();
  const auto rec = small_recording();
  save_recording_csv(rec, dir / "s01_1_2.csv");
  const auto loaded = load_recording(dir / "s01_1_2.csv", RecordingFormat::csv);
  REQUIRE(loaded.channels() == 2);
  REQUIRE(loaded.samples() == 400);
  REQUIRE(loaded.sample_rate_hz == 200.0);
  REQUIRE(loaded.channel_labels == rec.channel_labels);
  REQUIRE(loaded.meta.subject_id == "s01");
  REQUIRE(loaded.meta.session_index == 1);
  REQUIRE(loaded.meta.trial_index == 2);
  REQUIRE(loaded.meta.label == ClassLabel::positive);
  // CSV persists float32 precision
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 400; ++i)
      REQUIRE(loaded.data[c][i] == Catch::Approx(rec.data[c][i]).margin(1e-6));
  fs::remove_all(dir);
}

TEST_CASE("tensor-container recording round-trips with metadata") {
  const auto dir = temp_dir();
  const auto rec = small_recording();
  save_recording_tensor(rec, dir / "s01_1_2.rec.bin");
  const auto loaded = load_recording(dir / "s01_1_2.rec.bin", RecordingFormat::tensor);
  REQUIRE(loaded.channels() == 2);
  REQUIRE(loaded.samples() == 400);
  REQUIRE(loaded.meta.label == ClassLabel::positive);
  REQUIRE(loaded.channel_labels == rec.channel_labels);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 400; ++i)
      REQUIRE(static_cast<float>(loaded.data[c][i]) == static_cast<float>(rec.data[c][i]));
  fs::remove_all(dir);
}

TEST_CASE("NaN cell is rejected with channel and sample position") {
  const auto dir = temp_dir();
  std::string csv;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 400; ++i) {
      if (c == 3 && i == 17) csv += "NaN";
      else csv += "0.5";
      csv += (i + 1 < 400) ? "," : "\n";
    }
  }
  write_text(dir / "bad.csv", csv);
  write_text(dir / "bad.meta.json",
             R"({"sample_rate_hz": 200.0, "subject_id": "s01", "session_index": 1, "trial_index": 1, "label": 1})");
  try {
    load_recording(dir / "bad.csv", RecordingFormat::csv);
    FAIL("expected non_finite_sample");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::non_finite_sample);
    REQUIRE(e.channel == 3);
    REQUIRE(e.index == 17);
  }
  fs::remove_all(dir);
}

TEST_CASE("missing sidecar is a distinct error") {
  const auto dir = temp_dir();
  write_text(dir / "orphan.csv", "1,2,3,4\n5,6,7,8\n");
  try {
    load_recording(dir / "orphan.csv", RecordingFormat::csv);
    FAIL("expected missing_sidecar");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::missing_sidecar);
  }
  fs::remove_all(dir);
}

TEST_CASE("duplicate channel labels are rejected") {
  auto rec = small_recording();
  rec.channel_labels = {"Fp1", "Fp1"};
  try {
    validate(rec);
    FAIL("expected duplicate_channel_label");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::duplicate_channel_label);
  }
}

TEST_CASE("ragged CSV rows are rejected") {
  const auto dir = temp_dir();
  write_text(dir / "ragged.csv", "1,2,3\n4,5\n");
  write_text(dir / "ragged.meta.json",
             R"({"sample_rate_hz": 1.0, "subject_id": "s", "session_index": 1, "trial_index": 1, "label": 0})");
  REQUIRE_THROWS_AS(load_recording(dir / "ragged.csv", RecordingFormat::csv), error);
  fs::remove_all(dir);
}

TEST_CASE("manifest JSON round-trips") {
  Manifest m;
  m.kind = "features";
  ManifestEntry a;
  a.file = "s01_1_1.cohg.bin";
  a.meta.subject_id = "s01";
  a.meta.session_index = 1;
  a.meta.trial_index = 1;
  a.meta.label = ClassLabel::negative;
  a.window_index = 3;
  ManifestEntry b;
  b.file = "broken.csv";
  b.status = "failed";
  b.error_message = "boom";
  m.entries = {a, b};
  m.extra["note"] = "x";

  const auto dir = temp_dir();
  save_manifest(m, dir / "manifest.json");
  const Manifest loaded = load_manifest(dir / "manifest.json");
  REQUIRE(loaded.kind == "features");
  REQUIRE(loaded.entries.size() == 2);
  REQUIRE(loaded.entries[0].file == a.file);
  REQUIRE(loaded.entries[0].meta.label == ClassLabel::negative);
  REQUIRE(loaded.entries[0].window_index == 3);
  REQUIRE(loaded.entries[0].ok());
  REQUIRE_FALSE(loaded.entries[1].ok());
  REQUIRE(loaded.entries[1].error_message == "boom");
  REQUIRE(loaded.ok_count() == 1);
  REQUIRE(loaded.extra["note"] == "x");
  fs::remove_all(dir);
}

TEST_CASE("config round-trips through JSON and rejects bad values") {
  PipelineConfig c;
  c.bands[0].low_hz = 7.5;
  c.welch.segment_len = 128;
  c.windowing.mode = WindowingConfig::Mode::sliding;
  c.windowing.window_s = 20.0;
  c.windowing.stride_s = 10.0;
  c.diag_norm.mode = DiagNormConfig::Mode::global;
  c.diag_norm.lo = -1.0;
  c.diag_norm.hi = 5.0;
  c.msc_shared_across_bands = true;
  c.seed = 99;

  const auto j = to_json(c);
  const PipelineConfig back = config_from_json(j);
  REQUIRE(to_json(back) == j);

  auto bad = j;
  bad["welch"]["overlap"] = 1.5;
  REQUIRE_THROWS_AS(config_from_json(bad), error);
  auto bad2 = j;
  bad2["bands"] = nlohmann::json::array();
  REQUIRE_THROWS_AS(config_from_json(bad2), error);
}

TEST_CASE("PNG encode/decode round-trips pixels") {
  const std::size_t w = 5, h = 3;
  std::vector<std::uint8_t> px(3 * w * h);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>((i * 37) & 0xFF);
  const auto bytes = png::encode_rgb8(px, w, h);
  REQUIRE(bytes.size() > 8);
  REQUIRE(bytes[1] == 'P');
  const auto img = png::decode_rgb8(bytes);
  REQUIRE(img.width == w);
  REQUIRE(img.height == h);
  REQUIRE(img.pixels == px);
}

TEST_CASE("PNG writer handles images larger than one deflate stored block") {
  const std::size_t w = 160, h = 140;  // raw stream > 65535 bytes
  std::vector<std::uint8_t> px(3 * w * h);
  rng::stream rng(3);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng.below(256));
  const auto img = png::decode_rgb8(png::encode_rgb8(px, w, h));
  REQUIRE(img.pixels == px);
}

TEST_CASE("recording save is deterministic") {
  const auto dir = temp_dir();
  const auto rec = small_recording();
  save_recording_csv(rec, dir / "a.csv");
  save_recording_csv(rec, dir / "b.csv");
  const auto a = read_file_bytes(dir / "a.csv");
  const auto b = read_file_bytes(dir / "b.csv");
  REQUIRE(a == b);
  fs::remove_all(dir);
}
