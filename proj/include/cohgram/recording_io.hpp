#pragma once

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohgram/error.hpp"
#include "cohgram/tensor_io.hpp"
#include "cohgram/types.hpp"

// Recording persistence. Two containers:
//   csv     one row per channel (C rows x N columns, no header row) plus a
//           sidecar `<stem>.meta.json` carrying sample rate, trial metadata
//           and channel labels
//   tensor  a COHGRAM1 file with dims [C, N] and the same metadata embedded
//
// SEED itself ships as MATLAB files; converting is the caller's job (export
// each trial as channels-by-samples CSV plus a sidecar, see README).

namespace cohgram {

enum class RecordingFormat { csv, tensor };

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

namespace detail {

struct SidecarData {
  double sample_rate_hz = 0.0;
  TrialMeta meta;
  std::vector<std::string> channel_labels;  // may be empty
};

inline SidecarData parse_sidecar(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(errc::missing_sidecar, "sidecar not found: " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_header, "sidecar is not valid JSON: " + std::string(e.what()));
  }
  SidecarData s;
  try {
    s.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    s.meta.subject_id = j.at("subject_id").get<std::string>();
    s.meta.session_index = j.at("session_index").get<int>();
    s.meta.trial_index = j.at("trial_index").get<int>();
    s.meta.label = label_from_code(j.at("label").get<int>());
    if (j.contains("channel_labels"))
      s.channel_labels = j["channel_labels"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_header, "sidecar missing or mistyped field: " + std::string(e.what()));
  }
  if (s.meta.session_index < 1 || s.meta.trial_index < 1)
    fail(errc::malformed_header, "session_index and trial_index must be >= 1");
  return s;
}

inline nlohmann::json sidecar_json(const MultichannelRecording& rec) {
  nlohmann::json j;
  j["sample_rate_hz"] = rec.sample_rate_hz;
  j["subject_id"] = rec.meta.subject_id;
  j["session_index"] = rec.meta.session_index;
  j["trial_index"] = rec.meta.trial_index;
  j["label"] = label_code(rec.meta.label);
  j["channel_labels"] = rec.channel_labels;
  return j;
}

// One CSV cell. strtod accepts "nan"/"inf", which validation then rejects
// with the cell position attached.
inline double parse_cell(const std::string& cell, std::size_t channel, std::size_t index) {
  errno = 0;
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0'))
    fail(errc::malformed_header, "unparseable value '" + cell + "' at channel " + std::to_string(channel) +
                                     ", sample " + std::to_string(index));
  if (!std::isfinite(v))
    fail_at(errc::non_finite_sample,
            "non-finite sample at channel " + std::to_string(channel) + ", index " + std::to_string(index),
            static_cast<long>(channel), static_cast<long>(index));
  return v;
}

}  // namespace detail

inline MultichannelRecording load_recording_csv(const std::filesystem::path& path) {
  const detail::SidecarData side = detail::parse_sidecar(sidecar_path(path));

  std::ifstream f(path);
  if (!f) fail(errc::io_failure, "cannot open " + path.string());

  MultichannelRecording rec;
  rec.sample_rate_hz = side.sample_rate_hz;
  rec.meta = side.meta;

  std::string line;
  std::size_t channel = 0;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0, index = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::size_t stop = (comma == std::string::npos) ? line.size() : comma;
      row.push_back(detail::parse_cell(line.substr(start, stop - start), channel, index));
      ++index;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rec.data.push_back(std::move(row));
    ++channel;
  }
  if (rec.data.empty()) fail(errc::malformed_header, "empty CSV: " + path.string());

  rec.channel_labels =
      side.channel_labels.empty() ? default_channel_labels(rec.channels()) : side.channel_labels;
  validate(rec);
  return rec;
}

inline void save_recording_csv(const MultichannelRecording& rec, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(errc::io_failure, "cannot open " + path.string() + " for writing");
  char buf[32];
  for (const auto& row : rec.data) {
    std::string line;
    line.reserve(row.size() * 12);
    for (std::size_t i = 0; i < row.size(); ++i) {
      // persisted precision is float32; %.9g round-trips it exactly
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(static_cast<float>(row[i])));
      if (i) line.push_back(',');
      line += buf;
    }
    line.push_back('\n');
    f << line;
  }
  if (!f) fail(errc::io_failure, "short write to " + path.string());

  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) fail(errc::io_failure, "cannot write sidecar for " + path.string());
  side << detail::sidecar_json(rec).dump(2) << "\n";
}

inline void save_recording_tensor(const MultichannelRecording& rec, const std::filesystem::path& path) {
  std::vector<float> flat;
  flat.reserve(rec.channels() * rec.samples());
  for (const auto& row : rec.data)
    for (double v : row) flat.push_back(static_cast<float>(v));
  write_tensor_file(path, flat, {rec.channels(), rec.samples()}, detail::sidecar_json(rec),
                    {"channel", "sample"});
}

inline MultichannelRecording load_recording_tensor(const std::filesystem::path& path) {
  const Tensor t = read_tensor_file(path);
  if (t.dims.size() != 2) fail(errc::malformed_header, "recording tensor must be 2-D (channels x samples)");

  MultichannelRecording rec;
  try {
    rec.sample_rate_hz = t.meta.at("sample_rate_hz").get<double>();
    rec.meta.subject_id = t.meta.at("subject_id").get<std::string>();
    rec.meta.session_index = t.meta.at("session_index").get<int>();
    rec.meta.trial_index = t.meta.at("trial_index").get<int>();
    rec.meta.label = label_from_code(t.meta.at("label").get<int>());
    if (t.meta.contains("channel_labels"))
      rec.channel_labels = t.meta["channel_labels"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_header, "recording tensor meta incomplete: " + std::string(e.what()));
  }

  const std::size_t c = t.dims[0], n = t.dims[1];
  rec.data.assign(c, std::vector<double>(n));
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < n; ++j) rec.data[i][j] = static_cast<double>(t.data[i * n + j]);
  if (rec.channel_labels.empty()) rec.channel_labels = default_channel_labels(c);
  validate(rec);
  return rec;
}

inline MultichannelRecording load_recording(const std::filesystem::path& path, RecordingFormat format) {
  if (!std::filesystem::exists(path)) fail(errc::io_failure, "no such file: " + path.string());
  return format == RecordingFormat::csv ? load_recording_csv(path) : load_recording_tensor(path);
}

// `.csv` loads as CSV, anything else as a tensor container.
inline RecordingFormat infer_recording_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? RecordingFormat::csv : RecordingFormat::tensor;
}

}  // namespace cohgram
