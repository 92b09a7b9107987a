#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cohgram/config.hpp"
#include "cohgram/error.hpp"
#include "cohgram/eval.hpp"
#include "cohgram/image.hpp"
#include "cohgram/manifest.hpp"
#include "cohgram/parallel.hpp"
#include "cohgram/recording_io.hpp"

// Batch extraction: recordings in, feature-image files plus a manifest
// out. Trials process independently; output order and bytes do not depend
// on the worker count.

namespace cohgram {

struct WindowSlice {
  std::size_t start = 0;
  std::size_t length = 0;
};

// Whole-trial mode yields one slice; sliding mode yields
// floor((n - window) / stride) + 1 slices.
inline std::vector<WindowSlice> window_slices(std::size_t n_samples, double fs,
                                              const WindowingConfig& cfg) {
  if (cfg.mode == WindowingConfig::Mode::whole_trial) return {{0, n_samples}};
  const auto win = static_cast<std::size_t>(std::llround(cfg.window_s * fs));
  const auto stride = static_cast<std::size_t>(std::llround(cfg.stride_s * fs));
  if (win < 2 || stride < 1) fail(errc::invalid_config, "window and stride too short at this rate");
  if (n_samples < win)
    fail(errc::signal_shorter_than_window,
         "trial of " + std::to_string(n_samples) + " samples shorter than the " +
             std::to_string(win) + "-sample window");
  std::vector<WindowSlice> out;
  const std::size_t count = (n_samples - win) / stride + 1;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) out.push_back({w * stride, win});
  return out;
}

inline MultichannelRecording slice_recording(const MultichannelRecording& rec,
                                             const WindowSlice& slice) {
  MultichannelRecording out;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.channel_labels = rec.channel_labels;
  out.meta = rec.meta;
  out.data.reserve(rec.data.size());
  for (const auto& row : rec.data)
    out.data.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(slice.start),
                          row.begin() + static_cast<std::ptrdiff_t>(slice.start + slice.length));
  return out;
}

// One normalized feature image per window slice.
inline std::vector<FeatureImage> extract_trial(const MultichannelRecording& rec,
                                               const PipelineConfig& cfg, int jobs = 1) {
  validate(rec);
  validate_config(cfg);
  std::vector<FeatureImage> images;
  for (const auto& slice : window_slices(rec.samples(), rec.sample_rate_hz, cfg.windowing)) {
    FeatureImage img = normalize_diagonal(assemble_image(slice_recording(rec, slice), cfg, jobs),
                                          cfg.diag_norm);
    check_image_range(img);
    images.push_back(std::move(img));
  }
  return images;
}

inline std::string image_stem(const TrialMeta& meta, int window_index) {
  std::string stem = meta.subject_id + "_" + std::to_string(meta.session_index) + "_" +
                     std::to_string(meta.trial_index);
  if (window_index >= 0) stem += "_" + std::to_string(window_index);
  return stem;
}

inline std::vector<std::filesystem::path> list_recordings(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(errc::io_failure, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() > 4 && name.ends_with(".csv")) files.push_back(e.path());
    else if (name.size() > 8 && name.ends_with(".rec.bin")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct ExtractOptions {
  int jobs = 1;
  bool write_png = false;
};

namespace detail {

struct TrialOutput {
  std::vector<ManifestEntry> entries;
  std::vector<std::filesystem::path> temp_files;  // parallel to entries (tensor, then png)
  bool failed = false;
  std::string error_message;
  std::string input_name;
};

}  // namespace detail

// Processes every recording under input_dir, writes
// <subject>_<session>_<trial>[_<window>].cohg.bin (and optional .png) plus
// manifest.json into output_dir. A failing trial is flagged in the
// manifest and does not block the others. Workers write to per-trial temp
// names; the sequential commit pass renames them in input order, so
// results are byte-identical for any job count.
inline Manifest extract_directory(const std::filesystem::path& input_dir,
                                  const std::filesystem::path& output_dir,
                                  const PipelineConfig& cfg, const ExtractOptions& opts = {}) {
  validate_config(cfg);
  const auto files = list_recordings(input_dir);
  if (files.empty()) fail(errc::empty_manifest, "no .csv or .rec.bin recordings in " + input_dir.string());
  std::filesystem::create_directories(output_dir);

  const bool windowed = cfg.windowing.mode == WindowingConfig::Mode::sliding;
  std::vector<detail::TrialOutput> outputs(files.size());
  parallel_for(files.size(), opts.jobs, [&](std::size_t t) {
    auto& out = outputs[t];
    out.input_name = files[t].filename().string();
    try {
      const MultichannelRecording rec = load_recording(files[t], infer_recording_format(files[t]));
      const auto images = extract_trial(rec, cfg, 1);
      for (std::size_t w = 0; w < images.size(); ++w) {
        const int window_index = windowed ? static_cast<int>(w) : -1;
        const std::string stem = image_stem(rec.meta, window_index);
        ManifestEntry entry;
        entry.file = stem + ".cohg.bin";
        entry.meta = rec.meta;
        entry.window_index = window_index;
        const auto temp = output_dir / (stem + ".cohg.bin.tmp" + std::to_string(t));
        export_image(images[w], temp, ImageFormat::tensor);
        out.entries.push_back(entry);
        out.temp_files.push_back(temp);
        if (opts.write_png) {
          const auto png_temp = output_dir / (stem + ".png.tmp" + std::to_string(t));
          export_image(images[w], png_temp, ImageFormat::png8);
          ManifestEntry png_entry = entry;
          png_entry.file = stem + ".png";
          out.entries.push_back(png_entry);
          out.temp_files.push_back(png_temp);
        }
      }
    } catch (const std::exception& e) {
      out.failed = true;
      out.error_message = e.what();
      for (const auto& temp : out.temp_files) std::filesystem::remove(temp);
      out.entries.clear();
      out.temp_files.clear();
    }
  });

  Manifest manifest;
  manifest.kind = "features";
  manifest.extra["config"] = to_json(cfg);
  manifest.extra["source_dir"] = input_dir.string();
  std::set<std::string> committed;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    auto& out = outputs[t];
    if (out.failed) {
      ManifestEntry entry;
      entry.file = out.input_name;
      entry.status = "failed";
      entry.error_message = out.error_message;
      manifest.entries.push_back(entry);
      continue;
    }
    bool conflict = false;
    for (const auto& entry : out.entries)
      if (committed.count(entry.file)) conflict = true;
    if (conflict) {
      for (const auto& temp : out.temp_files) std::filesystem::remove(temp);
      ManifestEntry entry;
      entry.file = out.input_name;
      entry.status = "failed";
      entry.error_message = "output name collision: another trial already produced " +
                            out.entries.front().file;
      manifest.entries.push_back(entry);
      continue;
    }
    for (std::size_t e = 0; e < out.entries.size(); ++e) {
      std::filesystem::rename(out.temp_files[e], output_dir / out.entries[e].file);
      committed.insert(out.entries[e].file);
      manifest.entries.push_back(out.entries[e]);
    }
  }
  save_manifest(manifest, output_dir / "manifest.json");
  return manifest;
}

// Flattened feature vector in tensor layout, for the baseline classifier.
inline std::vector<double> flatten_image(const FeatureImage& img) {
  const Tensor t = image_to_tensor(img);
  return {t.data.begin(), t.data.end()};
}

inline std::vector<LabeledExample> load_examples(const std::filesystem::path& manifest_path) {
  const Manifest manifest = load_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  std::vector<LabeledExample> examples;
  for (const auto& entry : manifest.entries) {
    if (!entry.ok()) continue;
    if (!entry.file.ends_with(".cohg.bin")) continue;  // skip PNG companions
    const Tensor t = read_tensor_file(dir / entry.file);
    LabeledExample ex;
    ex.features.assign(t.data.begin(), t.data.end());
    ex.label = label_code(entry.meta.label);
    ex.subject_id = entry.meta.subject_id;
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) fail(errc::empty_manifest, "manifest lists no usable feature files");
  return examples;
}

}  // namespace cohgram
