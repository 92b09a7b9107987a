#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohgram/error.hpp"
#include "cohgram/filter.hpp"
#include "cohgram/types.hpp"
#include "cohgram/welch.hpp"

// Pipeline configuration, one JSON file end to end. `cohgram inspect
// --defaults` dumps the defaults; a dumped config re-runs identically.

namespace cohgram {

struct WindowingConfig {
  enum class Mode { whole_trial, sliding };
  Mode mode = Mode::whole_trial;
  double window_s = 20.0;  // sliding mode only
  double stride_s = 20.0;
};

struct DiagNormConfig {
  enum class Mode { minmax_per_image, global };
  Mode mode = Mode::minmax_per_image;
  double lo = 0.0;  // global mode bounds
  double hi = 1.0;
};

struct PipelineConfig {
  std::vector<BandDefinition> bands{{"alpha", 8.0, 13.0}, {"beta", 13.0, 30.0}, {"gamma", 30.0, 70.0}};
  FilterSpec filter;
  WelchParams welch;
  double de_window_s = 1.0;
  double edge_exclusion_fraction = 0.05;
  WindowingConfig windowing;
  DiagNormConfig diag_norm;
  bool msc_shared_across_bands = false;
  std::uint64_t seed = 0;
};

inline void validate_config(const PipelineConfig& c) {
  if (c.bands.size() != 3) fail(errc::invalid_config, "exactly three bands (image planes) required");
  for (const auto& b : c.bands) {
    if (!(b.low_hz > 0.0) || !(b.high_hz > b.low_hz))
      fail(errc::invalid_config, "band '" + b.name + "' needs 0 < low < high");
  }
  if (c.filter.order < 2 || c.filter.order % 2 != 0)
    fail(errc::invalid_config, "filter order must be even and >= 2");
  if (c.welch.segment_len < 8 || c.welch.segment_len % 2 != 0)
    fail(errc::invalid_config, "welch segment_len must be even and >= 8");
  if (!(c.welch.overlap >= 0.0) || !(c.welch.overlap < 1.0))
    fail(errc::invalid_config, "welch overlap must be in [0, 1)");
  if (!(c.de_window_s > 0.0)) fail(errc::invalid_config, "de_window_s must be positive");
  if (!(c.edge_exclusion_fraction >= 0.0) || !(c.edge_exclusion_fraction < 0.5))
    fail(errc::invalid_config, "edge_exclusion_fraction must be in [0, 0.5)");
  if (c.windowing.mode == WindowingConfig::Mode::sliding) {
    if (!(c.windowing.window_s > 0.0) || !(c.windowing.stride_s > 0.0))
      fail(errc::invalid_config, "sliding windowing needs positive window_s and stride_s");
  }
  if (c.diag_norm.mode == DiagNormConfig::Mode::global && !(c.diag_norm.hi > c.diag_norm.lo))
    fail(errc::invalid_config, "global diagonal bounds need hi > lo");
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["bands"] = nlohmann::json::array();
  for (const auto& b : c.bands)
    j["bands"].push_back({{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}});
  j["filter"] = {{"order", c.filter.order}};
  j["welch"] = {{"segment_len", c.welch.segment_len}, {"overlap", c.welch.overlap}, {"window", "hann"}};
  j["de_window_s"] = c.de_window_s;
  j["edge_exclusion_fraction"] = c.edge_exclusion_fraction;
  j["windowing"] = {
      {"mode", c.windowing.mode == WindowingConfig::Mode::whole_trial ? "whole_trial" : "sliding"},
      {"window_s", c.windowing.window_s},
      {"stride_s", c.windowing.stride_s}};
  j["diagonal_normalization"] = {
      {"mode", c.diag_norm.mode == DiagNormConfig::Mode::minmax_per_image ? "minmax_per_image" : "global"},
      {"lo", c.diag_norm.lo},
      {"hi", c.diag_norm.hi}};
  j["msc_shared_across_bands"] = c.msc_shared_across_bands;
  j["seed"] = c.seed;
  return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (j.contains("bands")) {
      c.bands.clear();
      for (const auto& jb : j["bands"])
        c.bands.push_back({jb.at("name").get<std::string>(), jb.at("low_hz").get<double>(),
                           jb.at("high_hz").get<double>()});
    }
    if (j.contains("filter")) c.filter.order = j["filter"].value("order", c.filter.order);
    if (j.contains("welch")) {
      c.welch.segment_len = j["welch"].value("segment_len", c.welch.segment_len);
      c.welch.overlap = j["welch"].value("overlap", c.welch.overlap);
      if (j["welch"].contains("window") && j["welch"]["window"].get<std::string>() != "hann")
        fail(errc::invalid_config, "only the hann window is supported");
    }
    c.de_window_s = j.value("de_window_s", c.de_window_s);
    c.edge_exclusion_fraction = j.value("edge_exclusion_fraction", c.edge_exclusion_fraction);
    if (j.contains("windowing")) {
      const auto& jw = j["windowing"];
      const std::string mode = jw.value("mode", std::string("whole_trial"));
      if (mode == "whole_trial") c.windowing.mode = WindowingConfig::Mode::whole_trial;
      else if (mode == "sliding") c.windowing.mode = WindowingConfig::Mode::sliding;
      else fail(errc::invalid_config, "unknown windowing mode '" + mode + "'");
      c.windowing.window_s = jw.value("window_s", c.windowing.window_s);
      c.windowing.stride_s = jw.value("stride_s", c.windowing.stride_s);
    }
    if (j.contains("diagonal_normalization")) {
      const auto& jd = j["diagonal_normalization"];
      const std::string mode = jd.value("mode", std::string("minmax_per_image"));
      if (mode == "minmax_per_image") c.diag_norm.mode = DiagNormConfig::Mode::minmax_per_image;
      else if (mode == "global") c.diag_norm.mode = DiagNormConfig::Mode::global;
      else fail(errc::invalid_config, "unknown diagonal normalization mode '" + mode + "'");
      c.diag_norm.lo = jd.value("lo", c.diag_norm.lo);
      c.diag_norm.hi = jd.value("hi", c.diag_norm.hi);
    }
    c.msc_shared_across_bands = j.value("msc_shared_across_bands", c.msc_shared_across_bands);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_config, "bad config: " + std::string(e.what()));
  }
  validate_config(c);
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(errc::invalid_config, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_config, "config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

inline void save_config(const PipelineConfig& c, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(errc::io_failure, "cannot write config " + path.string());
  f << to_json(c).dump(2) << "\n";
}

}  // namespace cohgram
