#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohgram/error.hpp"
#include "cohgram/types.hpp"

// Dataset manifests. One JSON file per output directory; `kind` is
// "recordings" (synth output, entries point at CSVs) or "features"
// (extract output, entries point at feature images).

namespace cohgram {

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory
  TrialMeta meta;
  int window_index = -1;  // -1 = whole-trial image
  std::string status = "ok";
  std::string error_message;

  bool ok() const { return status == "ok"; }
};

struct Manifest {
  std::string kind;
  std::vector<ManifestEntry> entries;
  nlohmann::json extra;  // generator spec, config dump, ground truth, ...

  std::size_t ok_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.ok() ? 1 : 0;
    return n;
  }
};

inline nlohmann::json to_json(const Manifest& m) {
  nlohmann::json j;
  j["kind"] = m.kind;
  j["extra"] = m.extra.is_null() ? nlohmann::json::object() : m.extra;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json je;
    je["file"] = e.file;
    je["subject_id"] = e.meta.subject_id;
    je["session_index"] = e.meta.session_index;
    je["trial_index"] = e.meta.trial_index;
    je["label"] = label_code(e.meta.label);
    if (e.window_index >= 0) je["window_index"] = e.window_index;
    je["status"] = e.status;
    if (!e.error_message.empty()) je["error"] = e.error_message;
    j["entries"].push_back(je);
  }
  return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    m.kind = j.at("kind").get<std::string>();
    if (j.contains("extra")) m.extra = j["extra"];
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.file = je.at("file").get<std::string>();
      e.meta.subject_id = je.at("subject_id").get<std::string>();
      e.meta.session_index = je.at("session_index").get<int>();
      e.meta.trial_index = je.at("trial_index").get<int>();
      e.meta.label = label_from_code(je.at("label").get<int>());
      if (je.contains("window_index")) e.window_index = je["window_index"].get<int>();
      if (je.contains("status")) e.status = je["status"].get<std::string>();
      if (je.contains("error")) e.error_message = je["error"].get<std::string>();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_header, "bad manifest: " + std::string(e.what()));
  }
  return m;
}

inline void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(errc::io_failure, "cannot write manifest " + path.string());
  f << to_json(m).dump(2) << "\n";
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(errc::io_failure, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_header, "manifest is not valid JSON: " + std::string(e.what()));
  }
  return manifest_from_json(j);
}

}  // namespace cohgram
