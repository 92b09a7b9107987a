#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "cohgram/error.hpp"

namespace cohgram {

// Class labels with the fixed integer encoding used in every file format.
enum class ClassLabel : int { negative = 0, neutral = 1, positive = 2 };

inline int label_code(ClassLabel l) { return static_cast<int>(l); }

inline ClassLabel label_from_code(int code) {
  if (code < 0 || code > 2) fail(errc::malformed_header, "label code out of range: " + std::to_string(code));
  return static_cast<ClassLabel>(code);
}

inline const char* label_name(ClassLabel l) {
  switch (l) {
    case ClassLabel::negative: return "negative";
    case ClassLabel::neutral: return "neutral";
    case ClassLabel::positive: return "positive";
  }
  return "?";
}

inline ClassLabel label_from_name(const std::string& s) {
  if (s == "negative") return ClassLabel::negative;
  if (s == "neutral") return ClassLabel::neutral;
  if (s == "positive") return ClassLabel::positive;
  fail(errc::malformed_header, "unknown class label: " + s);
}

struct TrialMeta {
  std::string subject_id;
  int session_index = 1;
  int trial_index = 1;
  ClassLabel label = ClassLabel::neutral;
};

// Channels-by-samples signal matrix plus what a trial needs to be usable
// downstream. Internal computation is double; files persist float32.
struct MultichannelRecording {
  std::vector<std::vector<double>> data;  // [channel][sample]
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_labels;
  TrialMeta meta;

  std::size_t channels() const { return data.size(); }
  std::size_t samples() const { return data.empty() ? 0 : data[0].size(); }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples()) / sample_rate_hz : 0.0;
  }
};

// Named frequency interval selecting one color plane.
struct BandDefinition {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

inline bool operator==(const BandDefinition& a, const BandDefinition& b) {
  return a.name == b.name && a.low_hz == b.low_hz && a.high_hz == b.high_hz;
}

inline void validate_band(const BandDefinition& b, double fs) {
  if (!(b.low_hz > 0.0) || !(b.high_hz > b.low_hz))
    fail(errc::invalid_config, "band '" + b.name + "' needs 0 < low < high");
  if (!(b.high_hz < fs / 2.0))
    fail(errc::band_exceeds_nyquist, "band '" + b.name + "' upper edge " + std::to_string(b.high_hz) +
                                         " Hz reaches Nyquist at fs=" + std::to_string(fs));
}

inline void validate(const MultichannelRecording& rec) {
  if (rec.channels() < 2) fail(errc::malformed_header, "need at least 2 channels");
  if (!(rec.sample_rate_hz > 0.0)) fail(errc::malformed_header, "sample_rate_hz must be positive");
  const std::size_t n = rec.samples();
  for (std::size_t c = 0; c < rec.channels(); ++c) {
    if (rec.data[c].size() != n)
      fail(errc::malformed_header, "channel " + std::to_string(c) + " length differs");
  }
  if (static_cast<double>(n) < 2.0 * rec.sample_rate_hz)
    fail(errc::malformed_header, "recording shorter than 2 seconds (" + std::to_string(n) + " samples at " +
                                     std::to_string(rec.sample_rate_hz) + " Hz)");
  for (std::size_t c = 0; c < rec.channels(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(rec.data[c][i]))
        fail_at(errc::non_finite_sample,
                "non-finite sample at channel " + std::to_string(c) + ", index " + std::to_string(i),
                static_cast<long>(c), static_cast<long>(i));
    }
  }
  if (rec.channel_labels.size() != rec.channels())
    fail(errc::malformed_header, "channel_labels size mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& l : rec.channel_labels) {
    if (!seen.insert(l).second) fail(errc::duplicate_channel_label, "duplicate channel label '" + l + "'");
  }
}

// Default labels when a sidecar does not provide any.
inline std::vector<std::string> default_channel_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = "ch" + std::to_string(i);
  return labels;
}

}  // namespace cohgram
