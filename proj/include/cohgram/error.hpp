#pragma once

#include <stdexcept>
#include <string>

namespace cohgram {

// Every failure mode the library reports, one code per contract violation.
enum class errc {
  // ingestion / file formats
  missing_sidecar,
  malformed_header,
  non_finite_sample,
  duplicate_channel_label,
  bad_magic,
  truncated_payload,
  header_not_json,
  dim_mismatch,
  io_failure,
  // dsp
  band_exceeds_nyquist,
  signal_too_short,
  non_finite_input,
  too_few_segments,
  length_mismatch,
  // features
  band_mismatch,
  empty_band,
  zero_variance,
  signal_shorter_than_window,
  // synth / evaluation
  invalid_spec,
  too_few_subjects,
  empty_manifest,
  missing_class,
  non_finite_loss,
  chance_is_certainty,
  // configuration
  invalid_config,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_sidecar: return "MissingSidecar";
    case errc::malformed_header: return "MalformedHeader";
    case errc::non_finite_sample: return "NonFiniteSample";
    case errc::duplicate_channel_label: return "DuplicateChannelLabel";
    case errc::bad_magic: return "BadMagic";
    case errc::truncated_payload: return "TruncatedPayload";
    case errc::header_not_json: return "HeaderNotJson";
    case errc::dim_mismatch: return "DimMismatch";
    case errc::io_failure: return "IoFailure";
    case errc::band_exceeds_nyquist: return "BandExceedsNyquist";
    case errc::signal_too_short: return "SignalTooShort";
    case errc::non_finite_input: return "NonFiniteInput";
    case errc::too_few_segments: return "TooFewSegments";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::band_mismatch: return "BandMismatch";
    case errc::empty_band: return "EmptyBand";
    case errc::zero_variance: return "ZeroVariance";
    case errc::signal_shorter_than_window: return "SignalShorterThanWindow";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::too_few_subjects: return "TooFewSubjects";
    case errc::empty_manifest: return "EmptyManifest";
    case errc::missing_class: return "MissingClass";
    case errc::non_finite_loss: return "NonFiniteLoss";
    case errc::chance_is_certainty: return "ChanceIsCertainty";
    case errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  errc code() const { return code_; }

  // Location context, filled in where it exists (e.g. NonFiniteSample).
  long channel = -1;
  long index = -1;

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) {
  throw error(code, msg);
}

[[noreturn]] inline void fail_at(errc code, const std::string& msg, long channel, long index) {
  error e(code, msg);
  e.channel = channel;
  e.index = index;
  throw e;
}

// CLI exit-code class for an error: 1 = input, 2 = config, 3 = numerical.
inline int exit_class(errc c) {
  switch (c) {
    case errc::invalid_config:
    case errc::invalid_spec:
    case errc::band_exceeds_nyquist:
    case errc::chance_is_certainty:
      return 2;
    case errc::non_finite_loss:
    case errc::zero_variance:
      return 3;
    default:
      return 1;
  }
}

}  // namespace cohgram
