#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cohgram/cohgram.hpp"

// Subcommand CLI over the library: extract | synth | split | eval |
// inspect. Machine outputs go to files, logs to stderr; exit codes are
// 0 = ok, 1 = input error, 2 = config error, 3 = numerical failure.

namespace {

using nlohmann::json;

void log_line(const std::string& msg) { std::cerr << "[cohgram] " << msg << "\n"; }

cohgram::PipelineConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return cohgram::PipelineConfig{};
  return cohgram::load_config(path);
}

cohgram::SplitScheme parse_scheme(const std::string& scheme, std::size_t k) {
  if (scheme == "loso") return cohgram::SplitScheme::loso();
  if (scheme == "kfold") return cohgram::SplitScheme::kfold(k);
  cohgram::fail(cohgram::errc::invalid_config, "unknown scheme '" + scheme + "' (kfold or loso)");
}

std::vector<cohgram::Coupling> parse_couplings(const json& arr) {
  std::vector<cohgram::Coupling> out;
  for (const auto& jc : arr)
    out.push_back({jc.at("i").get<std::size_t>(), jc.at("k").get<std::size_t>(),
                   jc.at("strength").get<double>()});
  return out;
}

cohgram::SynthDatasetSpec load_synth_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) cohgram::fail(cohgram::errc::io_failure, "cannot open spec " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    cohgram::fail(cohgram::errc::invalid_spec, "spec is not valid JSON: " + std::string(e.what()));
  }
  cohgram::SynthDatasetSpec spec;
  try {
    spec.n_channels = j.value("n_channels", spec.n_channels);
    spec.n_subjects = j.value("n_subjects", spec.n_subjects);
    spec.n_trials_per_class = j.value("n_trials_per_class", spec.n_trials_per_class);
    spec.duration_s = j.value("duration_s", spec.duration_s);
    spec.fs = j.value("fs", spec.fs);
    spec.base_freq_hz = j.value("base_freq_hz", spec.base_freq_hz);
    spec.phase_noise_std = j.value("phase_noise_std", spec.phase_noise_std);
    spec.sensor_snr_db = j.value("sensor_snr_db", spec.sensor_snr_db);
    spec.amplitude = j.value("amplitude", spec.amplitude);
    spec.seed = j.value("seed", spec.seed);
    const auto& templates = j.at("class_connectivity_templates");
    if (!templates.is_array() || templates.size() != 3)
      cohgram::fail(cohgram::errc::invalid_spec,
                    "class_connectivity_templates must list exactly 3 coupling maps");
    for (std::size_t c = 0; c < 3; ++c)
      spec.class_connectivity_templates[c] = parse_couplings(templates[c]);
  } catch (const json::exception& e) {
    cohgram::fail(cohgram::errc::invalid_spec, "bad spec fields: " + std::string(e.what()));
  }
  return spec;
}

json synth_spec_to_json(const cohgram::SynthDatasetSpec& spec) {
  json templates = json::array();
  for (const auto& tpl : spec.class_connectivity_templates) {
    json jt = json::array();
    for (const auto& c : tpl) jt.push_back({{"i", c.i}, {"k", c.k}, {"strength", c.strength}});
    templates.push_back(jt);
  }
  return json{{"n_channels", spec.n_channels},
              {"n_subjects", spec.n_subjects},
              {"n_trials_per_class", spec.n_trials_per_class},
              {"duration_s", spec.duration_s},
              {"fs", spec.fs},
              {"base_freq_hz", spec.base_freq_hz},
              {"phase_noise_std", spec.phase_noise_std},
              {"sensor_snr_db", spec.sensor_snr_db},
              {"amplitude", spec.amplitude},
              {"seed", spec.seed},
              {"class_connectivity_templates", templates}};
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) cohgram::fail(cohgram::errc::io_failure, "cannot write " + path);
  f << j.dump(2) << "\n";
}

int cmd_extract(const std::string& input, const std::string& output, const std::string& config,
                int jobs, bool png) {
  const auto cfg = load_config_or_default(config);
  cohgram::ExtractOptions opts;
  opts.jobs = jobs;
  opts.write_png = png;
  const auto manifest = cohgram::extract_directory(input, output, cfg, opts);
  const std::size_t ok = manifest.ok_count();
  const std::size_t failed = manifest.entries.size() - ok;
  log_line("extracted " + std::to_string(ok) + " feature file(s), " + std::to_string(failed) +
           " failure(s), manifest at " + (std::filesystem::path(output) / "manifest.json").string());
  if (failed > 0) {
    for (const auto& e : manifest.entries)
      if (!e.ok()) log_line("failed: " + e.file + ": " + e.error_message);
    return 1;
  }
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& output, const std::string& format) {
  const auto spec = load_synth_spec(spec_path);
  cohgram::RecordingFormat rec_format;
  if (format == "csv") rec_format = cohgram::RecordingFormat::csv;
  else if (format == "tensor") rec_format = cohgram::RecordingFormat::tensor;
  else cohgram::fail(cohgram::errc::invalid_config, "format must be csv or tensor");

  auto dataset = cohgram::gen_labeled_dataset(spec);
  dataset.manifest.extra["spec"] = synth_spec_to_json(spec);
  cohgram::write_dataset(dataset, output, rec_format);
  log_line("wrote " + std::to_string(dataset.recordings.size()) + " recording(s) to " + output);
  return 0;
}

int cmd_split(const std::string& manifest_path, const std::string& scheme, std::size_t k,
              std::uint64_t seed, const std::string& output) {
  const auto manifest = cohgram::load_manifest(manifest_path);
  const auto plan = cohgram::make_splits(manifest, parse_scheme(scheme, k), seed);
  write_json_file(cohgram::split_plan_to_json(plan), output);
  log_line("wrote " + std::to_string(plan.folds.size()) + " fold(s) to " + output);
  return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& scheme, std::size_t k,
             std::uint64_t seed, const std::string& output, double learning_rate, double l2,
             std::size_t epochs) {
  const auto manifest = cohgram::load_manifest(manifest_path);
  const auto examples = cohgram::load_examples(manifest_path);
  // split over the feature entries actually loaded, in manifest order
  cohgram::Manifest usable;
  usable.kind = manifest.kind;
  for (const auto& e : manifest.entries)
    if (e.ok() && e.file.ends_with(".cohg.bin")) usable.entries.push_back(e);
  const auto plan = cohgram::make_splits(usable, parse_scheme(scheme, k), seed);

  cohgram::TrainHyper hyper;
  hyper.learning_rate = learning_rate;
  hyper.l2 = l2;
  hyper.epochs = epochs;
  const auto report = cohgram::evaluate(plan, examples, hyper);
  write_json_file(cohgram::report_to_json(report), output);

  char line[160];
  std::snprintf(line, sizeof(line), "%s accuracy %.1f%% +/- %.1f%%, kappa %.3f (%zu folds, %zu examples)",
                report.scheme.c_str(), report.mean_accuracy, report.std_accuracy, report.kappa,
                report.per_fold_accuracy.size(), report.n_examples);
  std::cout << line << "\n";
  log_line("report written to " + output);
  return 0;
}

int cmd_inspect(const std::string& path, bool defaults) {
  if (defaults) {
    std::cout << cohgram::to_json(cohgram::PipelineConfig{}).dump(2) << "\n";
    return 0;
  }
  if (path.empty())
    cohgram::fail(cohgram::errc::invalid_config, "inspect needs a file or --defaults");
  const auto bytes = cohgram::read_file_bytes(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), cohgram::kTensorMagic, 8) == 0) {
    const auto t = cohgram::read_tensor(bytes);
    json j{{"format", "tensor"}, {"dims", t.dims}, {"axes", t.axes}, {"meta", t.meta}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  try {
    const auto j = json::parse(bytes.begin(), bytes.end());
    std::cout << j.dump(2) << "\n";
    return 0;
  } catch (const json::exception&) {
    cohgram::fail(cohgram::errc::bad_magic, path + " is neither a COHGRAM1 tensor nor JSON");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG connectivity feature-image pipeline"};
  app.require_subcommand(1);

  std::string input, output, config, spec_path, manifest_path, path;
  std::string scheme = "kfold";
  std::string format = "csv";
  int jobs = 0;
  bool png = false;
  bool defaults = false;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  double learning_rate = 0.5, l2 = 1e-4;
  std::size_t epochs = 300;

  auto* extract = app.add_subcommand("extract", "Recordings directory -> feature images + manifest");
  extract->add_option("--input", input, "directory of .csv/.rec.bin recordings")->required();
  extract->add_option("--output", output, "output directory")->required();
  extract->add_option("--config", config, "pipeline config JSON");
  extract->add_option("--jobs", jobs, "worker threads (0 = all cores)");
  extract->add_flag("--png", png, "also write 8-bit PNG images");

  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  synth->add_option("--spec", spec_path, "dataset spec JSON")->required();
  synth->add_option("--output", output, "output directory")->required();
  synth->add_option("--format", format, "recording format: csv | tensor");

  auto* split = app.add_subcommand("split", "Write a split plan for a manifest");
  split->add_option("--manifest", manifest_path, "manifest JSON")->required();
  split->add_option("--scheme", scheme, "kfold | loso");
  split->add_option("--k", k, "fold count for kfold");
  split->add_option("--seed", seed, "shuffle seed");
  split->add_option("--output", output, "split plan output path")->required();

  auto* eval = app.add_subcommand("eval", "Cross-validated baseline evaluation of feature images");
  eval->add_option("--manifest", manifest_path, "feature manifest JSON")->required();
  eval->add_option("--scheme", scheme, "kfold | loso");
  eval->add_option("--k", k, "fold count for kfold");
  eval->add_option("--seed", seed, "shuffle seed");
  eval->add_option("--output", output, "report JSON path")->required();
  eval->add_option("--learning-rate", learning_rate, "gradient step size");
  eval->add_option("--l2", l2, "L2 penalty on weights");
  eval->add_option("--epochs", epochs, "full-batch epochs");

  auto* inspect = app.add_subcommand("inspect", "Describe a tensor/manifest file or dump defaults");
  inspect->add_option("file", path, "tensor or JSON file");
  inspect->add_flag("--defaults", defaults, "print the default pipeline config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(extract)) return cmd_extract(input, output, config, jobs, png);
    if (app.got_subcommand(synth)) return cmd_synth(spec_path, output, format);
    if (app.got_subcommand(split)) return cmd_split(manifest_path, scheme, k, seed, output);
    if (app.got_subcommand(eval))
      return cmd_eval(manifest_path, scheme, k, seed, output, learning_rate, l2, epochs);
    if (app.got_subcommand(inspect)) return cmd_inspect(path, defaults);
  } catch (const cohgram::error& e) {
    log_line(std::string("error: ") + e.what());
    return cohgram::exit_class(e.code());
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return 1;
  }
  return 0;
}
