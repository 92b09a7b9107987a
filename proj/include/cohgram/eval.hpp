#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohgram/error.hpp"
#include "cohgram/manifest.hpp"
#include "cohgram/rng.hpp"
#include "cohgram/types.hpp"

// Split generation (stratified k-fold, leave-one-subject-out), a
// multinomial logistic-regression baseline, and the accuracy/kappa report.

namespace cohgram {

// ---------------------------------------------------------------------------
// Splits

struct SplitScheme {
  enum class Kind { kfold, loso };
  Kind kind = Kind::kfold;
  std::size_t k = 10;

  static SplitScheme kfold(std::size_t k) { return {Kind::kfold, k}; }
  static SplitScheme loso() { return {Kind::loso, 0}; }
};

struct Fold {
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> test_ids;
  std::string held_out_subject;  // loso only
};

struct SplitPlan {
  SplitScheme scheme;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

// Stratified k-fold: per-class shuffle, then one continuous round-robin
// deal across classes, so fold sizes differ by at most one overall and per
// class. LOSO: one fold per subject, subject-id sorted.
inline SplitPlan make_splits(const Manifest& manifest, SplitScheme scheme, std::uint64_t seed) {
  const std::size_t n = manifest.entries.size();
  if (n == 0) fail(errc::empty_manifest, "manifest has no entries");
  SplitPlan plan;
  plan.scheme = scheme;
  plan.seed = seed;

  if (scheme.kind == SplitScheme::Kind::kfold) {
    if (scheme.k < 2) fail(errc::invalid_config, "kfold needs k >= 2");
    if (scheme.k > n)
      fail(errc::invalid_config, "kfold with k = " + std::to_string(scheme.k) + " but only " +
                                     std::to_string(n) + " items");
    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < n; ++i)
      by_class[static_cast<std::size_t>(label_code(manifest.entries[i].meta.label))].push_back(i);
    plan.folds.resize(scheme.k);
    std::size_t deal = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      rng::stream rng(rng::derive_seed(seed, c));
      rng.shuffle(by_class[c]);
      for (std::size_t id : by_class[c]) plan.folds[deal++ % scheme.k].test_ids.push_back(id);
    }
    for (auto& fold : plan.folds) {
      std::sort(fold.test_ids.begin(), fold.test_ids.end());
      std::set<std::size_t> test(fold.test_ids.begin(), fold.test_ids.end());
      for (std::size_t i = 0; i < n; ++i)
        if (!test.count(i)) fold.train_ids.push_back(i);
    }
  } else {
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < n; ++i)
      by_subject[manifest.entries[i].meta.subject_id].push_back(i);
    if (by_subject.size() < 2)
      fail(errc::too_few_subjects,
           "LOSO needs at least 2 subjects, found " + std::to_string(by_subject.size()));
    for (const auto& [subject, ids] : by_subject) {
      Fold fold;
      fold.held_out_subject = subject;
      fold.test_ids = ids;
      for (std::size_t i = 0; i < n; ++i)
        if (manifest.entries[i].meta.subject_id != subject) fold.train_ids.push_back(i);
      plan.folds.push_back(std::move(fold));
    }
  }
  return plan;
}

inline nlohmann::json split_plan_to_json(const SplitPlan& plan) {
  nlohmann::json j;
  j["scheme"] = plan.scheme.kind == SplitScheme::Kind::kfold ? "kfold" : "loso";
  if (plan.scheme.kind == SplitScheme::Kind::kfold) j["k"] = plan.scheme.k;
  j["seed"] = plan.seed;
  j["folds"] = nlohmann::json::array();
  for (const auto& fold : plan.folds) {
    nlohmann::json jf{{"train", fold.train_ids}, {"test", fold.test_ids}};
    if (!fold.held_out_subject.empty()) jf["held_out_subject"] = fold.held_out_subject;
    j["folds"].push_back(std::move(jf));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Baseline classifier

struct LabeledExample {
  std::vector<double> features;
  int label = 0;  // class code
  std::string subject_id;
};

struct TrainHyper {
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::size_t epochs = 300;
};

struct BaselineModel {
  std::size_t dim = 0;
  // weights[c * (dim + 1) + d]; the last column is the bias.
  std::vector<double> weights;
  std::vector<double> feature_mean;  // training-fold standardization
  std::vector<double> feature_std;
  std::vector<double> loss_history;
  TrainHyper hyper;
};

namespace detail {

inline void softmax3(const double* z, double* p) {
  const double m = std::max(z[0], std::max(z[1], z[2]));
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    p[c] = std::exp(z[c] - m);
    sum += p[c];
  }
  for (int c = 0; c < 3; ++c) p[c] /= sum;
}

inline std::vector<double> standardize(const BaselineModel& model, const std::vector<double>& x) {
  std::vector<double> out(model.dim);
  for (std::size_t d = 0; d < model.dim; ++d)
    out[d] = (x[d] - model.feature_mean[d]) / model.feature_std[d];
  return out;
}

inline void model_logits(const BaselineModel& model, const std::vector<double>& std_features,
                         double* z) {
  const std::size_t stride = model.dim + 1;
  for (int c = 0; c < 3; ++c) {
    double acc = model.weights[static_cast<std::size_t>(c) * stride + model.dim];
    const double* w = model.weights.data() + static_cast<std::size_t>(c) * stride;
    for (std::size_t d = 0; d < model.dim; ++d) acc += w[d] * std_features[d];
    z[c] = acc;
  }
}

}  // namespace detail

// Full-batch gradient descent on the multinomial cross-entropy with L2 on
// the weights (biases excluded). Deterministic: zero init, fixed order.
inline BaselineModel train_baseline(const std::vector<LabeledExample>& train,
                                    const TrainHyper& hyper = {}) {
  if (train.empty()) fail(errc::empty_manifest, "empty training set");
  std::array<std::size_t, 3> counts{};
  for (const auto& ex : train) {
    if (ex.label < 0 || ex.label > 2) fail(errc::invalid_config, "label code out of range");
    ++counts[static_cast<std::size_t>(ex.label)];
  }
  for (int c = 0; c < 3; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      fail(errc::missing_class,
           "training set lacks class " + std::string(label_name(label_from_code(c))));

  const std::size_t dim = train[0].features.size();
  for (const auto& ex : train)
    if (ex.features.size() != dim) fail(errc::length_mismatch, "feature dimensions differ");

  BaselineModel model;
  model.dim = dim;
  model.hyper = hyper;
  model.feature_mean.assign(dim, 0.0);
  model.feature_std.assign(dim, 1.0);
  const double n = static_cast<double>(train.size());
  for (const auto& ex : train)
    for (std::size_t d = 0; d < dim; ++d) model.feature_mean[d] += ex.features[d];
  for (std::size_t d = 0; d < dim; ++d) model.feature_mean[d] /= n;
  std::vector<double> ss(dim, 0.0);
  for (const auto& ex : train)
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = ex.features[d] - model.feature_mean[d];
      ss[d] += diff * diff;
    }
  for (std::size_t d = 0; d < dim; ++d) {
    const double sd = std::sqrt(ss[d] / n);
    model.feature_std[d] = sd > 0.0 ? sd : 1.0;  // constant feature carries no signal
  }

  std::vector<std::vector<double>> x(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) x[i] = detail::standardize(model, train[i].features);

  const std::size_t stride = dim + 1;
  model.weights.assign(3 * stride, 0.0);
  std::vector<double> grad(3 * stride);
  model.loss_history.reserve(hyper.epochs);

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    double z[3], p[3];
    for (std::size_t i = 0; i < train.size(); ++i) {
      detail::model_logits(model, x[i], z);
      detail::softmax3(z, p);
      const auto y = static_cast<std::size_t>(train[i].label);
      loss -= std::log(std::max(p[y], 1e-300));
      for (std::size_t c = 0; c < 3; ++c) {
        const double err = p[c] - (c == y ? 1.0 : 0.0);
        double* g = grad.data() + c * stride;
        for (std::size_t d = 0; d < dim; ++d) g[d] += err * x[i][d];
        g[dim] += err;
      }
    }
    loss /= n;
    double w_norm2 = 0.0;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t d = 0; d < dim; ++d) {
        const double w = model.weights[c * stride + d];
        w_norm2 += w * w;
      }
    loss += 0.5 * hyper.l2 * w_norm2;
    if (!std::isfinite(loss)) fail(errc::non_finite_loss, "training loss diverged");
    model.loss_history.push_back(loss);

    const double step = hyper.learning_rate;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t d = 0; d < stride; ++d) {
        double g = grad[c * stride + d] / n;
        if (d < dim) g += hyper.l2 * model.weights[c * stride + d];
        model.weights[c * stride + d] -= step * g;
      }
  }
  for (double w : model.weights)
    if (!std::isfinite(w)) fail(errc::non_finite_loss, "weights diverged");
  return model;
}

inline std::array<double, 3> predict_proba(const BaselineModel& model,
                                           const std::vector<double>& features) {
  if (features.size() != model.dim) fail(errc::length_mismatch, "feature dimension mismatch");
  const auto x = detail::standardize(model, features);
  double z[3];
  detail::model_logits(model, x, z);
  std::array<double, 3> p{};
  detail::softmax3(z, p.data());
  return p;
}

inline int predict(const BaselineModel& model, const std::vector<double>& features) {
  const auto p = predict_proba(model, features);
  int best = 0;
  for (int c = 1; c < 3; ++c)
    if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
  return best;
}

// ---------------------------------------------------------------------------
// Kappa and the report

// kappa = (p_cl - p_ch) / (100 - p_ch), both arguments in percent.
inline double cohens_kappa(double p_cl, double p_ch) {
  if (!(p_cl >= 0.0) || !(p_cl <= 100.0)) fail(errc::invalid_config, "p_cl must be in [0, 100]");
  if (!(p_ch >= 0.0) || !(p_ch <= 100.0)) fail(errc::invalid_config, "p_ch must be in [0, 100]");
  if (p_ch == 100.0)
    fail(errc::chance_is_certainty, "kappa undefined when chance accuracy is 100%");
  return (p_cl - p_ch) / (100.0 - p_ch);
}

inline constexpr double kThreeClassChancePercent = 100.0 / 3.0;

struct EvaluationReport {
  std::string scheme;
  std::vector<double> per_fold_accuracy;  // percent
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over folds
  double kappa = 0.0;
  std::array<std::array<std::int64_t, 3>, 3> confusion{};  // [true][predicted], pooled
  std::size_t n_examples = 0;
};

inline EvaluationReport evaluate(const SplitPlan& plan, const std::vector<LabeledExample>& examples,
                                 const TrainHyper& hyper = {}) {
  if (examples.empty()) fail(errc::empty_manifest, "no examples to evaluate");
  EvaluationReport report;
  report.scheme = plan.scheme.kind == SplitScheme::Kind::kfold
                      ? "kfold(" + std::to_string(plan.scheme.k) + ")"
                      : "loso";
  report.n_examples = examples.size();

  for (const auto& fold : plan.folds) {
    std::vector<LabeledExample> train;
    train.reserve(fold.train_ids.size());
    for (std::size_t id : fold.train_ids) {
      if (id >= examples.size()) fail(errc::invalid_config, "split id out of range");
      train.push_back(examples[id]);
    }
    const BaselineModel model = train_baseline(train, hyper);
    std::size_t correct = 0;
    for (std::size_t id : fold.test_ids) {
      if (id >= examples.size()) fail(errc::invalid_config, "split id out of range");
      const int predicted = predict(model, examples[id].features);
      const int truth = examples[id].label;
      ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
      if (predicted == truth) ++correct;
    }
    if (fold.test_ids.empty()) fail(errc::invalid_config, "fold has empty test set");
    report.per_fold_accuracy.push_back(100.0 * static_cast<double>(correct) /
                                       static_cast<double>(fold.test_ids.size()));
  }

  const double nf = static_cast<double>(report.per_fold_accuracy.size());
  double mean = 0.0;
  for (double a : report.per_fold_accuracy) mean += a;
  mean /= nf;
  double var = 0.0;
  for (double a : report.per_fold_accuracy) var += (a - mean) * (a - mean);
  report.mean_accuracy = mean;
  report.std_accuracy = std::sqrt(var / nf);
  report.kappa = cohens_kappa(mean, kThreeClassChancePercent);
  return report;
}

inline nlohmann::json report_to_json(const EvaluationReport& r) {
  nlohmann::json j;
  j["scheme"] = r.scheme;
  j["per_fold_accuracy"] = r.per_fold_accuracy;
  j["mean_accuracy"] = r.mean_accuracy;
  j["std_accuracy"] = r.std_accuracy;
  j["kappa"] = r.kappa;
  j["chance_accuracy"] = kThreeClassChancePercent;
  j["n_examples"] = r.n_examples;
  j["confusion"] = nlohmann::json::array();
  for (const auto& row : r.confusion) j["confusion"].push_back(row);
  j["confusion_labels"] = {label_name(label_from_code(0)), label_name(label_from_code(1)),
                           label_name(label_from_code(2))};
  return j;
}

}  // namespace cohgram
