#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "cohgram/eval.hpp"
#include "cohgram/rng.hpp"

using namespace cohgram;

namespace {

Manifest fake_manifest(std::size_t n_subjects, std::size_t trials_per_subject_per_class) {
  Manifest m;
  m.kind = "features";
  for (std::size_t s = 0; s < n_subjects; ++s) {
    for (std::size_t t = 0; t < trials_per_subject_per_class; ++t) {
      for (int cls = 0; cls < 3; ++cls) {
        ManifestEntry e;
        e.meta.subject_id = "s" + std::to_string(s + 1);
        e.meta.session_index = static_cast<int>(t + 1);
        e.meta.trial_index = cls + 1;
        e.meta.label = label_from_code(cls);
        e.file = e.meta.subject_id + "_" + std::to_string(t + 1) + "_" + std::to_string(cls + 1) +
                 ".cohg.bin";
        m.entries.push_back(e);
      }
    }
  }
  return m;
}

// Gaussian blobs, one mean vector per class; separation controls difficulty.
std::vector<LabeledExample> blob_examples(std::size_t per_class, double separation,
                                          std::uint64_t seed, std::size_t n_subjects = 5) {
  std::vector<LabeledExample> out;
  rng::stream rng(seed);
  const std::size_t dim = 6;
  std::size_t counter = 0;
  for (int cls = 0; cls < 3; ++cls) {
    for (std::size_t i = 0; i < per_class; ++i) {
      LabeledExample ex;
      ex.label = cls;
      ex.subject_id = "s" + std::to_string(counter++ % n_subjects + 1);
      ex.features.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        const double mean = (d % 3 == static_cast<std::size_t>(cls)) ? separation : 0.0;
        ex.features[d] = mean + rng.gaussian();
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("kappa matches the published values") {
  REQUIRE(cohens_kappa(71.6, 33.33) == Catch::Approx(0.574).margin(0.001));
  REQUIRE(cohens_kappa(93.1, 33.33) == Catch::Approx(0.897).margin(0.001));
}

TEST_CASE("kappa fixed points and bounds") {
  REQUIRE(cohens_kappa(33.33, 33.33) == 0.0);
  REQUIRE(cohens_kappa(100.0, 33.33) == 1.0);
  REQUIRE(cohens_kappa(0.0, 50.0) == -1.0);
  REQUIRE_THROWS_AS(cohens_kappa(101.0, 33.33), error);
  REQUIRE_THROWS_AS(cohens_kappa(-1.0, 33.33), error);
  try {
    cohens_kappa(90.0, 100.0);
    FAIL("expected chance_is_certainty");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::chance_is_certainty);
  }
}

TEST_CASE("LOSO produces one leakage-free fold per subject") {
  const Manifest m = fake_manifest(15, 2);
  const SplitPlan plan = make_splits(m, SplitScheme::loso(), 1);
  REQUIRE(plan.folds.size() == 15);
  std::set<std::string> held_out;
  for (const auto& fold : plan.folds) {
    held_out.insert(fold.held_out_subject);
    std::set<std::string> test_subjects, train_subjects;
    for (std::size_t id : fold.test_ids) test_subjects.insert(m.entries[id].meta.subject_id);
    for (std::size_t id : fold.train_ids) train_subjects.insert(m.entries[id].meta.subject_id);
    REQUIRE(test_subjects == std::set<std::string>{fold.held_out_subject});
    REQUIRE(train_subjects.count(fold.held_out_subject) == 0);
    REQUIRE(fold.train_ids.size() + fold.test_ids.size() == m.entries.size());
  }
  REQUIRE(held_out.size() == 15);
}

TEST_CASE("kfold sizes differ by at most one and partition the set") {
  SECTION("100 items into 10 folds of 10") {
    Manifest m = fake_manifest(10, 3);  // 90 entries
    for (std::size_t i = 0; i < 10; ++i) {
      ManifestEntry e;
      e.meta.subject_id = "extra";
      e.meta.session_index = static_cast<int>(i + 1);
      e.meta.trial_index = 1;
      e.meta.label = label_from_code(static_cast<int>(i % 3));
      m.entries.push_back(e);
    }
    REQUIRE(m.entries.size() == 100);
    const SplitPlan plan = make_splits(m, SplitScheme::kfold(10), 3);
    std::set<std::size_t> seen;
    for (const auto& fold : plan.folds) {
      REQUIRE(fold.test_ids.size() == 10);
      for (std::size_t id : fold.test_ids) REQUIRE(seen.insert(id).second);
    }
    REQUIRE(seen.size() == 100);
  }
  SECTION("101 items: nine folds of 10, one of 11") {
    Manifest m = fake_manifest(10, 3);
    for (std::size_t i = 0; i < 11; ++i) {
      ManifestEntry e;
      e.meta.subject_id = "extra";
      e.meta.label = label_from_code(static_cast<int>(i % 3));
      m.entries.push_back(e);
    }
    const SplitPlan plan = make_splits(m, SplitScheme::kfold(10), 3);
    std::vector<std::size_t> sizes;
    for (const auto& fold : plan.folds) sizes.push_back(fold.test_ids.size());
    std::sort(sizes.begin(), sizes.end());
    REQUIRE(sizes.front() == 10);
    REQUIRE(sizes.back() == 11);
    REQUIRE(std::count(sizes.begin(), sizes.end(), 10) == 9);
  }
}

TEST_CASE("stratified kfold balances classes across folds") {
  const Manifest m = fake_manifest(10, 3);  // 30 per class
  const SplitPlan plan = make_splits(m, SplitScheme::kfold(10), 7);
  for (const auto& fold : plan.folds) {
    std::array<int, 3> counts{};
    for (std::size_t id : fold.test_ids)
      ++counts[static_cast<std::size_t>(label_code(m.entries[id].meta.label))];
    for (int c : counts) REQUIRE(c == 3);
  }
}

TEST_CASE("splits are deterministic in the seed") {
  const Manifest m = fake_manifest(6, 2);
  const auto a = split_plan_to_json(make_splits(m, SplitScheme::kfold(4), 9));
  const auto b = split_plan_to_json(make_splits(m, SplitScheme::kfold(4), 9));
  const auto c = split_plan_to_json(make_splits(m, SplitScheme::kfold(4), 10));
  REQUIRE(a == b);
  REQUIRE(a != c);
}

TEST_CASE("split validation errors") {
  Manifest empty;
  empty.kind = "features";
  try {
    make_splits(empty, SplitScheme::kfold(2), 0);
    FAIL("expected empty_manifest");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::empty_manifest);
  }
  const Manifest single = fake_manifest(1, 3);
  try {
    make_splits(single, SplitScheme::loso(), 0);
    FAIL("expected too_few_subjects");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::too_few_subjects);
  }
  REQUIRE_THROWS_AS(make_splits(fake_manifest(1, 1), SplitScheme::kfold(10), 0), error);
}

TEST_CASE("baseline reaches near-perfect training accuracy on separable blobs") {
  const auto examples = blob_examples(30, 6.0, 21);
  const BaselineModel model = train_baseline(examples);
  std::size_t correct = 0;
  for (const auto& ex : examples)
    if (predict(model, ex.features) == ex.label) ++correct;
  REQUIRE(static_cast<double>(correct) / static_cast<double>(examples.size()) >= 0.99);
}

TEST_CASE("one example per class is fit perfectly") {
  std::vector<LabeledExample> tiny;
  for (int cls = 0; cls < 3; ++cls) {
    LabeledExample ex;
    ex.label = cls;
    ex.features = {cls == 0 ? 1.0 : 0.0, cls == 1 ? 1.0 : 0.0, cls == 2 ? 1.0 : 0.0};
    tiny.push_back(ex);
  }
  const BaselineModel model = train_baseline(tiny);
  for (const auto& ex : tiny) REQUIRE(predict(model, ex.features) == ex.label);
}

TEST_CASE("extreme L2 collapses the weights and the predictions") {
  const auto examples = blob_examples(10, 6.0, 22);
  TrainHyper hyper;
  hyper.l2 = 1e9;
  hyper.learning_rate = 1e-10;  // keep the huge-penalty step stable
  hyper.epochs = 100;
  const BaselineModel model = train_baseline(examples, hyper);
  double norm = 0.0;
  const std::size_t stride = model.dim + 1;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t d = 0; d < model.dim; ++d)
      norm += model.weights[c * stride + d] * model.weights[c * stride + d];
  REQUIRE(std::sqrt(norm) < 1e-3);
  const auto p = predict_proba(model, examples[0].features);
  for (double v : p) REQUIRE(v == Catch::Approx(1.0 / 3.0).margin(1e-3));
}

TEST_CASE("training loss is non-increasing under the default step") {
  const auto examples = blob_examples(20, 2.0, 23);
  const BaselineModel model = train_baseline(examples);
  for (std::size_t i = 1; i < model.loss_history.size(); ++i)
    REQUIRE(model.loss_history[i] <= model.loss_history[i - 1] + 1e-12);
}

TEST_CASE("missing class is rejected") {
  auto examples = blob_examples(5, 2.0, 24);
  examples.erase(std::remove_if(examples.begin(), examples.end(),
                                [](const LabeledExample& e) { return e.label == 1; }),
                 examples.end());
  try {
    train_baseline(examples);
    FAIL("expected missing_class");
  } catch (const error& e) {
    REQUIRE(e.code() == errc::missing_class);
  }
}

TEST_CASE("evaluate on separable blobs is near perfect and self-consistent") {
  const auto examples = blob_examples(20, 6.0, 25);
  Manifest m;
  m.kind = "features";
  for (const auto& ex : examples) {
    ManifestEntry e;
    e.meta.subject_id = ex.subject_id;
    e.meta.label = label_from_code(ex.label);
    m.entries.push_back(e);
  }
  const SplitPlan plan = make_splits(m, SplitScheme::kfold(5), 2);
  const EvaluationReport report = evaluate(plan, examples);
  REQUIRE(report.mean_accuracy >= 90.0);

  double mean = 0.0;
  for (double a : report.per_fold_accuracy) mean += a;
  mean /= static_cast<double>(report.per_fold_accuracy.size());
  double var = 0.0;
  for (double a : report.per_fold_accuracy) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / static_cast<double>(report.per_fold_accuracy.size()));
  REQUIRE(report.mean_accuracy == Catch::Approx(mean).margin(1e-9));
  REQUIRE(report.std_accuracy == Catch::Approx(stddev).margin(1e-9));
  REQUIRE(report.kappa ==
          Catch::Approx(cohens_kappa(mean, kThreeClassChancePercent)).margin(1e-9));

  std::int64_t total = 0;
  for (const auto& row : report.confusion)
    for (std::int64_t v : row) total += v;
  REQUIRE(total == static_cast<std::int64_t>(examples.size()));
}

TEST_CASE("degenerate one-fold plan reproduces training accuracy") {
  const auto examples = blob_examples(10, 6.0, 26);
  SplitPlan plan;
  plan.scheme = SplitScheme::kfold(1);
  Fold fold;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    fold.train_ids.push_back(i);
    fold.test_ids.push_back(i);
  }
  plan.folds.push_back(fold);
  const EvaluationReport report = evaluate(plan, examples);

  const BaselineModel model = train_baseline(examples);
  std::size_t correct = 0;
  for (const auto& ex : examples)
    if (predict(model, ex.features) == ex.label) ++correct;
  const double train_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(examples.size());
  REQUIRE(report.mean_accuracy == Catch::Approx(train_acc).margin(1e-12));
}

TEST_CASE("label shuffling drops accuracy to chance") {
  auto examples = blob_examples(30, 6.0, 27);
  std::vector<int> labels;
  for (const auto& ex : examples) labels.push_back(ex.label);
  rng::stream rng(5);
  rng.shuffle(labels);
  for (std::size_t i = 0; i < examples.size(); ++i) examples[i].label = labels[i];

  Manifest m;
  m.kind = "features";
  for (const auto& ex : examples) {
    ManifestEntry e;
    e.meta.subject_id = ex.subject_id;
    e.meta.label = label_from_code(ex.label);
    m.entries.push_back(e);
  }
  const EvaluationReport report = evaluate(make_splits(m, SplitScheme::kfold(5), 3), examples);
  REQUIRE(report.mean_accuracy > 33.33 - 12.0);
  REQUIRE(report.mean_accuracy < 33.33 + 12.0);
  REQUIRE(std::abs(report.kappa) < 0.2);
}

TEST_CASE("report JSON carries every field") {
  const auto examples = blob_examples(5, 6.0, 28);
  Manifest m;
  m.kind = "features";
  for (const auto& ex : examples) {
    ManifestEntry e;
    e.meta.subject_id = ex.subject_id;
    e.meta.label = label_from_code(ex.label);
    m.entries.push_back(e);
  }
  const EvaluationReport report = evaluate(make_splits(m, SplitScheme::kfold(3), 4), examples);
  const auto j = report_to_json(report);
  REQUIRE(j["scheme"] == "kfold(3)");
  REQUIRE(j["per_fold_accuracy"].size() == 3);
  REQUIRE(j["confusion"].size() == 3);
  REQUIRE(j.contains("mean_accuracy"));
  REQUIRE(j.contains("std_accuracy"));
  REQUIRE(j.contains("kappa"));
  REQUIRE(j["chance_accuracy"].get<double>() == Catch::Approx(100.0 / 3.0));
}
