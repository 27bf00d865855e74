#include "synthaug/utility/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

#include "alloc.hpp"
#include "synthaug/error.hpp"
#include "synthaug/parallel.hpp"

namespace synthaug::utility {

namespace {

using TrainBuilder = std::function<data::LabeledDataset(std::size_t rep, Rng& rng)>;

UtilityReport run_cells(const FoldData& fold, const std::string& setting, std::size_t repetitions,
                        std::uint64_t seed, const SuiteConfig& suite, const TrainBuilder& build) {
  tune_allocator();
  if (repetitions == 0) throw Error(ErrorCode::invalid_argument, "repetitions must be > 0");
  if (suite.kinds.empty()) throw Error(ErrorCode::invalid_argument, "classifier suite is empty");
  UtilityReport report;
  report.setting = setting;
  report.classifiers = suite.kinds;

  std::vector<data::LabeledDataset> train_sets;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    Rng rng = make_rng(derive_seed(seed, {fold.index, rep, stage_id(setting)}));
    train_sets.push_back(build(rep, rng));
  }
  const std::size_t kinds = suite.kinds.size();
  std::vector<EvalResult> results(repetitions * kinds);
  parallel_for(results.size(), suite.threads, [&](std::size_t job) {
    const std::size_t rep = job / kinds;
    const std::size_t k = job % kinds;
    auto clf = make_classifier(suite.kinds[k], suite.params);
    clf->fit(train_sets[rep],
             derive_seed(seed, {fold.index, rep, stage_id("classifier"),
                                static_cast<std::uint64_t>(suite.kinds[k])}));
    results[job] = evaluate(*clf, fold.test);
  });
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    CellResult cell;
    cell.fold = fold.index;
    cell.repetition = rep;
    cell.train_counts = train_sets[rep].class_counts();
    cell.results.assign(results.begin() + static_cast<std::ptrdiff_t>(rep * kinds),
                        results.begin() + static_cast<std::ptrdiff_t>((rep + 1) * kinds));
    report.cells.push_back(std::move(cell));
  }
  return report;
}

double label_one_share(const data::LabeledDataset& ds) {
  return static_cast<double>(ds.class_count(1)) / static_cast<double>(ds.size());
}

std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t k,
                                                    Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

EvalResult evaluate(const Classifier& clf, const data::LabeledDataset& test) {
  const std::vector<double> scores = clf.score(test.features);
  std::vector<std::uint8_t> predictions(scores.size());
  const double t = clf.threshold();
  for (std::size_t i = 0; i < scores.size(); ++i) predictions[i] = scores[i] > t ? 1 : 0;
  const Confusion c = confusion_metrics(predictions, test.labels);
  EvalResult r;
  r.classifier = clf.kind();
  r.auc_roc = auc_roc(scores, test.labels);
  r.accuracy = c.accuracy;
  r.precision = c.precision;
  r.recall = c.recall;
  r.precision_undefined = c.precision_undefined;
  r.n_test = test.size();
  r.n_predicted_positive = c.n_predicted_positive;
  return r;
}

const char* to_string(Metric m) noexcept {
  switch (m) {
    case Metric::auc_roc:
      return "auc_roc";
    case Metric::accuracy:
      return "accuracy";
    case Metric::precision:
      return "precision";
    case Metric::recall:
      return "recall";
  }
  return "?";
}

double metric_value(const EvalResult& r, Metric m) noexcept {
  switch (m) {
    case Metric::auc_roc:
      return r.auc_roc;
    case Metric::accuracy:
      return r.accuracy;
    case Metric::precision:
      return r.precision;
    case Metric::recall:
      return r.recall;
  }
  return 0.0;
}

const EvalResult& best_by(const CellResult& cell, Metric m) {
  if (cell.results.empty()) throw Error(ErrorCode::invalid_argument, "empty cell");
  const EvalResult* best = &cell.results.front();
  for (const EvalResult& r : cell.results)
    if (metric_value(r, m) > metric_value(*best, m)) best = &r;
  return *best;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

std::size_t UtilityReport::results_for(ClassifierKind k) const {
  std::size_t n = 0;
  for (const CellResult& c : cells)
    for (const EvalResult& r : c.results) n += r.classifier == k;
  return n;
}

Summary UtilityReport::best(Metric m) const {
  std::vector<double> v;
  for (const CellResult& c : cells) v.push_back(metric_value(best_by(c, m), m));
  return summarize(v);
}

Summary UtilityReport::of(ClassifierKind k, Metric m) const {
  std::vector<double> v;
  for (const CellResult& c : cells)
    for (const EvalResult& r : c.results)
      if (r.classifier == k) v.push_back(metric_value(r, m));
  return summarize(v);
}

UtilityReport merge(const std::vector<UtilityReport>& parts) {
  if (parts.empty()) throw Error(ErrorCode::invalid_argument, "nothing to merge");
  UtilityReport out;
  out.setting = parts.front().setting;
  out.classifiers = parts.front().classifiers;
  for (const UtilityReport& p : parts) {
    if (p.setting != out.setting || p.classifiers != out.classifiers)
      throw Error(ErrorCode::invalid_argument, "merging reports of different settings");
    out.cells.insert(out.cells.end(), p.cells.begin(), p.cells.end());
  }
  return out;
}

std::string to_csv(const UtilityReport& r) {
  std::string out =
      "setting,fold,repetition,classifier,auc_roc,accuracy,precision,recall,precision_undefined,"
      "n_test,n_predicted_positive\n";
  char buf[256];
  for (const CellResult& c : r.cells)
    for (const EvalResult& e : c.results) {
      std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%s,%.17g,%.17g,%.17g,%.17g,%d,%zu,%zu\n",
                    r.setting.c_str(), c.fold, c.repetition, to_string(e.classifier), e.auc_roc,
                    e.accuracy, e.precision, e.recall, e.precision_undefined ? 1 : 0, e.n_test,
                    e.n_predicted_positive);
      out += buf;
    }
  return out;
}

FoldData make_fold(const data::LabeledDataset& ds, const data::FoldSplit& split, std::size_t fold) {
  if (split.assignment.size() != ds.size())
    throw Error(ErrorCode::dimension_mismatch, "fold split does not match the dataset");
  const auto train = split.train_indices(fold);
  const auto test = split.test_indices(fold);
  return FoldData{fold, ds.select(train), ds.select(test)};
}

data::LabeledDataset balance_augment(const data::LabeledDataset& train,
                                     const data::LabeledDataset& pool, Rng& rng) {
  if (pool.feature_count() != train.feature_count())
    throw Error(ErrorCode::dimension_mismatch, "balance_augment: pool width differs");
  const auto counts = train.class_counts();
  if (counts[0] == counts[1]) return train;
  const std::uint8_t minority = counts[0] < counts[1] ? 0 : 1;
  const std::uint8_t majority = 1 - minority;
  const std::size_t deficit = counts[majority] - counts[minority];
  const std::vector<std::size_t> candidates = pool.indices_of(minority);
  if (counts[minority] == 0 && candidates.empty())
    throw Error(ErrorCode::pool_shortfall,
                "balance_augment: no minority rows in either the training fold or the pool");
  const std::size_t take = std::min(deficit, candidates.size());
  const std::vector<std::size_t> added = sample_without_replacement(candidates, take, rng);

  std::vector<std::size_t> keep;
  if (take < deficit) {
    const std::vector<std::size_t> kept_major =
        sample_without_replacement(train.indices_of(majority), counts[minority] + take, rng);
    const std::vector<std::size_t> minor = train.indices_of(minority);
    keep.reserve(kept_major.size() + minor.size());
    std::merge(kept_major.begin(), kept_major.end(), minor.begin(), minor.end(),
               std::back_inserter(keep));
  } else {
    keep.resize(train.size());
    std::iota(keep.begin(), keep.end(), std::size_t{0});
  }
  return data::concat(train.select(keep), pool.select(added));
}

Resampled resample_baselines(const data::LabeledDataset& train, Rng& rng) {
  const auto counts = train.class_counts();
  if (counts[0] == 0 || counts[1] == 0)
    throw Error(ErrorCode::insufficient_data, "resampling needs both classes");
  if (counts[0] == counts[1]) return {train, train};
  const std::uint8_t minority = counts[0] < counts[1] ? 0 : 1;
  const std::uint8_t majority = 1 - minority;
  const std::vector<std::size_t> minor = train.indices_of(minority);

  std::vector<std::size_t> extra(counts[majority] - counts[minority]);
  std::uniform_int_distribution<std::size_t> pick(0, minor.size() - 1);
  for (auto& e : extra) e = minor[pick(rng)];
  Resampled out;
  out.upsampled = data::concat(train, train.select(extra));

  std::vector<std::size_t> keep =
      sample_without_replacement(train.indices_of(majority), counts[minority], rng);
  std::vector<std::size_t> rows;
  std::merge(keep.begin(), keep.end(), minor.begin(), minor.end(), std::back_inserter(rows));
  out.downsampled = train.select(rows);
  return out;
}

UtilityReport setting_a(const FoldData& fold, const data::LabeledDataset& pool,
                        std::size_t repetitions, std::uint64_t seed, const SuiteConfig& suite,
                        std::size_t n_target) {
  const double ratio = label_one_share(fold.train);
  const std::size_t n = n_target ? n_target : fold.train.size();
  return run_cells(fold, "A", repetitions, seed, suite, [&](std::size_t, Rng& rng) {
    return data::class_proportional_sample(pool, n, ratio, rng);
  });
}

UtilityReport setting_b(const FoldData& fold, const data::LabeledDataset& pool,
                        std::size_t repetitions, std::uint64_t seed, const SuiteConfig& suite) {
  return run_cells(fold, "B", repetitions, seed, suite,
                   [&](std::size_t, Rng& rng) { return balance_augment(fold.train, pool, rng); });
}

const char* to_string(Baseline b) noexcept {
  switch (b) {
    case Baseline::original:
      return "original";
    case Baseline::upsampled:
      return "upsampled";
    case Baseline::downsampled:
      return "downsampled";
  }
  return "?";
}

UtilityReport baseline(const FoldData& fold, Baseline which, std::size_t repetitions,
                       std::uint64_t seed, const SuiteConfig& suite) {
  return run_cells(fold, to_string(which), repetitions, seed, suite,
                   [&](std::size_t, Rng& rng) -> data::LabeledDataset {
                     if (which == Baseline::original) return fold.train;
                     Resampled r = resample_baselines(fold.train, rng);
                     return which == Baseline::upsampled ? std::move(r.upsampled)
                                                         : std::move(r.downsampled);
                   });
}

}  // namespace synthaug::utility
