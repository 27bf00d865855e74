#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synthaug/data.hpp"
#include "synthaug/utility/classifiers.hpp"
#include "synthaug/utility/metrics.hpp"

namespace synthaug::utility {

struct EvalResult {
  ClassifierKind classifier = ClassifierKind::logistic_regression;
  double auc_roc = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_undefined = false;
  std::size_t n_test = 0;
  std::size_t n_predicted_positive = 0;
};

EvalResult evaluate(const Classifier& clf, const data::LabeledDataset& test);

enum class Metric { auc_roc, accuracy, precision, recall };
inline constexpr Metric kMetrics[] = {Metric::auc_roc, Metric::accuracy, Metric::precision,
                                      Metric::recall};
const char* to_string(Metric m) noexcept;
double metric_value(const EvalResult& r, Metric m) noexcept;

struct SuiteConfig {
  std::vector<ClassifierKind> kinds{std::begin(kAllClassifiers), std::end(kAllClassifiers)};
  ClassifierParams params;
  std::size_t threads = 1;
};

// One (fold, repetition) training set evaluated by every classifier.
struct CellResult {
  std::size_t fold = 0;
  std::size_t repetition = 0;
  std::array<std::size_t, 2> train_counts{0, 0};
  std::vector<EvalResult> results;  // suite order
};

// First classifier (suite order) maximizing the metric.
const EvalResult& best_by(const CellResult& cell, Metric m);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct UtilityReport {
  std::string setting;  // A, B, original, upsampled, downsampled
  std::vector<ClassifierKind> classifiers;
  std::vector<CellResult> cells;

  std::size_t results_for(ClassifierKind k) const;
  // Best classifier per cell for that metric, then mean/std over cells.
  Summary best(Metric m) const;
  Summary of(ClassifierKind k, Metric m) const;
};

// Concatenates cells of reports for the same setting, in argument order.
UtilityReport merge(const std::vector<UtilityReport>& parts);

// One row per (cell, classifier).
std::string to_csv(const UtilityReport& r);

struct FoldData {
  std::size_t index = 0;
  data::LabeledDataset train;
  data::LabeledDataset test;
};

FoldData make_fold(const data::LabeledDataset& ds, const data::FoldSplit& split, std::size_t fold);

// Minority rows of the pool, sampled without replacement, fill the class gap;
// if they run out the majority is downsampled to match. Real minority rows
// are always kept.
data::LabeledDataset balance_augment(const data::LabeledDataset& train,
                                     const data::LabeledDataset& pool, Rng& rng);

struct Resampled {
  data::LabeledDataset upsampled;    // minority topped up with replacement
  data::LabeledDataset downsampled;  // majority subsampled without replacement
};

Resampled resample_baselines(const data::LabeledDataset& train, Rng& rng);

// Synthetic-only training sets with the fold's class ratio and, unless
// n_target is set, the fold's size.
UtilityReport setting_a(const FoldData& fold, const data::LabeledDataset& pool,
                        std::size_t repetitions, std::uint64_t seed, const SuiteConfig& suite = {},
                        std::size_t n_target = 0);

// Real fold balanced with synthetic minority rows.
UtilityReport setting_b(const FoldData& fold, const data::LabeledDataset& pool,
                        std::size_t repetitions, std::uint64_t seed, const SuiteConfig& suite = {});

enum class Baseline { original, upsampled, downsampled };
const char* to_string(Baseline b) noexcept;

UtilityReport baseline(const FoldData& fold, Baseline which, std::size_t repetitions,
                       std::uint64_t seed, const SuiteConfig& suite = {});

}  // namespace synthaug::utility
