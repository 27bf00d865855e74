#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "synthaug/data.hpp"
#include "synthaug/error.hpp"
#include "synthaug/utility/classifiers.hpp"
#include "synthaug/utility/metrics.hpp"
#include "synthaug/utility/protocol.hpp"

using namespace synthaug;
using namespace synthaug::utility;
using data::LabeledDataset;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

LabeledDataset labeled(const std::vector<std::vector<std::uint8_t>>& rows,
                       std::vector<std::uint8_t> y) {
  std::vector<std::uint8_t> bits;
  for (const auto& r : rows) bits.insert(bits.end(), r.begin(), r.end());
  return data::make_dataset(data::BinaryMatrix(rows.size(), rows[0].size(), std::move(bits)),
                            std::move(y));
}

// n0 + n1 rows of width d; every row distinct.
LabeledDataset counted(std::size_t n0, std::size_t n1, std::size_t d = 10) {
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<std::uint8_t> y;
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    std::vector<std::uint8_t> r(d);
    for (std::size_t c = 0; c < d; ++c) r[c] = (i >> c) & 1;
    rows.push_back(r);
    y.push_back(i < n0 ? 0 : 1);
  }
  return labeled(rows, y);
}

// Feature 0 equals the label; the rest is noise.
LabeledDataset separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::bernoulli_distribution coin(0.5), noise(0.3);
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<std::uint8_t> y;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t label = coin(g);
    std::vector<std::uint8_t> r{label};
    for (int c = 0; c < 7; ++c) r.push_back(noise(g));
    rows.push_back(r);
    y.push_back(label);
  }
  return labeled(rows, y);
}

double pair_count_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double num = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return num / pairs;
}

SuiteConfig fast_suite() {
  SuiteConfig s;
  s.kinds = {ClassifierKind::logistic_regression, ClassifierKind::naive_bayes,
             ClassifierKind::knn};
  return s;
}

FoldData bench_fold(std::size_t n, std::uint64_t seed, std::size_t d = 20) {
  const auto ds = data::generate_benchmark(data::make_benchmark_spec(n, d, 0.8, seed));
  return make_fold(ds, data::stratified_kfold(ds, 5, seed), 0);
}

}  // namespace

TEST(Auc, Examples) {
  const std::vector<std::uint8_t> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, y), 0.75);
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<double>{0, 1, 2, 3}, y), 1.0);
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<double>{7, 7, 7, 7}, y), 0.5);
}

TEST(Auc, MatchesPairCountingWithTies) {
  std::mt19937_64 g(13);
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<int> len(2, 50), level(0, 5);
    const int n = len(g);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = level(g) * 0.25;
      y[i] = g() & 1;
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_EQ(auc_roc(s, y), pair_count_auc(s, y));
  }
}

TEST(Auc, MonotoneTransformAndNegation) {
  std::mt19937_64 g(14);
  std::normal_distribution<double> z;
  std::vector<double> s(40), t(40), neg(40);
  std::vector<std::uint8_t> y(40);
  for (int i = 0; i < 40; ++i) {
    s[i] = z(g);
    t[i] = std::exp(3 * s[i]) + 1;
    neg[i] = -s[i];
    y[i] = i % 3 == 0;
  }
  EXPECT_DOUBLE_EQ(auc_roc(s, y), auc_roc(t, y));
  EXPECT_DOUBLE_EQ(auc_roc(s, y) + auc_roc(neg, y), 1.0);
}

TEST(Auc, SingleClass) {
  EXPECT_EQ(code_of([] { auc_roc(std::vector<double>{1, 2}, std::vector<std::uint8_t>{1, 1}); }),
            ErrorCode::insufficient_data);
}

TEST(Confusion, HandCount) {
  // TP=3 FP=1 FN=2 TN=4
  const std::vector<std::uint8_t> p{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<std::uint8_t> y{1, 1, 1, 0, 1, 1, 0, 0, 0, 0};
  const Confusion c = confusion_metrics(p, y);
  EXPECT_DOUBLE_EQ(c.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(c.precision, 0.75);
  EXPECT_DOUBLE_EQ(c.recall, 0.6);
  EXPECT_EQ(c.n_predicted_positive, 4u);
  EXPECT_FALSE(c.precision_undefined);
}

TEST(Confusion, PerfectAndAllNegative) {
  const std::vector<std::uint8_t> y{1, 0, 1, 1, 0};
  const Confusion perfect = confusion_metrics(y, y);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.n_predicted_positive, 3u);
  const Confusion none = confusion_metrics(std::vector<std::uint8_t>(5, 0), y);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_TRUE(none.precision_undefined);
}

TEST(Classifiers, EveryKindLearnsASeparableFeature) {
  const LabeledDataset train = separable(400, 1), test = separable(200, 2);
  for (ClassifierKind k : kAllClassifiers) {
    auto clf = make_classifier(k);
    clf->fit(train, 3);
    const EvalResult r = evaluate(*clf, test);
    EXPECT_GE(r.accuracy, 0.99) << to_string(k);
    EXPECT_GE(r.auc_roc, 0.99) << to_string(k);
    EXPECT_EQ(r.n_test, 200u);
  }
}

TEST(Classifiers, SeededFitIsDeterministic) {
  const LabeledDataset train = separable(300, 4), test = separable(100, 5);
  for (ClassifierKind k : kAllClassifiers) {
    auto a = make_classifier(k), b = make_classifier(k);
    a->fit(train, 9);
    b->fit(train, 9);
    EXPECT_EQ(a->score(test.features), b->score(test.features)) << to_string(k);
  }
}

TEST(Classifiers, NearestNeighbourRecallsTrainingRows) {
  const LabeledDataset train = counted(30, 50, 8);
  ClassifierParams p;
  p.knn_k = 1;
  auto clf = make_classifier(ClassifierKind::knn, p);
  clf->fit(train, 0);
  EXPECT_EQ(clf->predict(train.features), train.labels);
}

TEST(Classifiers, NaiveBayesReproducesLabelFeature) {
  const LabeledDataset train = separable(300, 6);
  auto clf = make_classifier(ClassifierKind::naive_bayes);
  clf->fit(train, 0);
  EXPECT_EQ(clf->predict(train.features), train.labels);
}

TEST(Classifiers, Errors) {
  for (ClassifierKind k : kAllClassifiers) {
    auto clf = make_classifier(k);
    EXPECT_EQ(code_of([&] { clf->fit(counted(0, 10), 0); }), ErrorCode::insufficient_data);
    clf->fit(counted(10, 10), 0);
    EXPECT_EQ(code_of([&] { clf->score(counted(2, 2, 4).features); }),
              ErrorCode::dimension_mismatch);
  }
  EXPECT_EQ(code_of([] { classifier_from_string("tree"); }), ErrorCode::invalid_argument);
  for (ClassifierKind k : kAllClassifiers) EXPECT_EQ(classifier_from_string(to_string(k)), k);
}

TEST(Balance, FillsFromPool) {
  Rng rng = make_rng(1);
  const LabeledDataset out = balance_augment(counted(20, 80), counted(60, 5), rng);
  EXPECT_EQ(out.class_counts(), (std::array<std::size_t, 2>{80, 80}));
}

TEST(Balance, FallsBackToDownsampling) {
  Rng rng = make_rng(2);
  const LabeledDataset train = counted(20, 80);
  const LabeledDataset out = balance_augment(train, counted(10, 3), rng);
  EXPECT_EQ(out.class_counts(), (std::array<std::size_t, 2>{30, 30}));
  for (std::size_t i : train.indices_of(0)) {
    bool kept = false;
    for (std::size_t j = 0; j < out.size() && !kept; ++j)
      kept = out.labels[j] == 0 && std::equal(out.features.row(j).begin(), out.features.row(j).end(),
                                              train.features.row(i).begin());
    EXPECT_TRUE(kept);
  }
}

TEST(Balance, BalancedInputUnchanged) {
  Rng rng = make_rng(3);
  const LabeledDataset train = counted(15, 15);
  const LabeledDataset out = balance_augment(train, counted(10, 10), rng);
  EXPECT_EQ(out.features.bits(), train.features.bits());
  EXPECT_EQ(out.labels, train.labels);
}

TEST(Balance, AlwaysExactlyBalanced) {
  for (std::size_t pool0 : {0u, 5u, 30u, 200u})
    for (std::size_t n0 : {1u, 10u, 45u}) {
      Rng rng = make_rng(pool0 * 100 + n0);
      const auto c = balance_augment(counted(n0, 50), counted(pool0, 4), rng).class_counts();
      EXPECT_EQ(c[0], c[1]);
      EXPECT_GE(c[0], n0);
    }
  Rng rng = make_rng(4);
  EXPECT_EQ(code_of([&] { balance_augment(counted(0, 10), counted(0, 5), rng); }),
            ErrorCode::pool_shortfall);
}

TEST(Baselines, Counts) {
  Rng rng = make_rng(5);
  const Resampled r = resample_baselines(counted(20, 80), rng);
  EXPECT_EQ(r.upsampled.class_counts(), (std::array<std::size_t, 2>{80, 80}));
  EXPECT_EQ(r.downsampled.class_counts(), (std::array<std::size_t, 2>{20, 20}));
  const Resampled same = resample_baselines(counted(5, 5), rng);
  EXPECT_EQ(same.upsampled.size(), 10u);
  EXPECT_EQ(same.downsampled.size(), 10u);
  EXPECT_EQ(code_of([&] { resample_baselines(counted(0, 5), rng); }),
            ErrorCode::insufficient_data);
}

TEST(Summary, PopulationMoments) {
  const std::vector<double> v{1, 2, 3, 4};
  const Summary s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_EQ(s.count, 4u);
  EXPECT_EQ(summarize(std::vector<double>{}).count, 0u);
}

TEST(Protocol, GridShapeAndBestSelection) {
  const FoldData fold = bench_fold(400, 7);
  const UtilityReport a = setting_a(fold, fold.train, 3, 11, fast_suite());
  ASSERT_EQ(a.cells.size(), 3u);
  for (ClassifierKind k : fast_suite().kinds) EXPECT_EQ(a.results_for(k), 3u);
  for (const CellResult& c : a.cells) {
    EXPECT_EQ(c.train_counts, fold.train.class_counts());
    for (Metric m : kMetrics)
      for (const EvalResult& r : c.results)
        EXPECT_GE(metric_value(best_by(c, m), m), metric_value(r, m));
  }
  std::vector<UtilityReport> parts{a, a};
  EXPECT_EQ(merge(parts).cells.size(), 6u);
  const std::string csv = to_csv(a);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 3);
}

TEST(Protocol, SelfSubstitutionMatchesRealTraining) {
  const FoldData fold = bench_fold(500, 8);
  const UtilityReport a = setting_a(fold, fold.train, 2, 12, fast_suite());
  const UtilityReport real = baseline(fold, Baseline::original, 2, 12, fast_suite());
  for (ClassifierKind k : fast_suite().kinds)
    EXPECT_LE(std::abs(a.of(k, Metric::auc_roc).mean - real.of(k, Metric::auc_roc).mean), 0.02);
}

// A single noise-trained scorer can land far from 0.5 on this test fold; the
// mean over independent pools is what sits at chance.
TEST(Protocol, NoisePoolIsNearChance) {
  const FoldData fold = bench_fold(3000, 9, 41);
  std::vector<double> best;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    std::mt19937_64 g(100 + seed);
    std::bernoulli_distribution bit(0.2);
    std::vector<std::vector<std::uint8_t>> rows(3000, std::vector<std::uint8_t>(41));
    std::vector<std::uint8_t> y(3000);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (auto& v : rows[i]) v = bit(g);
      y[i] = i % 5 != 0;
    }
    const UtilityReport a = setting_a(fold, labeled(rows, y), 2, seed, fast_suite());
    best.push_back(a.best(Metric::auc_roc).mean);
  }
  EXPECT_NEAR(summarize(best).mean, 0.5, 0.05);
}

TEST(Protocol, SettingBAndBaselinesAreBalanced) {
  const FoldData fold = bench_fold(400, 11);
  const UtilityReport b = setting_b(fold, fold.train, 2, 14, fast_suite());
  for (const CellResult& c : b.cells) EXPECT_EQ(c.train_counts[0], c.train_counts[1]);
  for (Baseline w : {Baseline::upsampled, Baseline::downsampled})
    for (const CellResult& c : baseline(fold, w, 2, 14, fast_suite()).cells)
      EXPECT_EQ(c.train_counts[0], c.train_counts[1]);
}

TEST(Protocol, DeterministicAndThreadIndependent) {
  const FoldData fold = bench_fold(300, 12);
  SuiteConfig one;
  SuiteConfig two = one;
  two.threads = 2;
  EXPECT_EQ(to_csv(setting_b(fold, fold.train, 2, 15, one)),
            to_csv(setting_b(fold, fold.train, 2, 15, two)));
}

TEST(Protocol, PoolShortfallPropagates) {
  const FoldData fold = bench_fold(300, 13);
  EXPECT_EQ(code_of([&] { setting_a(fold, counted(3, 3, 20), 1, 1, fast_suite()); }),
            ErrorCode::pool_shortfall);
  EXPECT_EQ(code_of([&] { setting_a(fold, fold.train, 0, 1, fast_suite()); }),
            ErrorCode::invalid_argument);
}
