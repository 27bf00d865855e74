// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "synthaug/data.hpp"
#include "synthaug/error.hpp"
#include "synthaug/experiment.hpp"
#include "synthaug/generators/model.hpp"
#include "synthaug/generators/trainers.hpp"
#include "synthaug/nn/grad_check.hpp"
#include "synthaug/nn/optim.hpp"
#include "synthaug/similarity.hpp"
#include "synthaug/uniqueness.hpp"
#include "synthaug/utility/metrics.hpp"
#include "synthaug/utility/protocol.hpp"

using namespace synthaug;
using data::LabeledDataset;
using nn::Matrix;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

LabeledDataset benchmark(std::size_t n, std::size_t d, std::uint64_t seed, double coupling = 0.0) {
  return data::generate_benchmark(data::make_benchmark_spec(n, d, 0.8, seed, coupling));
}

// ---- 1, 2: PRDC ------------------------------------------------------------

double euclid(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) s += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
  return std::sqrt(s);
}

std::vector<double> brute_radii(const Matrix& x, std::size_t k) {
  std::vector<double> r;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> d;
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      if (i != j) d.push_back(euclid(x, i, x, j));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    r.push_back(d[k - 1]);
  }
  return r;
}

similarity::PrdcScores brute_prdc(const Matrix& real, const Matrix& fake, std::size_t k) {
  const auto rr = brute_radii(real, k), rf = brute_radii(fake, k);
  double p = 0, r = 0, d = 0, c = 0;
  for (Eigen::Index j = 0; j < fake.rows(); ++j) {
    bool in = false;
    for (Eigen::Index i = 0; i < real.rows(); ++i)
      if (euclid(fake, j, real, i) < rr[i]) {
        in = true;
        d += 1;
      }
    p += in;
  }
  for (Eigen::Index i = 0; i < real.rows(); ++i) {
    bool rec = false, cov = false;
    for (Eigen::Index j = 0; j < fake.rows(); ++j) {
      const double dist = euclid(real, i, fake, j);
      rec = rec || dist < rf[j];
      cov = cov || dist < rr[i];
    }
    r += rec;
    c += cov;
  }
  similarity::PrdcScores s;
  s.precision = p / fake.rows();
  s.recall = r / real.rows();
  s.density = d / (static_cast<double>(k) * fake.rows());
  s.coverage = c / real.rows();
  return s;
}

Matrix random_bits(Eigen::Index n, Eigen::Index d, double p, std::mt19937_64& g) {
  std::bernoulli_distribution b(p);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = b(g);
  return m;
}

Outcome prdc_oracle() {
  std::mt19937_64 g(101);
  std::uniform_int_distribution<int> rows(6, 300), cols(1, 41);
  std::uniform_real_distribution<double> density(0.05, 0.6);
  double kernel = 0.0;
  int equal = 0, largest = 0;
  for (int t = 0; t < 50; ++t) {
    const int d = t < 5 ? 41 : cols(g);
    const int nr = t < 5 ? 300 : rows(g), ns = t < 5 ? 300 : rows(g);
    largest = std::max(largest, std::max(nr, ns) * d);
    const Matrix real = random_bits(nr, d, density(g), g), fake = random_bits(ns, d, density(g), g);
    const auto t0 = Clock::now();
    const auto got = similarity::prdc(real, fake, 5);
    kernel += seconds_since(t0);
    const auto want = brute_prdc(real, fake, 5);
    equal += got.precision == want.precision && got.recall == want.recall &&
             got.density == want.density && got.coverage == want.coverage;
  }
  return {equal == 50 && kernel < 10.0,
          fmt("%d/50 pairs bit-identical (largest %d cells), kernel time %.2f s", equal, largest,
              kernel)};
}

Outcome prdc_extremes() {
  std::mt19937_64 g(202);
  std::normal_distribution<double> z;
  double worst = 0.0;
  bool zeros = true;
  for (int t = 0; t < 10; ++t) {
    Matrix x(200, 8);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(g);
    const auto s = similarity::prdc(x, x, 5);
    for (double v : {s.precision, s.recall, s.density, s.coverage})
      worst = std::max(worst, std::abs(v - 1.0));
    const Matrix far = (x.array() + 1e3).matrix();
    const auto f = similarity::prdc(x, far, 5);
    zeros = zeros && f.precision == 0.0 && f.recall == 0.0 && f.density == 0.0 &&
            f.coverage == 0.0;
  }
  return {worst <= 1e-12 && zeros,
          fmt("identical sets max |score-1| = %.3g, far-apart sets all zero: %s", worst,
              zeros ? "yes" : "no")};
}

// ---- 3: gradients ----------------------------------------------------------

struct StepValue {
  double loss = 0.0;
  nn::ParamSet grads;
};

double check(std::vector<Matrix*> params, const std::function<StepValue(Rng&)>& step,
             std::uint64_t seed, double h, const std::function<void(nn::ParamSet&)>& corrupt = {}) {
  Rng rng(seed);
  StepValue first = step(rng);
  if (corrupt) corrupt(first.grads);
  return nn::max_relative_error(params, first.grads, [&] {
    Rng r(seed);
    return step(r).loss;
  }, h);
}

Outcome gradients() {
  const LabeledDataset ds = benchmark(200, 12, 7);
  const Matrix x = data::joint_matrix(ds);
  std::map<std::string, double> err;

  gen::VaeConfig vc;
  vc.hidden_dim = 16;
  vc.latent_dim = 4;
  Rng i1(1);
  gen::VaeModel vae = gen::make_vae(13, vc, i1);
  const Matrix batch = x.topRows(10);
  const auto vae_step = [&](Rng& r) {
    gen::VaeLoss l = gen::vae_loss_and_grads(vae, batch, r);
    return StepValue{l.total, std::move(l.grads)};
  };
  err["vae"] = check(gen::vae_parameters(vae), vae_step, 11, 1e-4);

  gen::DpGanConfig dc;
  dc.generator_blocks = {8, 16, 32, 32};
  dc.discriminator_hidden = {32, 16};
  dc.latent_dim = 6;
  Rng i2(2);
  gen::DpGanModel gan = gen::make_dpgan(13, dc, i2);
  const Matrix pm1 = (x.topRows(6).array() * 2.0 - 1.0).matrix();
  err["dpgan_disc"] = check(gan.discriminator.parameters(), [&](Rng& r) {
    Rng noise(0);
    gen::DiscriminatorStep s = gen::dpgan_discriminator_step(gan, pm1, false, r, noise);
    return StepValue{s.loss, std::move(s.grads)};
  }, 12, 1e-5);
  err["dpgan_gen"] = check(gan.generator.parameters(), [&](Rng& r) {
    gen::GeneratorStep s = gen::dpgan_generator_step(gan, 6, r);
    return StepValue{s.loss, std::move(s.grads)};
  }, 13, 1e-5);

  gen::CtGanConfig cc;
  cc.gen_hidden = 8;
  cc.disc_hidden = 16;
  cc.embedding_dim = 6;
  cc.batch_size = 8;
  cc.pac = 2;
  Rng i3(3);
  gen::CtGanModel ct = gen::make_ctgan(13, cc, x, i3);
  const gen::CtGanData prepared = gen::ctgan_prepare(x);
  err["ctgan_disc"] = check(ct.discriminator.parameters(), [&](Rng& r) {
    gen::CtGanDiscriminatorStep s = gen::ctgan_discriminator_step(ct, prepared, r);
    return StepValue{s.loss, std::move(s.grads)};
  }, 14, 1e-5);
  err["ctgan_gen"] = check(ct.generator.parameters(), [&](Rng& r) {
    gen::GeneratorStep s = gen::ctgan_generator_step(ct, r);
    return StepValue{s.loss, std::move(s.grads)};
  }, 15, 1e-5);

  const double control = check(gen::vae_parameters(vae), vae_step, 11, 1e-4,
                               [](nn::ParamSet& g) { g[2] *= 1.5; });

  bool ok = control > 1e-4;
  std::string detail;
  for (const auto& [name, e] : err) {
    ok = ok && e <= 1e-4;
    detail += fmt("%s %.2g, ", name.c_str(), e);
  }
  detail += fmt("corrupted control %.2g (must exceed 1e-4)", control);
  return {ok, detail};
}

// ---- 4: DP sanitizer -------------------------------------------------------

Outcome dp_sanitizer() {
  const LabeledDataset ds = benchmark(320, 12, 8);
  const Matrix pm1 = (data::joint_matrix(ds).topRows(32).array() * 2.0 - 1.0).matrix();
  gen::DpGanConfig c;
  c.generator_blocks = {8, 16, 32, 32};
  c.discriminator_hidden = {32, 16};
  c.latent_dim = 6;
  c.batch_size = 32;

  // sigma 0 with an enormous clip bound against the unsanitized step
  c.dp = {1e12, 0.0};
  Rng init(1);
  gen::DpGanModel m = gen::make_dpgan(13, c, init);
  Rng r1(5), r2(5), n1(6), n2(6);
  const auto dp = gen::dpgan_discriminator_step(m, pm1, true, r1, n1);
  const auto plain = gen::dpgan_discriminator_step(m, pm1, false, r2, n2);
  double diff = 0.0;
  for (std::size_t p = 0; p < dp.grads.size(); ++p)
    diff = std::max(diff, (dp.grads[p] - plain.grads[p]).cwiseAbs().maxCoeff());

  // post-clip norms over 10^4 training steps
  gen::DpGanConfig t = c;
  t.dp = {0.05, 0.5};
  t.epochs = 1000;
  t.seed = 9;
  std::size_t steps = 0, examples = 0;
  double worst = 0.0;
  gen::TrainOptions opt;
  opt.observer.on_clipped_norms = [&](std::span<const double> norms) {
    ++steps;
    examples += norms.size();
    for (double v : norms) worst = std::max(worst, v);
  };
  gen::dpgan_train(ds, t, opt);

  // noise replay: same seed, same bits; the sum of clipped per-example
  // gradients plus the replayed Gaussian draws reproduces the step
  c.dp = {0.05, 0.7};
  Rng init2(2);
  gen::DpGanModel m2 = gen::make_dpgan(13, c, init2);
  Rng a(7), b(7), na(8), nb(8);
  const auto s1 = gen::dpgan_discriminator_step(m2, pm1, true, a, na);
  const auto s2 = gen::dpgan_discriminator_step(m2, pm1, true, b, nb);
  bool replay = true;
  for (std::size_t p = 0; p < s1.grads.size(); ++p) replay = replay && s1.grads[p] == s2.grads[p];

  std::mt19937_64 g(3);
  std::normal_distribution<double> z;
  std::vector<nn::ParamSet> per(4, nn::ParamSet{Matrix(3, 2), Matrix(1, 2)});
  for (auto& e : per)
    for (Matrix& q : e)
      for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = z(g);
  Rng noise(21);
  const nn::ParamSet got = nn::dp_sanitize(per, {0.1, 0.5}, noise);
  Rng again(21);
  std::normal_distribution<double> draw(0.0, 0.05);
  double oracle = 0.0;
  for (std::size_t p = 0; p < got.size(); ++p) {
    Matrix want = Matrix::Zero(got[p].rows(), got[p].cols());
    for (const auto& e : per) {
      double sq = 0.0;
      for (const Matrix& q : e) sq += q.squaredNorm();
      want += e[p] * std::min(1.0, 0.1 / std::sqrt(sq));
    }
    for (Eigen::Index i = 0; i < want.size(); ++i) want.data()[i] += draw(again);
    want /= 4.0;
    oracle = std::max(oracle, (got[p] - want).cwiseAbs().maxCoeff());
  }

  const bool ok = diff <= 1e-12 && steps >= 10000 && worst <= 0.05 * (1 + 1e-12) && replay &&
                  oracle <= 1e-15;
  return {ok, fmt("vanilla diff %.2g; %zu steps / %zu clipped examples, max norm %.6g (clip 0.05); "
                  "replay %s, noise oracle diff %.2g",
                  diff, steps, examples, worst, replay ? "bit-exact" : "differs", oracle)};
}

// ---- 5: AUC ----------------------------------------------------------------

Outcome auc_oracle() {
  std::mt19937_64 g(303);
  int equal = 0, with_ties = 0;
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<int> len(2, 50), lvl(0, t % 2 ? 4 : 1000);
    const int n = len(g);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = lvl(g) / 7.0;
      y[i] = g() % 3 == 0;
    }
    y[0] = 0;
    y[n - 1] = 1;
    double num = 0.0, pairs = 0.0;
    bool tie = false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (y[i] && !y[j]) {
          pairs += 1;
          num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
          tie = tie || s[i] == s[j];
        }
    with_ties += tie;
    equal += utility::auc_roc(s, y) == num / pairs;
  }
  return {equal == 100, fmt("%d/100 instances exact (%d with tied pairs)", equal, with_ties)};
}

// ---- 6: uniqueness ---------------------------------------------------------

Outcome uniqueness_oracle() {
  std::mt19937_64 g(404);
  int agree = 0, exact = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 5, n = 10 + t % 30, m = 20 + (t * 7) % 60;
    std::bernoulli_distribution bit(0.35);
    const auto make = [&](std::size_t rows) {
      std::vector<std::uint8_t> bits(rows * d), y(rows);
      for (auto& b : bits) b = bit(g);
      for (auto& b : y) b = bit(g);
      return data::make_dataset(data::BinaryMatrix(rows, d, bits), y);
    };
    const LabeledDataset train = make(n), gen = make(m);
    const auto same = [&](const LabeledDataset& a, std::size_t i, const LabeledDataset& b,
                          std::size_t j) {
      if (a.labels[i] != b.labels[j]) return false;
      for (std::size_t c = 0; c < d; ++c)
        if (a.features.at(i, c) != b.features.at(j, c)) return false;
      return true;
    };
    std::size_t copies = 0, novel = 0, novel_unique = 0;
    std::set<std::size_t> hit_train;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < m; ++j) {
      bool copy = false;
      for (std::size_t i = 0; i < n; ++i)
        if (same(gen, j, train, i)) {
          copy = true;
          bool first = true;
          for (std::size_t h : hit_train) first = first && !same(train, h, train, i);
          if (first) hit_train.insert(i);
        }
      if (copy) {
        ++copies;
        continue;
      }
      ++novel;
      bool seen = false;
      for (std::size_t k : kept) seen = seen || same(gen, k, gen, j);
      if (!seen) {
        kept.push_back(j);
        ++novel_unique;
      }
    }
    const auto r = uniqueness::audit(train, gen);
    exact += r.n_copy_total == copies && r.n_copy_distinct == hit_train.size() &&
             r.n_novel_total == novel && r.n_novel_unique == novel_unique && r.n_generated == m;
    std::size_t filtered = 0;
    try {
      filtered = uniqueness::filter_unique_novel(train, gen).size();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::empty_result) throw;
    }
    agree += filtered == r.n_novel_unique;
  }
  return {agree == 100 && exact == 100,
          fmt("audit/filter agree %d/100, audit equals brute force %d/100", agree, exact)};
}

// ---- 7: protocol shape and determinism -----------------------------------

gen::CtGanConfig small_ctgan(std::size_t epochs) {
  gen::CtGanConfig c;
  c.batch_size = 50;
  c.pac = 10;
  c.disc_hidden = 128;
  c.n_disc_updates = 2;
  c.epochs = epochs;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome protocol_shape() {
  experiment::ExperimentConfig cfg;
  cfg.dataset.benchmark = {3000, 41, 0.8, 0.0, 5};
  cfg.generator = small_ctgan(20);
  cfg.seed = 2024;
  cfg.output_dir = "acceptance_run";
  const fs::path base = fs::temp_directory_path() / "synthaug_acceptance";
  fs::remove_all(base);
  const auto run_under = [&](const std::string& root) {
    ::setenv(experiment::kOutputRootEnv, (base / root).c_str(), 1);
    const auto t0 = Clock::now();
    experiment::RunResult r = experiment::run_experiment(cfg);
    ::unsetenv(experiment::kOutputRootEnv);
    return std::make_pair(std::move(r), seconds_since(t0));
  };
  const auto [first, t1] = run_under("a");
  const auto [second, t2] = run_under("b");

  bool shape = first.folds.size() == 5 && second.folds.size() == 5;
  std::size_t settings = 0;
  std::map<std::string, std::size_t> per_setting;
  for (const auto& f : first.folds)
    for (const auto& u : f.utility)
      for (auto k : u.classifiers) per_setting[u.setting + "/" + utility::to_string(k)] +=
                                   u.results_for(k);
  for (const auto& [key, count] : per_setting) {
    ++settings;
    shape = shape && count == 50;
  }
  shape = shape && settings == 5 * 6;

  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    const fs::path twin = base / "b" / fs::relative(e.path(), base / "a");
    ++files;
    differing += !fs::exists(twin) || slurp(e.path()) != slurp(twin);
  }
  fs::remove_all(base);
  return {shape && differing == 0 && files > 0,
          fmt("%zu setting/classifier series, all with 50 results: %s; rerun %zu/%zu files "
              "byte-identical (runs %.0f s, %.0f s)",
              settings, shape ? "yes" : "no", files - differing, files, t1, t2)};
}

// ---- 8: directional augmentation ------------------------------------------

double best_accuracy(const std::vector<utility::UtilityReport>& parts) {
  return utility::merge(parts).best(utility::Metric::accuracy).mean;
}

// Every real minority row repeated until the copies cover the class gap, so
// drawing without replacement behaves like upsampling with replacement.
LabeledDataset replicated_minority(const LabeledDataset& train) {
  const auto counts = train.class_counts();
  const std::uint8_t minority = counts[0] < counts[1] ? 0 : 1;
  const auto rows = train.indices_of(minority);
  const std::size_t gap = counts[1 - minority] - counts[minority];
  const std::size_t copies = (gap + rows.size() - 1) / rows.size();
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < copies; ++c) idx.insert(idx.end(), rows.begin(), rows.end());
  return train.select(idx);
}

Outcome augmentation_direction() {
  constexpr std::size_t kSeeds = 10, kFolds = 5, kReps = 3, kGenerate = 20000;
  const auto t0 = Clock::now();
  std::size_t wins = 0;
  std::vector<double> self_sub, upsampled;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const LabeledDataset ds = benchmark(3000, 41, 1000 + seed, 0.9);
    const auto split = data::stratified_kfold(ds, kFolds, derive_seed(seed, {stage_id("folds")}));
    std::vector<utility::UtilityReport> b, down, up, self;
    for (std::size_t f = 0; f < kFolds; ++f) {
      const utility::FoldData fold = utility::make_fold(ds, split, f);
      gen::AnyConfig cfg = small_ctgan(50);
      gen::set_seed(cfg, derive_seed(seed, {f, stage_id("generator")}));
      const gen::TrainResult trained = gen::train(fold.train, cfg);
      Rng rng = make_rng(derive_seed(seed, {f, stage_id("generate")}));
      const LabeledDataset pool =
          uniqueness::filter_unique_novel(fold.train, gen::generate(trained.model, kGenerate, rng));
      const std::uint64_t useed = derive_seed(seed, {f, stage_id("utility")});
      b.push_back(utility::setting_b(fold, pool, kReps, useed));
      down.push_back(utility::baseline(fold, utility::Baseline::downsampled, kReps, useed));
      up.push_back(utility::baseline(fold, utility::Baseline::upsampled, kReps, useed));
      self.push_back(utility::setting_b(fold, replicated_minority(fold.train), kReps, useed));
    }
    const double acc_b = best_accuracy(b), acc_down = best_accuracy(down);
    wins += acc_b > acc_down;
    self_sub.push_back(best_accuracy(self));
    upsampled.push_back(best_accuracy(up));
    per_seed += fmt(" %.3f/%.3f/%.3f", acc_b, acc_down, upsampled.back());
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < kSeeds; ++i) gap += (self_sub[i] - upsampled[i]) / kSeeds;
  return {wins >= 7 && std::abs(gap) <= 0.02,
          fmt("CTGAN setting B beats downsampling in %zu/10 seeds (B/down/up:%s); self-substitution "
              "minus upsampling mean accuracy %+.4f; %.0f s",
              wins, per_seed.c_str(), gap, seconds_since(t0))};
}

// ---- 9: generation throughput ---------------------------------------------

Outcome throughput() {
  const LabeledDataset ds = benchmark(3000, 41, 6);
  std::string detail;
  bool ok = true;
  for (const std::string name : {"vae", "dpgan001", "dpgan050", "ctgan"}) {
    gen::AnyConfig cfg = gen::default_config(name);
    gen::set_epochs(cfg, 1);
    gen::set_seed(cfg, 3);
    const gen::TrainResult trained = gen::train(ds, cfg);
    Rng rng(4);
    const auto t0 = Clock::now();
    const LabeledDataset out = gen::generate(trained.model, 100000, rng);
    const double s = seconds_since(t0);
    ok = ok && s <= 60.0 && out.size() == 100000 && out.feature_count() == 41;
    detail += fmt("%s %.1f s, ", name.c_str(), s);
  }
  detail.resize(detail.size() - 2);
  return {ok, "100k rows at d=41: " + detail};
}

// ---- 10: grid search ---------------------------------------------------------

LabeledDataset copier_or_noise(const LabeledDataset& train, const gen::AnyConfig& cfg,
                               std::size_t n, std::uint64_t seed) {
  if (gen::epochs_of(cfg) == 1) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i % train.size();
    return train.select(idx);
  }
  std::mt19937_64 g(seed);
  std::bernoulli_distribution bit(0.3);
  std::vector<std::uint8_t> bits(n * train.feature_count()), y(n);
  for (auto& b : bits) b = bit(g);
  for (std::size_t i = 0; i < n; ++i) y[i] = i % 5 != 0;
  return data::make_dataset(data::BinaryMatrix(n, train.feature_count(), bits), y);
}

Outcome grid() {
  std::size_t copier_wins = 0, trials = 0;
  bool winner_is_max = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    experiment::GridSpec g;
    gen::VaeConfig base;
    base.epochs = 1;
    g.base = base;
    g.seed = seed;
    g.axes.push_back({"epochs", {2, 1, 3}});
    const auto r = experiment::grid_search(g, benchmark(600, 41, 50 + seed), copier_or_noise);
    ++trials;
    copier_wins += r.best == 1 && r.points[1].prdc_sum > r.points[0].prdc_sum &&
                   r.points[1].prdc_sum > r.points[2].prdc_sum;
  }
  experiment::GridSpec real;
  real.base = small_ctgan(10);
  real.axes.push_back({"epochs", {5, 15}});
  real.axes.push_back({"gen_lr", {2e-3, 1e-2}});
  const auto r = experiment::grid_search(real, benchmark(600, 41, 60));
  std::size_t scored = 0;
  for (const auto& p : r.points) {
    if (!p.scores) continue;
    ++scored;
    winner_is_max = winner_is_max && r.points[r.best].prdc_sum >= p.prdc_sum;
  }
  winner_is_max = winner_is_max && r.points[r.best].prdc_sum == r.max_sum;
  return {copier_wins == trials && winner_is_max && scored > 0,
          fmt("copier beats noise in %zu/%zu grids; CTGAN grid winner %.3f is the max over %zu "
              "scored points (range [%.3f, %.3f])",
              copier_wins, trials, r.points[r.best].prdc_sum, scored, r.min_sum, r.max_sum)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"PRDC oracle equivalence", prdc_oracle},
      {"identical and far-apart PRDC", prdc_extremes},
      {"gradient correctness", gradients},
      {"DP sanitizer", dp_sanitizer},
      {"AUC oracle", auc_oracle},
      {"uniqueness accounting", uniqueness_oracle},
      {"protocol shape and rerun", protocol_shape},
      {"augmentation direction", augmentation_direction},
      {"generation throughput", throughput},
      {"grid search", grid},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
