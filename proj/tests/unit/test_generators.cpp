#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "synthaug/error.hpp"
#include "synthaug/generators/checkpoint.hpp"
#include "synthaug/generators/model.hpp"
#include "synthaug/generators/trainers.hpp"
#include "synthaug/nn/grad_check.hpp"

using namespace synthaug;
using namespace synthaug::gen;

namespace {

// 64 rows clustered on one pattern: each row flips at most one bit of the mode.
const std::vector<std::uint8_t> kMode{1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 0, 1};

data::LabeledDataset single_mode(std::size_t rows = 64) {
  const std::size_t d = kMode.size() - 1;
  std::vector<std::uint8_t> bits, labels;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::uint8_t> row = kMode;
    if (r % 4 != 0) row[r % kMode.size()] ^= 1;
    bits.insert(bits.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(d));
    labels.push_back(row[d]);
  }
  return data::make_dataset(data::BinaryMatrix(rows, d, std::move(bits)), std::move(labels));
}

data::LabeledDataset small_benchmark(std::size_t n = 300, std::size_t d = 12) {
  return data::generate_benchmark(data::make_benchmark_spec(n, d, 0.8, 21));
}

void expect_binary(const data::LabeledDataset& ds, std::size_t n, std::size_t d) {
  ASSERT_EQ(ds.size(), n);
  ASSERT_EQ(ds.feature_count(), d);
  for (auto b : ds.features.bits()) ASSERT_LE(b, 1);
  for (auto b : ds.labels) ASSERT_LE(b, 1);
}

std::size_t hamming_to_mode(const data::LabeledDataset& ds, std::size_t r) {
  std::size_t h = 0;
  for (std::size_t j = 0; j < ds.feature_count(); ++j) h += ds.features.at(r, j) != kMode[j];
  return h + (ds.labels[r] != kMode.back());
}

VaeConfig tiny_vae() {
  VaeConfig c;
  c.hidden_dim = 16;
  c.latent_dim = 4;
  c.batch_size = 32;
  c.epochs = 3;
  return c;
}

DpGanConfig tiny_dpgan() {
  DpGanConfig c;
  c.generator_blocks = {8, 16, 32, 32};
  c.discriminator_hidden = {32, 16};
  c.latent_dim = 6;
  c.batch_size = 32;
  c.epochs = 3;
  return c;
}

CtGanConfig tiny_ctgan() {
  CtGanConfig c;
  c.gen_hidden = 8;
  c.disc_hidden = 16;
  c.embedding_dim = 6;
  c.batch_size = 40;
  c.pac = 4;
  c.n_disc_updates = 2;
  c.epochs = 2;
  return c;
}

nn::Matrix joint01(const data::LabeledDataset& ds) { return data::joint_matrix(ds); }

template <class Step>
double check_step(std::vector<nn::Matrix*> params, Step step, std::uint64_t seed,
                  double h = 1e-5) {
  Rng rng(seed);
  const auto first = step(rng);
  return nn::max_relative_error(params, first.grads, [&] {
    Rng r(seed);
    return step(r).loss_value;
  }, h);
}

void same_model(const GeneratorModel& a, const GeneratorModel& b) {
  EXPECT_EQ(model_to_json(a).dump(), model_to_json(b).dump());
}

}  // namespace

// ---- VAE -------------------------------------------------------------------

TEST(Vae, ZeroEpochsStillGeneratesValidRows) {
  VaeConfig c = tiny_vae();
  c.epochs = 0;
  const TrainResult r = vae_train(small_benchmark(), c);
  EXPECT_TRUE(r.trace.epochs.empty());
  Rng rng(1);
  expect_binary(generate(r.model, 50, rng), 50, 12);
}

TEST(Vae, GradientsPassFiniteDifferences) {
  const data::LabeledDataset ds = small_benchmark(40);
  Rng init(3);
  VaeModel m = make_vae(13, tiny_vae(), init);
  const nn::Matrix batch = joint01(ds).topRows(10);
  struct R {
    double loss_value;
    nn::ParamSet grads;
  };
  const double err = check_step(vae_parameters(m), [&](Rng& rng) {
    VaeLoss l = vae_loss_and_grads(m, batch, rng);
    return R{l.total, std::move(l.grads)};
  }, 17, 1e-4);
  EXPECT_LE(err, 1e-4);
}

TEST(Vae, LearnsSingleModeBetterThanChance) {
  VaeConfig c = tiny_vae();
  c.hidden_dim = 64;
  c.epochs = 200;
  c.seed = 5;
  const data::LabeledDataset ds = single_mode();
  const TrainResult r = vae_train(ds, c);
  const VaeModel& m = std::get<VaeModel>(r.model.body);
  const nn::Matrix x = joint01(ds);
  const nn::Matrix mu = m.encoder.infer(x).leftCols(static_cast<Eigen::Index>(c.latent_dim));
  const nn::Matrix recon = m.decoder.infer(mu);
  EXPECT_LT(nn::bce_loss(recon, x).value, std::log(2.0));
  for (const EpochRecord& e : r.trace.epochs) {
    EXPECT_GE(e.losses.at("kl"), 0.0);
    EXPECT_TRUE(std::isfinite(e.losses.at("loss")));
  }
  ASSERT_EQ(r.trace.epochs.size(), 200u);
  EXPECT_EQ(r.trace.epochs.back().epoch, 200u);
}

TEST(Vae, ConfigValidation) {
  VaeConfig c = tiny_vae();
  c.latent_dim = c.hidden_dim;
  EXPECT_THROW(vae_train(small_benchmark(), c), Error);
}

// ---- DPGAN -----------------------------------------------------------------

TEST(DpGan, PresetsFollowPaper) {
  const DpGanConfig a = DpGanConfig::dpgan001();
  EXPECT_EQ(a.batch_size, 150u);
  EXPECT_EQ(a.latent_dim, 32u);
  EXPECT_EQ(a.dp.sigma, 0.01);
  EXPECT_EQ(a.dp.clip_norm, 0.1);
  EXPECT_EQ(a.beta1, 0.3);
  const DpGanConfig b = DpGanConfig::dpgan050();
  EXPECT_EQ(b.batch_size, 50u);
  EXPECT_EQ(b.latent_dim, 10u);
  EXPECT_EQ(b.dp.sigma, 0.5);
  EXPECT_EQ(b.dp.clip_norm, 0.05);
  EXPECT_EQ(b.beta1, 0.8);
  EXPECT_EQ(b.beta2, 0.8);
  EXPECT_EQ(b.lr, 0.002);
}

TEST(DpGan, DiscriminatorGradientsPassFiniteDifferences) {
  Rng init(4);
  DpGanModel m = make_dpgan(13, tiny_dpgan(), init);
  const nn::Matrix real = (joint01(small_benchmark(40)).topRows(6).array() * 2.0 - 1.0).matrix();
  struct R {
    double loss_value;
    nn::ParamSet grads;
  };
  const double err = check_step(m.discriminator.parameters(), [&](Rng& rng) {
    Rng noise(0);
    DiscriminatorStep s = dpgan_discriminator_step(m, real, false, rng, noise);
    return R{s.loss, std::move(s.grads)};
  }, 8);
  EXPECT_LE(err, 1e-4);
}

TEST(DpGan, GeneratorGradientsPassFiniteDifferences) {
  Rng init(5);
  DpGanModel m = make_dpgan(13, tiny_dpgan(), init);
  struct R {
    double loss_value;
    nn::ParamSet grads;
  };
  const double err = check_step(m.generator.parameters(), [&](Rng& rng) {
    GeneratorStep s = dpgan_generator_step(m, 6, rng);
    return R{s.loss, std::move(s.grads)};
  }, 9);
  EXPECT_LE(err, 1e-4);
}

TEST(DpGan, ZeroSigmaHugeClipEqualsPlainGan) {
  DpGanConfig sanitized = tiny_dpgan();
  sanitized.dp = {1e12, 0.0};
  sanitized.seed = 3;
  DpGanConfig plain = sanitized;
  plain.sanitize = false;
  const data::LabeledDataset ds = small_benchmark(120);
  const TrainResult a = dpgan_train(ds, sanitized);
  const TrainResult b = dpgan_train(ds, plain);
  const auto& ma = std::get<DpGanModel>(a.model.body);
  const auto& mb = std::get<DpGanModel>(b.model.body);
  const auto pa = ma.discriminator.parameters(), pb = mb.discriminator.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    EXPECT_LE((*pa[i] - *pb[i]).cwiseAbs().maxCoeff(), 1e-10);
  const auto ga = ma.generator.parameters(), gb = mb.generator.parameters();
  for (std::size_t i = 0; i < ga.size(); ++i)
    EXPECT_LE((*ga[i] - *gb[i]).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DpGan, ClippedNormsNeverExceedClip) {
  DpGanConfig c = tiny_dpgan();
  c.dp = {0.05, 0.5};
  std::size_t steps = 0;
  bool ok = true;
  TrainOptions opt;
  opt.observer.on_clipped_norms = [&](std::span<const double> norms) {
    ++steps;
    for (double n : norms) ok = ok && n <= c.dp.clip_norm * (1 + 1e-12);
  };
  dpgan_train(small_benchmark(200), c, opt);
  EXPECT_GT(steps, 0u);
  EXPECT_TRUE(ok);
}

TEST(DpGan, OutputIsBinaryWithoutTraining) {
  DpGanConfig c = tiny_dpgan();
  c.epochs = 0;
  const TrainResult r = dpgan_train(small_benchmark(), c);
  Rng rng(2);
  expect_binary(generate(r.model, 30, rng), 30, 12);
}

TEST(DpGan, RecoversSingleMode) {
  DpGanConfig c = DpGanConfig::dpgan001();
  c.epochs = 300;
  c.seed = 1;
  const TrainResult r = dpgan_train(single_mode(), c);
  Rng rng(3);
  const data::LabeledDataset g = generate(r.model, 1000, rng);
  std::size_t near = 0;
  for (std::size_t i = 0; i < g.size(); ++i) near += hamming_to_mode(g, i) <= 2;
  EXPECT_GE(near, 500u);
}

// ---- CTGAN -----------------------------------------------------------------

TEST(CtGan, BatchMustDivideByPac) {
  CtGanConfig c = tiny_ctgan();
  c.pac = 7;
  try {
    ctgan_train(small_benchmark(), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(CtGan, DiscriminatorSeesBatchOverPacRows) {
  const CtGanConfig c = tiny_ctgan();
  std::size_t calls = 0;
  bool ok = true;
  TrainOptions opt;
  opt.observer.on_discriminator_input = [&](std::size_t rows, std::size_t cols) {
    ++calls;
    ok = ok && rows == c.batch_size / c.pac && cols == c.pac * (13 + 2 * 13);
  };
  ctgan_train(small_benchmark(), c, opt);
  EXPECT_GT(calls, 0u);
  EXPECT_TRUE(ok);
}

TEST(CtGan, DegenerateConfigIsPlainGan) {
  CtGanConfig c = tiny_ctgan();
  c.pac = 1;
  c.n_disc_updates = 1;
  c.conditional = false;
  std::size_t cols = 0;
  TrainOptions opt;
  opt.observer.on_discriminator_input = [&](std::size_t, std::size_t k) { cols = k; };
  const TrainResult r = ctgan_train(small_benchmark(), c, opt);
  EXPECT_EQ(cols, 13u);
  const auto& m = std::get<CtGanModel>(r.model.body);
  EXPECT_EQ(ctgan_condition_width(m), 0u);
  EXPECT_EQ(m.discriminator.input_dim(), 13u);
}

TEST(CtGan, GradientsPassFiniteDifferences) {
  const nn::Matrix x = joint01(small_benchmark(80));
  Rng init(6);
  CtGanConfig c = tiny_ctgan();
  c.batch_size = 8;
  c.pac = 2;
  CtGanModel m = make_ctgan(13, c, x, init);
  const CtGanData data = ctgan_prepare(x);
  struct R {
    double loss_value;
    nn::ParamSet grads;
  };
  EXPECT_LE(check_step(m.discriminator.parameters(), [&](Rng& rng) {
              CtGanDiscriminatorStep s = ctgan_discriminator_step(m, data, rng);
              return R{s.loss, std::move(s.grads)};
            }, 10), 1e-4);
  EXPECT_LE(check_step(m.generator.parameters(), [&](Rng& rng) {
              GeneratorStep s = ctgan_generator_step(m, rng);
              return R{s.loss, std::move(s.grads)};
            }, 11), 1e-4);
}

TEST(CtGan, SamplerMatchesLogFrequencyShare) {
  // one column with frequencies 0.9 / 0.1 over N = 1000 rows
  const CategorySampler s({{900, 100}});
  const double expect = std::log(100.0 + 1) / (std::log(900.0 + 1) + std::log(100.0 + 1));
  EXPECT_NEAR(s.category_probability(0, 1), expect, 1e-15);
  Rng rng(7);
  std::size_t ones = 0;
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) ones += s.sample(rng).second;
  const double sd = std::sqrt(expect * (1 - expect) / draws);
  EXPECT_LE(std::abs(static_cast<double>(ones) / draws - expect), 4 * sd);
}

TEST(CtGan, SamplerPicksColumnsUniformly) {
  const CategorySampler s({{5, 5}, {1, 9}, {9, 1}, {0, 10}});
  Rng rng(8);
  std::array<std::size_t, 4> hits{};
  for (int i = 0; i < 40000; ++i) ++hits[s.sample(rng).first];
  for (auto h : hits) EXPECT_NEAR(static_cast<double>(h), 10000.0, 4 * std::sqrt(40000 * 0.25 * 0.75));
  EXPECT_EQ(s.category_probability(3, 0), 0.0);
}

TEST(CtGan, ConditionAdherenceOnToyData) {
  // feature 0 and label, independent, 70% ones each
  std::vector<std::uint8_t> bits, labels;
  std::mt19937_64 g(4);
  std::bernoulli_distribution b(0.7);
  for (int i = 0; i < 400; ++i) {
    bits.push_back(b(g));
    labels.push_back(b(g));
  }
  const data::LabeledDataset ds =
      data::make_dataset(data::BinaryMatrix(400, 1, std::move(bits)), std::move(labels));
  CtGanConfig c;
  c.gen_hidden = 16;
  c.disc_hidden = 32;
  c.embedding_dim = 8;
  c.batch_size = 100;
  c.pac = 10;
  c.n_disc_updates = 2;
  c.epochs = 100;
  c.seed = 2;
  const TrainResult r = ctgan_train(ds, c);
  for (std::size_t column : {0u, 1u})
    for (std::size_t cat : {0u, 1u}) {
      Rng rng(column * 2 + cat);
      const data::LabeledDataset out = generate_conditioned(r.model, 2000, column, cat, rng);
      std::size_t match = 0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint8_t v = column == 0 ? out.features.at(i, 0) : out.labels[i];
        match += v == cat;
      }
      EXPECT_GE(match, 1900u) << "column " << column << " category " << cat;
    }
}

// ---- shared contract -------------------------------------------------------

TEST(Generate, SingleRowAndSeedDeterminism) {
  const data::LabeledDataset ds = small_benchmark();
  for (const AnyConfig& cfg : {AnyConfig(tiny_vae()), AnyConfig(tiny_dpgan()), AnyConfig(tiny_ctgan())}) {
    const TrainResult r = train(ds, cfg);
    Rng one(5);
    expect_binary(generate(r.model, 1, one), 1, 12);
    Rng a(9), b(9);
    const auto x = generate(r.model, 500, a), y = generate(r.model, 500, b);
    EXPECT_EQ(x.features.bits(), y.features.bits());
    EXPECT_EQ(x.labels, y.labels);
  }
}

TEST(Train, BitReproducibleAcrossRuns) {
  const data::LabeledDataset ds = small_benchmark();
  for (const AnyConfig& cfg : {AnyConfig(tiny_vae()), AnyConfig(tiny_dpgan()), AnyConfig(tiny_ctgan())}) {
    const TrainResult a = train(ds, cfg), b = train(ds, cfg);
    same_model(a.model, b.model);
    ASSERT_EQ(a.trace.epochs.size(), b.trace.epochs.size());
    for (std::size_t i = 0; i < a.trace.epochs.size(); ++i)
      EXPECT_EQ(a.trace.epochs[i].losses, b.trace.epochs[i].losses);
  }
}

TEST(Train, EpochHookSeesEveryEpoch) {
  std::vector<std::size_t> seen;
  TrainOptions opt;
  opt.on_epoch = [&](std::size_t e, const GeneratorModel& m) -> std::optional<similarity::PrdcScores> {
    seen.push_back(e);
    EXPECT_EQ(m.width(), 13u);
    return similarity::PrdcScores{};
  };
  const TrainResult r = train(small_benchmark(), tiny_vae(), opt);
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
  for (const auto& e : r.trace.epochs) EXPECT_TRUE(e.prdc.has_value());
}

TEST(Train, RejectsSingleClassOrEmptyData) {
  const data::LabeledDataset ds =
      data::make_dataset(data::BinaryMatrix(0, 3, {}), std::vector<std::uint8_t>{});
  EXPECT_THROW(train(ds, tiny_vae()), Error);
}

TEST(Checkpoint, ReloadedModelGeneratesIdentically) {
  const data::LabeledDataset ds = small_benchmark();
  const auto dir = std::filesystem::temp_directory_path() / "synthaug_ckpt_test";
  std::filesystem::create_directories(dir);
  for (const AnyConfig& cfg : {AnyConfig(tiny_vae()), AnyConfig(tiny_dpgan()), AnyConfig(tiny_ctgan())}) {
    const TrainResult r = train(ds, cfg);
    const auto path = dir / (std::string(to_string(family_of(cfg))) + ".json");
    save_checkpoint(r.model, path);
    const GeneratorModel back = load_checkpoint(path);
    EXPECT_EQ(back.family(), r.model.family());
    EXPECT_EQ(back.feature_columns, r.model.feature_columns);
    Rng a(3), b(3);
    const auto x = generate(r.model, 2000, a), y = generate(back, 2000, b);
    EXPECT_EQ(x.features.bits(), y.features.bits());
    EXPECT_EQ(x.labels, y.labels);
  }
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, CorruptFilesAreReported) {
  const auto path = std::filesystem::temp_directory_path() / "synthaug_bad_ckpt.json";
  {
    std::ofstream(path) << "{\"format\": \"something-else\"}";
  }
  EXPECT_THROW(load_checkpoint(path), Error);
  {
    std::ofstream(path) << "{not json";
  }
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), Error);
}

TEST(Config, DefaultsByName) {
  EXPECT_EQ(family_of(default_config("vae")), Family::vae);
  EXPECT_EQ(std::get<DpGanConfig>(default_config("dpgan050")).dp.sigma, 0.5);
  EXPECT_EQ(std::get<CtGanConfig>(default_config("ctgan")).pac, 20u);
  EXPECT_THROW(default_config("gpt"), Error);
  AnyConfig c = tiny_vae();
  set_epochs(c, 7);
  EXPECT_EQ(epochs_of(c), 7u);
}
