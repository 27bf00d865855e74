#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "alloc.hpp"
#include "generators/internal.hpp"
#include "synthaug/error.hpp"
#include "synthaug/generators/trainers.hpp"
#include "synthaug/nn/loss.hpp"

namespace synthaug::gen {

namespace {

using detail::Condition;

void check_config(const CtGanConfig& cfg) {
  if (cfg.batch_size == 0 || cfg.pac == 0 || cfg.batch_size % cfg.pac != 0)
    throw Error(ErrorCode::invalid_argument, "ctgan: batch_size must be a positive multiple of pac");
  if (cfg.embedding_dim == 0 || cfg.gen_hidden == 0 || cfg.disc_hidden == 0)
    throw Error(ErrorCode::invalid_argument, "ctgan: layer widths must be > 0");
  if (cfg.n_disc_updates == 0)
    throw Error(ErrorCode::invalid_argument, "ctgan: n_disc_updates must be > 0");
  if (!(cfg.gumbel_tau > 0.0)) throw Error(ErrorCode::invalid_argument, "ctgan: gumbel_tau must be > 0");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
    throw Error(ErrorCode::invalid_argument, "ctgan: dropout_rate must be in [0, 1)");
}

// Generator pass with gumbel-softmax relaxation. value(i, j) is the relaxed
// probability of category 1 in column j.
struct Relaxed {
  nn::ForwardResult gen;
  nn::Matrix value;
  std::vector<Condition> conds;
  nn::Matrix cond;  // empty for unconditional models
};

Relaxed relaxed_sample(CtGanModel& model, std::size_t columns, Rng& rng) {
  const auto b = static_cast<Eigen::Index>(model.config.batch_size);
  const auto d = static_cast<Eigen::Index>(columns);
  Relaxed r;
  if (model.config.conditional) {
    r.conds.resize(model.config.batch_size);
    for (auto& c : r.conds) c = model.sampler.sample(rng);
    r.cond = detail::condition_matrix(r.conds, columns);
  }
  nn::Matrix noise(b, static_cast<Eigen::Index>(model.config.embedding_dim));
  fill_normal(noise, rng);
  r.gen = model.generator.forward(detail::ctgan_generator_input(model, noise, r.cond),
                                  nn::Mode::train, rng);
  std::uniform_real_distribution<double> u(std::numeric_limits<double>::min(), 1.0);
  const auto gumbel = [&] { return -std::log(-std::log(u(rng))); };
  r.value.resize(b, d);
  const double tau = model.config.gumbel_tau;
  for (Eigen::Index i = 0; i < b; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double g0 = gumbel();
      const double g1 = gumbel();
      const double diff = (r.gen.output(i, 2 * j + 1) + g1 - r.gen.output(i, 2 * j) - g0) / tau;
      r.value(i, j) = 1.0 / (1.0 + std::exp(-diff));
    }
  return r;
}

// Appends the condition block and packs `pac` consecutive rows into one.
nn::Matrix pack(const nn::Matrix& values, const nn::Matrix& cond, std::size_t pac) {
  nn::Matrix rows(values.rows(), values.cols() + cond.cols());
  rows.leftCols(values.cols()) = values;
  if (cond.cols() > 0) rows.rightCols(cond.cols()) = cond;
  const auto p = static_cast<Eigen::Index>(pac);
  return Eigen::Map<const nn::Matrix>(rows.data(), rows.rows() / p, rows.cols() * p);
}

nn::Matrix unpack(const nn::Matrix& packed, Eigen::Index rows) {
  return Eigen::Map<const nn::Matrix>(packed.data(), rows, packed.size() / rows);
}

nn::Matrix constant(Eigen::Index rows, double v) { return nn::Matrix::Constant(rows, 1, v); }

void accumulate(nn::ParamSet& into, const nn::ParamSet& g) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += g[i];
}

}  // namespace

CtGanModel make_ctgan(std::size_t width, const CtGanConfig& cfg, const nn::Matrix& data01,
                      Rng& init_rng) {
  check_config(cfg);
  if (static_cast<std::size_t>(data01.cols()) != width)
    throw Error(ErrorCode::dimension_mismatch, "ctgan: data width does not match model width");
  const std::size_t cond_w = cfg.conditional ? 2 * width : 0;
  CtGanModel m{cfg, nn::Network(cfg.embedding_dim + cond_w),
               nn::Network(cfg.pac * (width + cond_w)), CategorySampler::fit(data01)};
  for (std::size_t i = 0; i < cfg.gen_layers; ++i) m.generator.residual(cfg.gen_hidden, init_rng);
  m.generator.linear(2 * width, init_rng);
  for (std::size_t i = 0; i < cfg.disc_layers; ++i)
    m.discriminator.linear(cfg.disc_hidden, init_rng)
        .activation(nn::Activation::relu)
        .dropout(cfg.dropout_rate);
  m.discriminator.linear(1, init_rng).activation(nn::Activation::sigmoid);
  return m;
}

CtGanData ctgan_prepare(const nn::Matrix& data01) {
  CtGanData d{data01, std::vector<std::array<std::vector<std::size_t>, 2>>(
                          static_cast<std::size_t>(data01.cols()))};
  for (Eigen::Index r = 0; r < data01.rows(); ++r)
    for (Eigen::Index c = 0; c < data01.cols(); ++c)
      d.by_category[static_cast<std::size_t>(c)][data01(r, c) > 0.5 ? 1 : 0].push_back(
          static_cast<std::size_t>(r));
  return d;
}

std::size_t ctgan_condition_width(const CtGanModel& model) noexcept {
  return model.config.conditional ? model.sampler.columns() * 2 : 0;
}

CtGanDiscriminatorStep ctgan_discriminator_step(CtGanModel& model, const CtGanData& data,
                                                Rng& rng) {
  const std::size_t columns = data.by_category.size();
  const std::size_t b = model.config.batch_size;
  const Relaxed fake = relaxed_sample(model, columns, rng);

  // Real rows follow a permutation of the fake conditions.
  std::vector<std::size_t> rows(b);
  nn::Matrix real_cond;
  if (model.config.conditional) {
    std::vector<std::size_t> perm(b);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Condition> permuted(b);
    for (std::size_t i = 0; i < b; ++i) {
      permuted[i] = fake.conds[perm[i]];
      const auto& pool = data.by_category[permuted[i].first][permuted[i].second];
      rows[i] = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    }
    real_cond = detail::condition_matrix(permuted, columns);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(data.rows.rows()) - 1);
    for (auto& r : rows) r = pick(rng);
  }
  const nn::Matrix real = detail::gather_rows(data.rows, rows.data(), b);

  const std::size_t pac = model.config.pac;
  const nn::Matrix real_in = pack(real, real_cond, pac);
  const nn::Matrix fake_in = pack(fake.value, fake.cond, pac);
  const nn::ForwardResult dr = model.discriminator.forward(real_in, nn::Mode::train, rng);
  const nn::ForwardResult df = model.discriminator.forward(fake_in, nn::Mode::train, rng);
  const nn::LossValue lr = nn::bce_loss(dr.output, constant(dr.output.rows(), 1.0));
  const nn::LossValue lf = nn::bce_loss(df.output, constant(df.output.rows(), 0.0));

  CtGanDiscriminatorStep out;
  out.loss = lr.value + lf.value;
  out.grads = model.discriminator.backward(dr.tape, lr.grad).params;
  accumulate(out.grads, model.discriminator.backward(df.tape, lf.grad).params);
  out.input_rows = static_cast<std::size_t>(real_in.rows());
  out.input_cols = static_cast<std::size_t>(real_in.cols());
  return out;
}

GeneratorStep ctgan_generator_step(CtGanModel& model, Rng& rng) {
  const std::size_t columns = model.sampler.columns();
  const auto b = static_cast<Eigen::Index>(model.config.batch_size);
  const auto d = static_cast<Eigen::Index>(columns);
  const Relaxed fake = relaxed_sample(model, columns, rng);
  const nn::Matrix fake_in = pack(fake.value, fake.cond, model.config.pac);
  const nn::ForwardResult df = model.discriminator.forward(fake_in, nn::Mode::train, rng);
  const nn::LossValue l = nn::bce_loss(df.output, constant(df.output.rows(), 1.0));
  const nn::Matrix g_in = unpack(model.discriminator.backward(df.tape, l.grad).input, b);

  const nn::Matrix& logits = fake.gen.output;
  const double tau = model.config.gumbel_tau;
  nn::Matrix g_logits(b, 2 * d);
  for (Eigen::Index i = 0; i < b; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double y = fake.value(i, j);
      const double g = g_in(i, j) * y * (1.0 - y) / tau;
      g_logits(i, 2 * j) = -g;
      g_logits(i, 2 * j + 1) = g;
    }

  GeneratorStep out;
  out.loss = l.value;
  if (model.config.conditional) {
    double ce = 0.0;
    const double scale = 1.0 / static_cast<double>(b);
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto [col, cat] = fake.conds[static_cast<std::size_t>(i)];
      const auto j = static_cast<Eigen::Index>(col);
      const double l0 = logits(i, 2 * j);
      const double l1 = logits(i, 2 * j + 1);
      const double m = std::max(l0, l1);
      const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
      ce += lse - (cat == 1 ? l1 : l0);
      const double p1 = std::exp(l1 - lse);
      g_logits(i, 2 * j) += scale * ((1.0 - p1) - (cat == 0 ? 1.0 : 0.0));
      g_logits(i, 2 * j + 1) += scale * (p1 - (cat == 1 ? 1.0 : 0.0));
    }
    out.condition_loss = ce * scale;
    out.loss += out.condition_loss;
  }
  out.grads = model.generator.backward(fake.gen.tape, g_logits).params;
  return out;
}

TrainResult ctgan_train(const data::LabeledDataset& data, const CtGanConfig& cfg,
                        const TrainOptions& options) {
  tune_allocator();
  detail::require_trainable(data);
  check_config(cfg);
  const nn::Matrix x = data::joint_matrix(data);
  Rng init_rng = make_rng(derive_seed(cfg.seed, {stage_id("ctgan/init")}));
  Rng rng = make_rng(derive_seed(cfg.seed, {stage_id("ctgan/train")}));

  TrainResult result{
      GeneratorModel{data.features.columns(),
                     make_ctgan(static_cast<std::size_t>(x.cols()), cfg, x, init_rng)},
      {}};
  auto& model = std::get<CtGanModel>(result.model.body);
  const CtGanData prepared = ctgan_prepare(x);
  const std::vector<nn::Matrix*> d_params = model.discriminator.parameters();
  const std::vector<nn::Matrix*> g_params = model.generator.parameters();
  const nn::AdamConfig d_adam{cfg.disc_lr, cfg.beta1, cfg.beta2, 1e-8, cfg.disc_weight_decay};
  const nn::AdamConfig g_adam{cfg.gen_lr, cfg.beta1, cfg.beta2, 1e-8, cfg.gen_weight_decay};
  nn::AdamState d_state;
  nn::AdamState g_state;

  const std::size_t steps = std::max<std::size_t>(1, data.size() / cfg.batch_size);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double d_loss = 0.0;
    double g_loss = 0.0;
    double cond_loss = 0.0;
    for (std::size_t step = 1; step <= steps; ++step) {
      try {
        for (std::size_t k = 0; k < cfg.n_disc_updates; ++k) {
          const CtGanDiscriminatorStep ds = ctgan_discriminator_step(model, prepared, rng);
          if (!std::isfinite(ds.loss))
            throw Error(ErrorCode::non_finite, "discriminator loss is not finite");
          if (options.observer.on_discriminator_input)
            options.observer.on_discriminator_input(ds.input_rows, ds.input_cols);
          adam_step(d_params, ds.grads, d_adam, d_state);
          d_loss += ds.loss / static_cast<double>(cfg.n_disc_updates);
        }
        const GeneratorStep gs = ctgan_generator_step(model, rng);
        if (!std::isfinite(gs.loss))
          throw Error(ErrorCode::non_finite, "generator loss is not finite");
        adam_step(g_params, gs.grads, g_adam, g_state);
        g_loss += gs.loss;
        cond_loss += gs.condition_loss;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::non_finite) throw;
        detail::rethrow_at(e, epoch, step);
      }
    }
    const double n = static_cast<double>(steps);
    detail::finish_epoch(
        result.trace,
        EpochRecord{epoch,
                    {{"d_loss", d_loss / n}, {"g_loss", g_loss / n}, {"cond_ce", cond_loss / n}},
                    {}},
        options, result.model);
  }
  return result;
}

}  // namespace synthaug::gen
