#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "alloc.hpp"
#include "generators/internal.hpp"
#include "synthaug/error.hpp"
#include "synthaug/generators/trainers.hpp"
#include "synthaug/nn/loss.hpp"

namespace synthaug::gen {

namespace {

constexpr double kSaturationBand = 1e-6;

void check_config(const DpGanConfig& cfg) {
  if (cfg.latent_dim == 0 || cfg.batch_size == 0)
    throw Error(ErrorCode::invalid_argument, "dpgan: latent_dim and batch_size must be > 0");
  if (cfg.generator_blocks.empty() || cfg.discriminator_hidden.empty())
    throw Error(ErrorCode::invalid_argument, "dpgan: empty architecture");
  if (!(cfg.dp.clip_norm > 0.0) || cfg.dp.sigma < 0.0)
    throw Error(ErrorCode::invalid_argument, "dpgan: need clip_norm > 0 and sigma >= 0");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
    throw Error(ErrorCode::invalid_argument, "dpgan: dropout_rate must be in [0, 1)");
}

nn::Matrix targets(Eigen::Index ones, Eigen::Index zeros) {
  nn::Matrix t(ones + zeros, 1);
  t.topRows(ones).setOnes();
  t.bottomRows(zeros).setZero();
  return t;
}

}  // namespace

DpGanModel make_dpgan(std::size_t width, const DpGanConfig& cfg, Rng& init_rng) {
  check_config(cfg);
  DpGanModel m{cfg, nn::Network(cfg.latent_dim), nn::Network(width)};
  for (std::size_t w : cfg.generator_blocks)
    m.generator.linear(w, init_rng)
        .dropout(cfg.dropout_rate)
        .batch_norm()
        .activation(nn::Activation::relu);
  m.generator.linear(width, init_rng).activation(nn::Activation::tanh);
  for (std::size_t i = 0; i < cfg.discriminator_hidden.size(); ++i) {
    m.discriminator.linear(cfg.discriminator_hidden[i], init_rng);
    if (i > 0) m.discriminator.dropout(cfg.dropout_rate);
    m.discriminator.activation(nn::Activation::relu);
  }
  m.discriminator.linear(1, init_rng).activation(nn::Activation::sigmoid);
  return m;
}

DiscriminatorStep dpgan_discriminator_step(DpGanModel& model, const nn::Matrix& real_pm1,
                                           bool sanitize, Rng& rng, Rng& noise_rng) {
  const Eigen::Index b = real_pm1.rows();
  nn::Matrix z(b, static_cast<Eigen::Index>(model.config.latent_dim));
  fill_normal(z, rng);
  const nn::ForwardResult fake = model.generator.forward(z, nn::Mode::train, rng);
  nn::Matrix input(2 * b, real_pm1.cols());
  input << real_pm1, fake.output;
  const nn::ForwardResult d = model.discriminator.forward(input, nn::Mode::train, rng);
  const nn::Matrix t = targets(b, b);

  DiscriminatorStep out;
  if (sanitize) {
    const nn::LossValue l = nn::bce_loss(d.output, t, nn::Reduction::sum);
    out.loss = l.value / static_cast<double>(2 * b);
    nn::SanitizedGradient sg =
        nn::sanitized_backward(model.discriminator, d.tape, l.grad, model.config.dp, noise_rng);
    out.grads = std::move(sg.grads);
    out.clipped_norms = std::move(sg.clipped_norms);
  } else {
    const nn::LossValue l = nn::bce_loss(d.output, t, nn::Reduction::mean);
    out.loss = l.value;
    out.grads = model.discriminator.backward(d.tape, l.grad).params;
  }
  out.saturated = (d.output.array().min(1.0 - d.output.array()) < kSaturationBand).all();
  return out;
}

GeneratorStep dpgan_generator_step(DpGanModel& model, std::size_t rows, Rng& rng) {
  const auto b = static_cast<Eigen::Index>(rows);
  nn::Matrix z(b, static_cast<Eigen::Index>(model.config.latent_dim));
  fill_normal(z, rng);
  const nn::ForwardResult fake = model.generator.forward(z, nn::Mode::train, rng);
  const nn::ForwardResult d = model.discriminator.forward(fake.output, nn::Mode::train, rng);
  const nn::LossValue l = nn::bce_loss(d.output, targets(b, 0), nn::Reduction::mean);
  const nn::Gradients dg = model.discriminator.backward(d.tape, l.grad);
  GeneratorStep out;
  out.loss = l.value;
  out.grads = model.generator.backward(fake.tape, dg.input).params;
  return out;
}

TrainResult dpgan_train(const data::LabeledDataset& data, const DpGanConfig& cfg,
                        const TrainOptions& options) {
  tune_allocator();
  detail::require_trainable(data);
  check_config(cfg);
  const nn::Matrix x = (data::joint_matrix(data).array() * 2.0 - 1.0).matrix();
  Rng init_rng = make_rng(derive_seed(cfg.seed, {stage_id("dpgan/init")}));
  Rng rng = make_rng(derive_seed(cfg.seed, {stage_id("dpgan/train")}));
  Rng noise_rng = make_rng(derive_seed(cfg.seed, {stage_id("dpgan/dp-noise")}));

  TrainResult result{GeneratorModel{data.features.columns(),
                                    make_dpgan(static_cast<std::size_t>(x.cols()), cfg, init_rng)},
                     {}};
  auto& model = std::get<DpGanModel>(result.model.body);
  const std::vector<nn::Matrix*> d_params = model.discriminator.parameters();
  const std::vector<nn::Matrix*> g_params = model.generator.parameters();
  const nn::AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2};
  nn::AdamState d_state;
  nn::AdamState g_state;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double d_loss = 0.0;
    double g_loss = 0.0;
    std::size_t batch_no = 0;
    bool saturated_reported = false;
    const auto ranges = detail::batch_ranges(order.size(), cfg.batch_size, true);
    for (const auto& [lo, hi] : ranges) {
      ++batch_no;
      const nn::Matrix real = detail::gather_rows(x, order.data() + lo, hi - lo);
      try {
        const DiscriminatorStep ds =
            dpgan_discriminator_step(model, real, cfg.sanitize, rng, noise_rng);
        if (!std::isfinite(ds.loss))
          throw Error(ErrorCode::non_finite, "discriminator loss is not finite");
        if (cfg.sanitize && options.observer.on_clipped_norms)
          options.observer.on_clipped_norms(ds.clipped_norms);
        adam_step(d_params, ds.grads, adam, d_state);
        const GeneratorStep gs = dpgan_generator_step(model, hi - lo, rng);
        if (!std::isfinite(gs.loss))
          throw Error(ErrorCode::non_finite, "generator loss is not finite");
        adam_step(g_params, gs.grads, adam, g_state);
        d_loss += ds.loss;
        g_loss += gs.loss;
        if (ds.saturated && !saturated_reported) {
          result.trace.events.push_back("epoch " + std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_no) +
                                        ": discriminator saturated");
          saturated_reported = true;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::non_finite) throw;
        detail::rethrow_at(e, epoch, batch_no);
      }
    }
    const double steps = static_cast<double>(ranges.size());
    detail::finish_epoch(result.trace,
                         EpochRecord{epoch, {{"d_loss", d_loss / steps}, {"g_loss", g_loss / steps}}, {}},
                         options, result.model);
  }
  return result;
}

}  // namespace synthaug::gen
