#include <algorithm>
#include <cmath>
#include <numeric>

#include "alloc.hpp"
#include "generators/internal.hpp"
#include "synthaug/error.hpp"
#include "synthaug/generators/trainers.hpp"
#include "synthaug/nn/loss.hpp"

namespace synthaug::gen {

namespace {

void check_config(const VaeConfig& cfg) {
  if (cfg.latent_dim == 0 || cfg.latent_dim >= cfg.hidden_dim)
    throw Error(ErrorCode::invalid_argument, "vae: need 0 < latent_dim < hidden_dim");
  if (cfg.batch_size == 0) throw Error(ErrorCode::invalid_argument, "vae: batch_size must be > 0");
  if (!(cfg.lr > 0.0)) throw Error(ErrorCode::invalid_argument, "vae: lr must be > 0");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
    throw Error(ErrorCode::invalid_argument, "vae: dropout_rate must be in [0, 1)");
}

}  // namespace

VaeModel make_vae(std::size_t width, const VaeConfig& cfg, Rng& init_rng) {
  check_config(cfg);
  VaeModel m{cfg, nn::Network(width), nn::Network(cfg.latent_dim)};
  m.encoder.linear(cfg.hidden_dim, init_rng)
      .activation(nn::Activation::relu)
      .dropout(cfg.dropout_rate)
      .linear(cfg.hidden_dim, init_rng)
      .activation(nn::Activation::relu)
      .linear(2 * cfg.latent_dim, init_rng);
  m.decoder.linear(cfg.hidden_dim, init_rng)
      .activation(nn::Activation::relu)
      .dropout(cfg.dropout_rate)
      .linear(cfg.hidden_dim, init_rng)
      .activation(nn::Activation::relu)
      .linear(width, init_rng)
      .activation(nn::Activation::sigmoid);
  return m;
}

std::vector<nn::Matrix*> vae_parameters(VaeModel& model) {
  std::vector<nn::Matrix*> p = model.encoder.parameters();
  for (nn::Matrix* q : model.decoder.parameters()) p.push_back(q);
  return p;
}

VaeLoss vae_loss_and_grads(VaeModel& model, const nn::Matrix& batch01, Rng& rng) {
  const auto z = static_cast<Eigen::Index>(model.config.latent_dim);
  const double rows = static_cast<double>(batch01.rows());

  nn::ForwardResult enc = model.encoder.forward(batch01, nn::Mode::train, rng);
  const nn::Matrix mu = enc.output.leftCols(z);
  const nn::Matrix logvar = enc.output.rightCols(z);
  nn::Matrix eps(batch01.rows(), z);
  fill_normal(eps, rng);
  const nn::Matrix std_dev = (0.5 * logvar.array()).exp().matrix();
  const nn::Matrix latent = mu + eps.cwiseProduct(std_dev);

  nn::ForwardResult dec = model.decoder.forward(latent, nn::Mode::train, rng);
  nn::LossValue recon = nn::bce_loss(dec.output, batch01, nn::Reduction::sum);
  recon.value /= rows;
  recon.grad /= rows;
  const nn::KlValue kl = nn::gaussian_kl(mu, logvar);

  nn::Gradients dg = model.decoder.backward(dec.tape, recon.grad);
  nn::Matrix g_enc(batch01.rows(), 2 * z);
  g_enc.leftCols(z) = dg.input + kl.grad_mu;
  g_enc.rightCols(z) =
      (dg.input.cwiseProduct(eps).cwiseProduct(std_dev) * 0.5) + kl.grad_logvar;
  nn::Gradients eg = model.encoder.backward(enc.tape, g_enc);

  VaeLoss out;
  out.reconstruction = recon.value;
  out.kl = kl.value;
  out.total = recon.value + kl.value;
  out.grads = std::move(eg.params);
  for (auto& g : dg.params) out.grads.push_back(std::move(g));
  return out;
}

TrainResult vae_train(const data::LabeledDataset& data, const VaeConfig& cfg,
                      const TrainOptions& options) {
  tune_allocator();
  detail::require_trainable(data);
  check_config(cfg);
  const nn::Matrix x = data::joint_matrix(data);
  Rng init_rng = make_rng(derive_seed(cfg.seed, {stage_id("vae/init")}));
  Rng rng = make_rng(derive_seed(cfg.seed, {stage_id("vae/train")}));

  TrainResult result{GeneratorModel{data.features.columns(),
                                    make_vae(static_cast<std::size_t>(x.cols()), cfg, init_rng)},
                     {}};
  auto& model = std::get<VaeModel>(result.model.body);
  const std::vector<nn::Matrix*> params = vae_parameters(model);
  const nn::AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2};
  nn::AdamState state;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
    std::size_t batch_no = 0;
    for (const auto& [lo, hi] : detail::batch_ranges(order.size(), cfg.batch_size, false)) {
      ++batch_no;
      const nn::Matrix batch = detail::gather_rows(x, order.data() + lo, hi - lo);
      VaeLoss loss;
      try {
        loss = vae_loss_and_grads(model, batch, rng);
        if (!std::isfinite(loss.total))
          throw Error(ErrorCode::non_finite, "vae loss is not finite");
        adam_step(params, loss.grads, adam, state);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::non_finite) throw;
        detail::rethrow_at(e, epoch, batch_no);
      }
      const double w = static_cast<double>(hi - lo) / static_cast<double>(order.size());
      total += w * loss.total;
      recon += w * loss.reconstruction;
      kl += w * loss.kl;
    }
    detail::finish_epoch(result.trace,
                         EpochRecord{epoch, {{"loss", total}, {"reconstruction", recon}, {"kl", kl}}, {}},
                         options, result.model);
  }
  return result;
}

}  // namespace synthaug::gen
