#pragma once

// Single-step loss/gradient entry points behind the training loops. Each call
// is a pure function of (model parameters, inputs, rng state), so replaying an
// rng seed replays dropout masks and noise draws exactly.

#include <array>
#include <cstddef>
#include <vector>

#include "synthaug/generators/model.hpp"

namespace synthaug::gen {

// ---- VAE -----------------------------------------------------------------

VaeModel make_vae(std::size_t width, const VaeConfig& cfg, Rng& init_rng);
// Encoder parameters followed by decoder parameters.
std::vector<nn::Matrix*> vae_parameters(VaeModel& model);

struct VaeLoss {
  double total = 0.0;
  double reconstruction = 0.0;  // BCE summed over columns, averaged over rows
  double kl = 0.0;
  nn::ParamSet grads;  // vae_parameters() order
};

VaeLoss vae_loss_and_grads(VaeModel& model, const nn::Matrix& batch01, Rng& rng);

// ---- DPGAN ---------------------------------------------------------------

DpGanModel make_dpgan(std::size_t width, const DpGanConfig& cfg, Rng& init_rng);

struct DiscriminatorStep {
  double loss = 0.0;
  nn::ParamSet grads;
  std::vector<double> clipped_norms;  // empty when not sanitized
  bool saturated = false;             // every output within 1e-6 of 0 or 1
};

// Discriminator BCE on [real; fake] with real rows in {-1,+1}. Each of the
// 2B rows is one example for clipping. noise_rng is only read when sanitize
// is set.
DiscriminatorStep dpgan_discriminator_step(DpGanModel& model, const nn::Matrix& real_pm1,
                                           bool sanitize, Rng& rng, Rng& noise_rng);

struct GeneratorStep {
  double loss = 0.0;
  double condition_loss = 0.0;
  nn::ParamSet grads;
};

// Non-saturating generator loss -log D(G(z)) over `rows` samples.
GeneratorStep dpgan_generator_step(DpGanModel& model, std::size_t rows, Rng& rng);

// ---- CTGAN ---------------------------------------------------------------

CtGanModel make_ctgan(std::size_t width, const CtGanConfig& cfg, const nn::Matrix& data01,
                      Rng& init_rng);

// Training rows indexed by (column, category) for conditional real sampling.
struct CtGanData {
  nn::Matrix rows;
  std::vector<std::array<std::vector<std::size_t>, 2>> by_category;
};

CtGanData ctgan_prepare(const nn::Matrix& data01);

std::size_t ctgan_condition_width(const CtGanModel& model) noexcept;

struct CtGanDiscriminatorStep {
  double loss = 0.0;
  nn::ParamSet grads;
  std::size_t input_rows = 0;
  std::size_t input_cols = 0;
};

CtGanDiscriminatorStep ctgan_discriminator_step(CtGanModel& model, const CtGanData& data,
                                                Rng& rng);
GeneratorStep ctgan_generator_step(CtGanModel& model, Rng& rng);

}  // namespace synthaug::gen
