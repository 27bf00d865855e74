#pragma once

#include <span>
#include <vector>

#include "synthaug/nn/network.hpp"

namespace synthaug::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

struct AdamState {
  std::size_t step = 0;
  ParamSet m;
  ParamSet v;
};

// Bias-corrected Adam update, in place. Moment buffers are created lazily on
// the first call.
void adam_step(std::span<Matrix* const> params, const ParamSet& grads, const AdamConfig& cfg,
               AdamState& state);

struct DpSgdConfig {
  double clip_norm = 0.1;  // per-example L2 bound
  double sigma = 0.0;      // noise multiplier
};

// Clip each example's flattened gradient to clip_norm, sum, add
// N(0, (sigma * clip_norm)^2) per coordinate and divide by the example count.
// post_clip_norms, when given, receives each example's norm after clipping.
ParamSet dp_sanitize(std::span<const ParamSet> per_example, const DpSgdConfig& cfg, Rng& noise_rng,
                     std::vector<double>* post_clip_norms = nullptr);

struct SanitizedGradient {
  ParamSet grads;
  std::vector<double> norms;          // before clipping
  std::vector<double> clipped_norms;  // after clipping
};

// Same result as dp_sanitize(net.backward_per_example(tape, grad_sum), ...)
// without materializing one gradient set per example. grad_sum row i is the
// gradient of example i's loss (sum reduction). Noise is drawn in the same
// order, so both routes agree for a shared seed.
SanitizedGradient sanitized_backward(const Network& net, const Tape& tape, const Matrix& grad_sum,
                                     const DpSgdConfig& cfg, Rng& noise_rng);

// min(1, clip / norm); 1 for a zero gradient.
double clip_factor(double norm, double clip_norm) noexcept;

}  // namespace synthaug::nn
