#pragma once

#include "synthaug/nn/network.hpp"

namespace synthaug::nn {

inline constexpr double kProbabilityClamp = 1e-7;

enum class Reduction { mean, sum };

struct LossValue {
  double value = 0.0;
  Matrix grad;  // d(value)/d(input)
};

// Binary cross-entropy of probabilities against {0,1} targets. Predictions are
// clamped to [1e-7, 1 - 1e-7]; the gradient is evaluated at the clamped point.
LossValue bce_loss(const Matrix& predictions, const Matrix& targets,
                   Reduction reduction = Reduction::mean);

struct KlValue {
  double value = 0.0;
  Matrix grad_mu;
  Matrix grad_logvar;
};

// KL(N(mu, exp(logvar)) || N(0, I)), summed over dimensions and averaged over
// the batch.
KlValue gaussian_kl(const Matrix& mu, const Matrix& logvar);

}  // namespace synthaug::nn
