#include "synthaug/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "synthaug/error.hpp"

namespace synthaug::nn {

LossValue bce_loss(const Matrix& predictions, const Matrix& targets, Reduction reduction) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    throw Error(ErrorCode::dimension_mismatch, "bce_loss: prediction and target shapes differ");
  require_finite(predictions, "bce_loss predictions");
  const double scale = reduction == Reduction::mean && predictions.size() > 0
                           ? 1.0 / static_cast<double>(predictions.size())
                           : 1.0;
  LossValue out;
  out.grad.resize(predictions.rows(), predictions.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    const double y = targets.data()[i];
    if (y != 0.0 && y != 1.0)
      throw Error(ErrorCode::invalid_argument, "bce_loss: targets must be 0 or 1");
    const double p = std::clamp(predictions.data()[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= y == 1.0 ? std::log(p) : std::log1p(-p);
    out.grad.data()[i] = scale * (p - y) / (p * (1.0 - p));
  }
  out.value = total * scale;
  return out;
}

KlValue gaussian_kl(const Matrix& mu, const Matrix& logvar) {
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols())
    throw Error(ErrorCode::dimension_mismatch, "gaussian_kl: mu and logvar shapes differ");
  const double inv_batch = mu.rows() > 0 ? 1.0 / static_cast<double>(mu.rows()) : 0.0;
  const auto var = logvar.array().exp();
  KlValue out;
  out.value = 0.5 * inv_batch * (mu.array().square() + var - 1.0 - logvar.array()).sum();
  out.grad_mu = inv_batch * mu;
  out.grad_logvar = (0.5 * inv_batch * (var - 1.0)).matrix();
  if (!std::isfinite(out.value)) throw Error(ErrorCode::non_finite, "gaussian_kl: non-finite value");
  return out;
}

}  // namespace synthaug::nn
