#include "synthaug/nn/optim.hpp"

#include <cmath>

#include "synthaug/error.hpp"

namespace synthaug::nn {

namespace {

void add_noise(ParamSet& grads, double stddev, Rng& rng) {
  if (stddev == 0.0) return;
  std::normal_distribution<double> normal(0.0, stddev);
  for (auto& m : grads)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += normal(rng);
}

void check_dp_config(const DpSgdConfig& cfg) {
  if (!(cfg.clip_norm > 0.0))
    throw Error(ErrorCode::invalid_argument, "dp clip_norm must be positive");
  if (!(cfg.sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "dp sigma must be >= 0");
}

}  // namespace

void adam_step(std::span<Matrix* const> params, const ParamSet& grads, const AdamConfig& cfg,
               AdamState& state) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::dimension_mismatch, "adam_step: parameter/gradient count differs");
  if (state.m.empty()) {
    for (const Matrix* p : params) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i]->rows() || grads[i].cols() != params[i]->cols())
      throw Error(ErrorCode::dimension_mismatch, "adam_step: gradient shape differs from parameter");
    require_finite(grads[i], "adam_step gradients");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    Matrix g = grads[i];
    if (cfg.weight_decay != 0.0) g += cfg.weight_decay * p;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    p.array() -= cfg.lr * (state.m[i].array() / bc1) /
                 ((state.v[i].array() / bc2).sqrt() + cfg.epsilon);
  }
}

double clip_factor(double norm, double clip_norm) noexcept {
  return norm > clip_norm ? clip_norm / norm : 1.0;
}

ParamSet dp_sanitize(std::span<const ParamSet> per_example, const DpSgdConfig& cfg, Rng& noise_rng,
                     std::vector<double>* post_clip_norms) {
  check_dp_config(cfg);
  if (per_example.empty())
    throw Error(ErrorCode::invalid_argument, "dp_sanitize: need at least one example gradient");
  ParamSet sum;
  for (const auto& m : per_example.front()) sum.push_back(Matrix::Zero(m.rows(), m.cols()));
  if (post_clip_norms) post_clip_norms->clear();
  for (const ParamSet& ex : per_example) {
    if (ex.size() != sum.size())
      throw Error(ErrorCode::dimension_mismatch, "dp_sanitize: inconsistent gradient sets");
    const double factor = clip_factor(std::sqrt(squared_norm(ex)), cfg.clip_norm);
    double clipped_sq = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const Matrix clipped = factor * ex[i];
      clipped_sq += clipped.squaredNorm();
      sum[i] += clipped;
    }
    if (post_clip_norms) post_clip_norms->push_back(std::sqrt(clipped_sq));
  }
  add_noise(sum, cfg.sigma * cfg.clip_norm, noise_rng);
  const double inv_n = 1.0 / static_cast<double>(per_example.size());
  for (auto& m : sum) m *= inv_n;
  return sum;
}

SanitizedGradient sanitized_backward(const Network& net, const Tape& tape, const Matrix& grad_sum,
                                     const DpSgdConfig& cfg, Rng& noise_rng) {
  check_dp_config(cfg);
  if (grad_sum.rows() == 0)
    throw Error(ErrorCode::invalid_argument, "sanitized_backward: empty batch");
  SanitizedGradient out;
  out.norms = net.per_example_grad_norms(tape, grad_sum);
  Eigen::VectorXd factors(grad_sum.rows());
  out.clipped_norms.resize(out.norms.size());
  for (std::size_t i = 0; i < out.norms.size(); ++i) {
    factors[static_cast<Eigen::Index>(i)] = clip_factor(out.norms[i], cfg.clip_norm);
    out.clipped_norms[i] = factors[static_cast<Eigen::Index>(i)] * out.norms[i];
  }
  // Example gradients are linear in their own output-gradient row, so scaling
  // rows before one batched backward yields the sum of clipped gradients.
  const Matrix scaled = factors.asDiagonal() * grad_sum;
  out.grads = net.backward(tape, scaled).params;
  add_noise(out.grads, cfg.sigma * cfg.clip_norm, noise_rng);
  const double inv_n = 1.0 / static_cast<double>(grad_sum.rows());
  for (auto& m : out.grads) m *= inv_n;
  return out;
}

}  // namespace synthaug::nn
