#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "synthaug/nn/loss.hpp"

namespace synthaug::nn {

// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
// exactly-zero gradients from dividing by zero.
inline constexpr double kRelativeErrorFloor = 1e-6;

// Central differences of `loss` with respect to every entry of `params`,
// compared against `analytic`. `loss` must be deterministic across calls.
double max_relative_error(std::span<Matrix* const> params, const ParamSet& analytic,
                          const std::function<double()>& loss, double h = 1e-5);

using OutputLoss = std::function<LossValue(const Matrix& output)>;

// Checks Network::backward for loss(net(input)) in train mode, replaying the
// same dropout masks for every evaluation via `seed`.
double grad_check(Network& net, const Matrix& input, const OutputLoss& loss, double h = 1e-5,
                  std::uint64_t seed = 0);

}  // namespace synthaug::nn
