#include "synthaug/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "synthaug/error.hpp"

namespace synthaug::nn {

double max_relative_error(std::span<Matrix* const> params, const ParamSet& analytic,
                          const std::function<double()>& loss, double h) {
  if (params.size() != analytic.size())
    throw Error(ErrorCode::dimension_mismatch, "grad check: parameter/gradient count differs");
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& m = *params[p];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      m.data()[i] = saved + h;
      const double up = loss();
      m.data()[i] = saved - h;
      const double down = loss();
      m.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kRelativeErrorFloor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

double grad_check(Network& net, const Matrix& input, const OutputLoss& loss, double h,
                  std::uint64_t seed) {
  auto evaluate = [&] {
    Rng rng(seed);
    return net.forward(input, Mode::train, rng);
  };
  ForwardResult fwd = evaluate();
  const ParamSet analytic = net.backward(fwd.tape, loss(fwd.output).grad).params;
  auto params = net.parameters();
  return max_relative_error(params, analytic, [&] { return loss(evaluate().output).value; }, h);
}

}  // namespace synthaug::nn
