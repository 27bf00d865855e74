#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "synthaug/rng.hpp"

namespace synthaug::nn {

// Row-major dense matrix of doubles. Rows are samples.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One tensor per trainable parameter, in Network::parameters() order.
using ParamSet = std::vector<Matrix>;

enum class Activation { relu, tanh, sigmoid, identity };
enum class Mode { train, eval };

const char* to_string(Activation a) noexcept;
Activation activation_from_string(const std::string& name);

// Fully connected map x -> x * weight + bias. weight is in x out, bias 1 x out.
struct Linear {
  Matrix weight;
  Matrix bias;
};

struct Act {
  Activation kind = Activation::identity;
};

// Inverted dropout: kept units are scaled by 1 / (1 - rate) at train time.
struct Dropout {
  double rate = 0.0;
};

struct BatchNorm {
  Matrix gamma;
  Matrix beta;
  Matrix running_mean;
  Matrix running_var;
  double epsilon = 1e-5;
  double momentum = 0.1;
};

// out = [relu(batchnorm(linear(x))), x]; width grows by the linear out-dim.
struct Residual {
  Linear linear;
  BatchNorm norm;
};

using Layer = std::variant<Linear, Act, Dropout, BatchNorm, Residual>;

// Per-layer intermediates recorded by a forward pass. Fields a layer does not
// need stay empty.
struct LayerCache {
  Matrix input;
  Matrix output;
  Matrix mask;       // dropout keep-mask, pre-scaled
  Matrix pre_norm;   // residual: linear output
  Matrix normalized; // batchnorm x-hat
  Matrix inv_std;    // 1 x C
};

struct Tape {
  Mode mode = Mode::eval;
  std::vector<LayerCache> caches;
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

struct Gradients {
  ParamSet params;
  Matrix input;
};

class Network {
 public:
  Network() = default;
  explicit Network(std::size_t input_dim);

  // Builders append one layer. Dense weights are initialized uniformly in
  // +-1/sqrt(fan_in).
  Network& linear(std::size_t out_dim, Rng& rng);
  Network& activation(Activation kind);
  Network& dropout(double rate);
  Network& batch_norm();
  Network& residual(std::size_t out_dim, Rng& rng);

  // Rebuilds a network from stored layers; shapes must chain.
  static Network from_layers(std::size_t input_dim, std::vector<Layer> layers);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return width_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::size_t parameter_count() const;
  ParamSet zero_gradients() const;
  bool has_batch_coupling() const;

  // Train mode draws dropout masks from rng and updates batchnorm running
  // statistics; eval mode is deterministic and leaves the network untouched.
  ForwardResult forward(const Matrix& input, Mode mode, Rng& rng);

  // Eval-mode forward without a tape; a pure function of (parameters, input).
  Matrix infer(const Matrix& input) const;

  // grad_output is d(loss)/d(output). Returns parameter and input gradients.
  Gradients backward(const Tape& tape, const Matrix& grad_output) const;

  // One gradient set per input row. grad_output row i must be the gradient of
  // example i's own loss. Not defined for networks with batch coupling.
  std::vector<ParamSet> backward_per_example(const Tape& tape,
                                             const Matrix& grad_output) const;

  // L2 norm of each example's full flattened parameter gradient, computed
  // without materializing the per-example gradients.
  std::vector<double> per_example_grad_norms(const Tape& tape,
                                             const Matrix& grad_output) const;

 private:
  void check_tape(const Tape& tape) const;

  std::size_t input_dim_ = 0;
  std::size_t width_ = 0;
  std::vector<Layer> layers_;
};

// Throws Error(non_finite) naming `what` if m holds NaN or Inf.
void require_finite(const Matrix& m, const char* what);

// Sum of squared entries over a whole parameter set.
double squared_norm(const ParamSet& p);

}  // namespace synthaug::nn
