#include "synthaug/nn/network.hpp"

#include <cmath>
#include <string>

#include "synthaug/error.hpp"

namespace synthaug::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void dimension_error(const std::string& what, Eigen::Index got,
                                  Eigen::Index expected) {
  throw Error(ErrorCode::dimension_mismatch,
              what + ": got " + std::to_string(got) + " columns, expected " +
                  std::to_string(expected));
}

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Linear l{Matrix(in, out), Matrix(1, out)};
  for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = u(rng);
  return l;
}

BatchNorm make_batch_norm(std::size_t width) {
  const auto w = static_cast<Eigen::Index>(width);
  return BatchNorm{Matrix::Ones(1, w), Matrix::Zero(1, w), Matrix::Zero(1, w),
                   Matrix::Ones(1, w)};
}

Matrix linear_forward(const Linear& l, const Matrix& x) {
  if (x.cols() != l.weight.rows()) dimension_error("linear input", x.cols(), l.weight.rows());
  Matrix out = x * l.weight;
  out.rowwise() += l.bias.row(0);
  return out;
}

Matrix apply_activation(Activation kind, const Matrix& x) {
  switch (kind) {
    case Activation::relu:
      return x.cwiseMax(0.0);
    case Activation::tanh:
      return x.array().tanh().matrix();
    case Activation::sigmoid:
      return (1.0 / (1.0 + (-x.array()).exp())).matrix();
    case Activation::identity:
      return x;
  }
  return x;
}

Matrix activation_backward(Activation kind, const LayerCache& c, const Matrix& g) {
  switch (kind) {
    case Activation::relu:
      return (c.input.array() > 0.0).select(g, 0.0);
    case Activation::tanh:
      return (g.array() * (1.0 - c.output.array().square())).matrix();
    case Activation::sigmoid:
      return (g.array() * c.output.array() * (1.0 - c.output.array())).matrix();
    case Activation::identity:
      return g;
  }
  return g;
}

// Normalizes x in place into cache.normalized / cache.inv_std and returns the
// affine output.
Matrix batch_norm_forward(BatchNorm& bn, const Matrix& x, Mode mode, LayerCache& c) {
  if (x.cols() != bn.gamma.cols()) dimension_error("batchnorm input", x.cols(), bn.gamma.cols());
  const double n = static_cast<double>(x.rows());
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd var;
  if (mode == Mode::train) {
    mean = x.colwise().mean();
    var = (x.rowwise() - mean).array().square().colwise().sum().matrix() / n;
    const double unbiased = x.rows() > 1 ? n / (n - 1.0) : 1.0;
    bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * mean;
    bn.running_var = (1.0 - bn.momentum) * bn.running_var + bn.momentum * unbiased * var;
  } else {
    mean = bn.running_mean.row(0);
    var = bn.running_var.row(0);
  }
  c.inv_std = (var.array() + bn.epsilon).rsqrt().matrix();
  c.normalized = (x.rowwise() - mean).array().rowwise() * c.inv_std.row(0).array();
  Matrix out = c.normalized.array().rowwise() * bn.gamma.row(0).array();
  out.rowwise() += bn.beta.row(0);
  return out;
}

Matrix batch_norm_eval(const BatchNorm& bn, const Matrix& x) {
  if (x.cols() != bn.gamma.cols()) dimension_error("batchnorm input", x.cols(), bn.gamma.cols());
  const Eigen::RowVectorXd inv_std = (bn.running_var.row(0).array() + bn.epsilon).rsqrt().matrix();
  const Eigen::RowVectorXd scale = inv_std.cwiseProduct(bn.gamma.row(0));
  Matrix out = (x.rowwise() - bn.running_mean.row(0)).array().rowwise() * scale.array();
  out.rowwise() += bn.beta.row(0);
  return out;
}

// Returns dx; writes dgamma / dbeta.
Matrix batch_norm_backward(const BatchNorm& bn, Mode mode, const LayerCache& c,
                           const Matrix& g, Matrix& dgamma, Matrix& dbeta) {
  dgamma = g.cwiseProduct(c.normalized).colwise().sum();
  dbeta = g.colwise().sum();
  const Matrix dxhat = g.array().rowwise() * bn.gamma.row(0).array();
  if (mode == Mode::eval) return dxhat.array().rowwise() * c.inv_std.row(0).array();
  const double n = static_cast<double>(g.rows());
  const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dxhat_xhat = dxhat.cwiseProduct(c.normalized).colwise().sum();
  Matrix dx = (n * dxhat).rowwise() - sum_dxhat;
  dx -= (c.normalized.array().rowwise() * sum_dxhat_xhat.array()).matrix();
  return (dx.array().rowwise() * (c.inv_std.row(0).array() / n)).matrix();
}

std::size_t param_count(const Layer& layer) {
  return std::visit(overloaded{[](const Linear&) -> std::size_t { return 2; },
                               [](const BatchNorm&) -> std::size_t { return 2; },
                               [](const Residual&) -> std::size_t { return 4; },
                               [](const auto&) -> std::size_t { return 0; }},
                    layer);
}

}  // namespace

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity") return Activation::identity;
  throw Error(ErrorCode::invalid_argument, "unknown activation '" + name + "'");
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw Error(ErrorCode::non_finite, std::string("non-finite values in ") + what);
}

double squared_norm(const ParamSet& p) {
  double s = 0.0;
  for (const auto& m : p) s += m.squaredNorm();
  return s;
}

Network::Network(std::size_t input_dim) : input_dim_(input_dim), width_(input_dim) {}

Network& Network::linear(std::size_t out_dim, Rng& rng) {
  layers_.emplace_back(make_linear(width_, out_dim, rng));
  width_ = out_dim;
  return *this;
}

Network& Network::activation(Activation kind) {
  layers_.emplace_back(Act{kind});
  return *this;
}

Network& Network::dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw Error(ErrorCode::invalid_argument, "dropout rate must be in [0, 1)");
  layers_.emplace_back(Dropout{rate});
  return *this;
}

Network& Network::batch_norm() {
  layers_.emplace_back(make_batch_norm(width_));
  return *this;
}

Network& Network::residual(std::size_t out_dim, Rng& rng) {
  layers_.emplace_back(Residual{make_linear(width_, out_dim, rng), make_batch_norm(out_dim)});
  width_ += out_dim;
  return *this;
}

Network Network::from_layers(std::size_t input_dim, std::vector<Layer> layers) {
  Network net(input_dim);
  const auto expect = [&](const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols)
      throw Error(ErrorCode::dimension_mismatch, std::string("stored ") + what + " has shape " +
                                                     std::to_string(m.rows()) + "x" +
                                                     std::to_string(m.cols()));
  };
  const auto check_norm = [&](const BatchNorm& b, Eigen::Index w) {
    expect(b.gamma, 1, w, "batchnorm gamma");
    expect(b.beta, 1, w, "batchnorm beta");
    expect(b.running_mean, 1, w, "batchnorm mean");
    expect(b.running_var, 1, w, "batchnorm variance");
  };
  for (auto& layer : layers) {
    const auto w = static_cast<Eigen::Index>(net.width_);
    std::visit(overloaded{[&](const Linear& l) {
                            expect(l.weight, w, l.weight.cols(), "linear weight");
                            expect(l.bias, 1, l.weight.cols(), "linear bias");
                            net.width_ = static_cast<std::size_t>(l.weight.cols());
                          },
                          [&](const BatchNorm& b) { check_norm(b, w); },
                          [&](const Residual& r) {
                            const Eigen::Index out = r.linear.weight.cols();
                            expect(r.linear.weight, w, out, "residual weight");
                            expect(r.linear.bias, 1, out, "residual bias");
                            check_norm(r.norm, out);
                            net.width_ += static_cast<std::size_t>(out);
                          },
                          [](const auto&) {}},
               layer);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

std::vector<Matrix*> Network::parameters() {
  std::vector<Matrix*> out;
  for (auto& layer : layers_) {
    std::visit(overloaded{[&](Linear& l) {
                            out.push_back(&l.weight);
                            out.push_back(&l.bias);
                          },
                          [&](BatchNorm& b) {
                            out.push_back(&b.gamma);
                            out.push_back(&b.beta);
                          },
                          [&](Residual& r) {
                            out.push_back(&r.linear.weight);
                            out.push_back(&r.linear.bias);
                            out.push_back(&r.norm.gamma);
                            out.push_back(&r.norm.beta);
                          },
                          [](auto&) {}},
               layer);
  }
  return out;
}

std::vector<const Matrix*> Network::parameters() const {
  auto mutable_params = const_cast<Network*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

ParamSet Network::zero_gradients() const {
  ParamSet out;
  for (const Matrix* p : parameters()) out.push_back(Matrix::Zero(p->rows(), p->cols()));
  return out;
}

bool Network::has_batch_coupling() const {
  for (const auto& layer : layers_)
    if (std::holds_alternative<BatchNorm>(layer) || std::holds_alternative<Residual>(layer))
      return true;
  return false;
}

ForwardResult Network::forward(const Matrix& input, Mode mode, Rng& rng) {
  if (input.cols() != static_cast<Eigen::Index>(input_dim_))
    dimension_error("network input", input.cols(), static_cast<Eigen::Index>(input_dim_));
  ForwardResult result;
  result.tape.mode = mode;
  result.tape.caches.resize(layers_.size());
  Matrix x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    LayerCache& c = result.tape.caches[i];
    c.input = x;
    x = std::visit(
        overloaded{
            [&](Linear& l) { return linear_forward(l, x); },
            [&](Act& a) {
              Matrix y = apply_activation(a.kind, x);
              c.output = y;
              return y;
            },
            [&](Dropout& d) {
              if (mode == Mode::eval || d.rate == 0.0) return Matrix(x);
              std::bernoulli_distribution keep(1.0 - d.rate);
              const double scale = 1.0 / (1.0 - d.rate);
              c.mask.resize(x.rows(), x.cols());
              for (Eigen::Index k = 0; k < c.mask.size(); ++k)
                c.mask.data()[k] = keep(rng) ? scale : 0.0;
              return Matrix(x.cwiseProduct(c.mask));
            },
            [&](BatchNorm& b) { return batch_norm_forward(b, x, mode, c); },
            [&](Residual& r) {
              c.pre_norm = linear_forward(r.linear, x);
              c.output = batch_norm_forward(r.norm, c.pre_norm, mode, c).cwiseMax(0.0);
              Matrix y(x.rows(), c.output.cols() + x.cols());
              y << c.output, x;
              return y;
            }},
        layers_[i]);
    require_finite(x, "layer activations");
  }
  result.output = std::move(x);
  return result;
}

Matrix Network::infer(const Matrix& input) const {
  if (input.cols() != static_cast<Eigen::Index>(input_dim_))
    dimension_error("network input", input.cols(), static_cast<Eigen::Index>(input_dim_));
  Matrix x = input;
  for (const auto& layer : layers_) {
    x = std::visit(overloaded{[&](const Linear& l) { return linear_forward(l, x); },
                              [&](const Act& a) { return apply_activation(a.kind, x); },
                              [&](const Dropout&) { return Matrix(x); },
                              [&](const BatchNorm& b) { return batch_norm_eval(b, x); },
                              [&](const Residual& r) {
                                Matrix h = batch_norm_eval(r.norm, linear_forward(r.linear, x))
                                               .cwiseMax(0.0);
                                Matrix y(x.rows(), h.cols() + x.cols());
                                y << h, x;
                                return y;
                              }},
                   layer);
  }
  require_finite(x, "network output");
  return x;
}

void Network::check_tape(const Tape& tape) const {
  if (tape.caches.size() != layers_.size())
    throw Error(ErrorCode::dimension_mismatch, "tape does not match network layer count");
}

Gradients Network::backward(const Tape& tape, const Matrix& grad_output) const {
  check_tape(tape);
  if (grad_output.cols() != static_cast<Eigen::Index>(width_))
    dimension_error("output gradient", grad_output.cols(), static_cast<Eigen::Index>(width_));
  Gradients out;
  out.params = zero_gradients();
  std::size_t slot = out.params.size();
  Matrix g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const LayerCache& c = tape.caches[i];
    slot -= param_count(layers_[i]);
    g = std::visit(
        overloaded{
            [&](const Linear& l) {
              out.params[slot] = c.input.transpose() * g;
              out.params[slot + 1] = g.colwise().sum();
              return Matrix(g * l.weight.transpose());
            },
            [&](const Act& a) { return activation_backward(a.kind, c, g); },
            [&](const Dropout&) { return c.mask.size() == 0 ? g : Matrix(g.cwiseProduct(c.mask)); },
            [&](const BatchNorm& b) {
              return batch_norm_backward(b, tape.mode, c, g, out.params[slot], out.params[slot + 1]);
            },
            [&](const Residual& r) {
              const Eigen::Index width = r.linear.weight.cols();
              const Matrix g_post = (c.output.array() > 0.0).select(g.leftCols(width), 0.0);
              const Matrix g_pre = batch_norm_backward(r.norm, tape.mode, c, g_post,
                                                       out.params[slot + 2], out.params[slot + 3]);
              const Matrix& x = c.input;
              out.params[slot] = x.transpose() * g_pre;
              out.params[slot + 1] = g_pre.colwise().sum();
              return Matrix(g_pre * r.linear.weight.transpose() + g.rightCols(x.cols()));
            }},
        layers_[i]);
  }
  out.input = std::move(g);
  return out;
}

std::vector<ParamSet> Network::backward_per_example(const Tape& tape,
                                                    const Matrix& grad_output) const {
  check_tape(tape);
  if (has_batch_coupling())
    throw Error(ErrorCode::invalid_argument,
                "per-example gradients are undefined for batch-coupled layers");
  const Eigen::Index n = grad_output.rows();
  std::vector<ParamSet> out(static_cast<std::size_t>(n), zero_gradients());
  std::size_t slot = out.empty() ? 0 : out.front().size();
  Matrix g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const LayerCache& c = tape.caches[i];
    slot -= param_count(layers_[i]);
    g = std::visit(overloaded{[&](const Linear& l) {
                                for (Eigen::Index r = 0; r < n; ++r) {
                                  auto& ex = out[static_cast<std::size_t>(r)];
                                  ex[slot] = c.input.row(r).transpose() * g.row(r);
                                  ex[slot + 1] = g.row(r);
                                }
                                return Matrix(g * l.weight.transpose());
                              },
                              [&](const Act& a) { return activation_backward(a.kind, c, g); },
                              [&](const Dropout&) {
                                return c.mask.size() == 0 ? g : Matrix(g.cwiseProduct(c.mask));
                              },
                              [&](const auto&) { return g; }},
                   layers_[i]);
  }
  return out;
}

std::vector<double> Network::per_example_grad_norms(const Tape& tape,
                                                    const Matrix& grad_output) const {
  check_tape(tape);
  if (has_batch_coupling())
    throw Error(ErrorCode::invalid_argument,
                "per-example gradients are undefined for batch-coupled layers");
  // For a dense layer, example i contributes weight gradient a_i^T g_i and
  // bias gradient g_i, whose squared norms are |a_i|^2 |g_i|^2 and |g_i|^2.
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(grad_output.rows());
  Matrix g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const LayerCache& c = tape.caches[i];
    g = std::visit(overloaded{[&](const Linear& l) {
                                const Eigen::VectorXd a2 = c.input.rowwise().squaredNorm();
                                const Eigen::VectorXd g2 = g.rowwise().squaredNorm();
                                sq.array() += (a2.array() + 1.0) * g2.array();
                                return Matrix(g * l.weight.transpose());
                              },
                              [&](const Act& a) { return activation_backward(a.kind, c, g); },
                              [&](const Dropout&) {
                                return c.mask.size() == 0 ? g : Matrix(g.cwiseProduct(c.mask));
                              },
                              [&](const auto&) { return g; }},
                   layers_[i]);
  }
  std::vector<double> norms(static_cast<std::size_t>(sq.size()));
  for (Eigen::Index i = 0; i < sq.size(); ++i) norms[static_cast<std::size_t>(i)] = std::sqrt(sq[i]);
  return norms;
}

}  // namespace synthaug::nn
