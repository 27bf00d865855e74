#include "synthaug/generators/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "alloc.hpp"
#include "generators/internal.hpp"
#include "synthaug/error.hpp"

namespace synthaug::gen {

namespace {

constexpr std::size_t kChunk = 8192;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

data::LabeledDataset decode(const GeneratorModel& model, const nn::Matrix& out, double cut,
                            bool paired) {
  const std::size_t w = model.width();
  const auto rows = static_cast<std::size_t>(out.rows());
  std::vector<std::uint8_t> bits(rows * w);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const auto ri = static_cast<Eigen::Index>(r);
      const auto ci = static_cast<Eigen::Index>(c);
      const bool one = paired ? out(ri, 2 * ci + 1) > out(ri, 2 * ci) : out(ri, ci) > cut;
      bits[r * w + c] = one ? 1 : 0;
    }
  return data::from_joint_bits(rows, w, bits, model.feature_columns);
}

data::LabeledDataset generate_chunk(const GeneratorModel& model, std::size_t n, Rng& rng,
                                    const detail::Condition* fixed) {
  const auto rows = static_cast<Eigen::Index>(n);
  return std::visit(
      overloaded{
          [&](const VaeModel& m) {
            nn::Matrix z(rows, static_cast<Eigen::Index>(m.config.latent_dim));
            fill_normal(z, rng);
            return decode(model, m.decoder.infer(z), 0.5, false);
          },
          [&](const DpGanModel& m) {
            nn::Matrix z(rows, static_cast<Eigen::Index>(m.config.latent_dim));
            fill_normal(z, rng);
            return decode(model, m.generator.infer(z), 0.0, false);
          },
          [&](const CtGanModel& m) {
            nn::Matrix cond;
            if (m.config.conditional) {
              std::vector<detail::Condition> conds(n);
              for (auto& c : conds) c = fixed ? *fixed : m.sampler.sample(rng);
              cond = detail::condition_matrix(conds, model.width());
            }
            nn::Matrix noise(rows, static_cast<Eigen::Index>(m.config.embedding_dim));
            fill_normal(noise, rng);
            const nn::Matrix input = detail::ctgan_generator_input(m, noise, cond);
            return decode(model, m.generator.infer(input), 0.0, true);
          },
      },
      model.body);
}

data::LabeledDataset generate_impl(const GeneratorModel& model, std::size_t n, Rng& rng,
                                   const detail::Condition* fixed) {
  tune_allocator();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "generate: n must be at least 1");
  data::LabeledDataset out = generate_chunk(model, std::min(n, kChunk), rng, fixed);
  for (std::size_t done = out.size(); done < n;) {
    const std::size_t take = std::min(n - done, kChunk);
    out = data::concat(out, generate_chunk(model, take, rng, fixed));
    done += take;
  }
  return out;
}

}  // namespace

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::vae:
      return "vae";
    case Family::dpgan:
      return "dpgan";
    case Family::ctgan:
      return "ctgan";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "vae") return Family::vae;
  if (s == "dpgan" || s == "dpgan001" || s == "dpgan050") return Family::dpgan;
  if (s == "ctgan") return Family::ctgan;
  throw Error(ErrorCode::invalid_argument, "unknown generator family '" + name + "'");
}

DpGanConfig DpGanConfig::dpgan001() { return DpGanConfig{}; }

DpGanConfig DpGanConfig::dpgan050() {
  DpGanConfig c;
  c.variant = "DPGAN050";
  c.batch_size = 50;
  c.latent_dim = 10;
  c.dp = nn::DpSgdConfig{0.05, 0.5};
  c.lr = 0.002;
  c.beta1 = 0.8;
  c.beta2 = 0.8;
  return c;
}

CategorySampler::CategorySampler(std::vector<std::array<std::size_t, 2>> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) throw Error(ErrorCode::invalid_argument, "sampler needs a column");
  p_one_.reserve(counts_.size());
  for (const auto& c : counts_) {
    const double w0 = std::log(static_cast<double>(c[0]) + 1.0);
    const double w1 = std::log(static_cast<double>(c[1]) + 1.0);
    if (w0 + w1 <= 0.0) throw Error(ErrorCode::invalid_argument, "sampler column has no rows");
    p_one_.push_back(w1 / (w0 + w1));
  }
}

CategorySampler CategorySampler::fit(const nn::Matrix& data01) {
  std::vector<std::array<std::size_t, 2>> counts(static_cast<std::size_t>(data01.cols()));
  for (Eigen::Index r = 0; r < data01.rows(); ++r)
    for (Eigen::Index c = 0; c < data01.cols(); ++c)
      ++counts[static_cast<std::size_t>(c)][data01(r, c) > 0.5 ? 1 : 0];
  return CategorySampler(std::move(counts));
}

double CategorySampler::category_probability(std::size_t column, std::size_t category) const {
  if (column >= p_one_.size() || category > 1)
    throw Error(ErrorCode::invalid_argument, "sampler: condition out of range");
  return category == 1 ? p_one_[column] : 1.0 - p_one_[column];
}

std::pair<std::size_t, std::size_t> CategorySampler::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> col(0, counts_.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t j = col(rng);
  return {j, u(rng) < p_one_[j] ? 1u : 0u};
}

Family family_of(const AnyConfig& c) noexcept { return static_cast<Family>(c.index()); }

AnyConfig default_config(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "dpgan050") return DpGanConfig::dpgan050();
  switch (family_from_string(name)) {
    case Family::vae:
      return VaeConfig{};
    case Family::dpgan:
      return DpGanConfig::dpgan001();
    case Family::ctgan:
      return CtGanConfig{};
  }
  return VaeConfig{};
}

std::size_t epochs_of(const AnyConfig& c) noexcept {
  return std::visit([](const auto& x) { return x.epochs; }, c);
}

void set_epochs(AnyConfig& c, std::size_t epochs) noexcept {
  std::visit([&](auto& x) { x.epochs = epochs; }, c);
}

void set_seed(AnyConfig& c, std::uint64_t seed) noexcept {
  std::visit([&](auto& x) { x.seed = seed; }, c);
}

TrainResult train(const data::LabeledDataset& data, const AnyConfig& cfg,
                  const TrainOptions& options) {
  return std::visit(
      overloaded{[&](const VaeConfig& c) { return vae_train(data, c, options); },
                 [&](const DpGanConfig& c) { return dpgan_train(data, c, options); },
                 [&](const CtGanConfig& c) { return ctgan_train(data, c, options); }},
      cfg);
}

Family GeneratorModel::family() const noexcept {
  return static_cast<Family>(body.index());
}

void fill_normal(nn::Matrix& m, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
}

data::LabeledDataset generate(const GeneratorModel& model, std::size_t n, Rng& rng) {
  return generate_impl(model, n, rng, nullptr);
}

data::LabeledDataset generate_conditioned(const GeneratorModel& model, std::size_t n,
                                          std::size_t column, std::size_t category, Rng& rng) {
  const auto* ct = std::get_if<CtGanModel>(&model.body);
  if (!ct || !ct->config.conditional)
    throw Error(ErrorCode::invalid_argument, "conditioned generation needs a conditional CTGAN");
  if (column >= model.width() || category > 1)
    throw Error(ErrorCode::invalid_argument, "condition out of range");
  const detail::Condition fixed{column, category};
  return generate_impl(model, n, rng, &fixed);
}

namespace detail {

nn::Matrix condition_matrix(const std::vector<Condition>& conds, std::size_t columns) {
  nn::Matrix m = nn::Matrix::Zero(static_cast<Eigen::Index>(conds.size()),
                                  static_cast<Eigen::Index>(2 * columns));
  for (std::size_t i = 0; i < conds.size(); ++i)
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * conds[i].first + conds[i].second)) =
        1.0;
  return m;
}

nn::Matrix ctgan_generator_input(const CtGanModel& model, const nn::Matrix& noise,
                                 const nn::Matrix& cond) {
  if (!model.config.conditional) return noise;
  nn::Matrix in(noise.rows(), noise.cols() + cond.cols());
  in << noise, cond;
  return in;
}

void rethrow_at(const Error& e, std::size_t epoch, std::size_t batch) {
  throw Error(e.code(), "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                            ": " + e.what());
}

void require_trainable(const data::LabeledDataset& data) {
  if (data.size() == 0) throw Error(ErrorCode::insufficient_data, "training data is empty");
  if (data.feature_count() == 0)
    throw Error(ErrorCode::insufficient_data, "training data has no feature columns");
}

nn::Matrix gather_rows(const nn::Matrix& m, const std::size_t* rows, std::size_t count) {
  nn::Matrix out(static_cast<Eigen::Index>(count), m.cols());
  for (std::size_t i = 0; i < count; ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch,
                                                              bool drop_last) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t b = std::min(batch, n);
  for (std::size_t start = 0; start < n; start += b) {
    const std::size_t end = std::min(n, start + b);
    if (drop_last && end - start < b && !out.empty()) break;
    out.emplace_back(start, end);
  }
  return out;
}

void finish_epoch(TrainingTrace& trace, EpochRecord record, const TrainOptions& options,
                  const GeneratorModel& model) {
  if (options.on_epoch) record.prdc = options.on_epoch(record.epoch, model);
  trace.epochs.push_back(std::move(record));
}

}  // namespace detail

}  // namespace synthaug::gen
