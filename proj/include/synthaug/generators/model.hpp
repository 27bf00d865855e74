#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "synthaug/data.hpp"
#include "synthaug/nn/network.hpp"
#include "synthaug/nn/optim.hpp"
#include "synthaug/similarity.hpp"

namespace synthaug::gen {

enum class Family { vae, dpgan, ctgan };

const char* to_string(Family f) noexcept;
Family family_from_string(const std::string& name);

inline constexpr std::size_t kDefaultEpochs = 300;

struct VaeConfig {
  std::size_t latent_dim = 16;
  std::size_t hidden_dim = 500;
  std::size_t batch_size = 150;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double dropout_rate = 0.2;
  std::size_t epochs = kDefaultEpochs;
  std::uint64_t seed = 0;
};

struct DpGanConfig {
  std::string variant = "DPGAN001";
  std::size_t latent_dim = 32;
  std::size_t batch_size = 150;
  nn::DpSgdConfig dp{0.1, 0.01};
  double lr = 0.002;
  double beta1 = 0.3;
  double beta2 = 0.999;
  double dropout_rate = 0.2;
  std::vector<std::size_t> generator_blocks{128, 256, 512, 512};
  std::vector<std::size_t> discriminator_hidden{512, 256};
  // Off only for comparisons against a non-private GAN step.
  bool sanitize = true;
  std::size_t epochs = kDefaultEpochs;
  std::uint64_t seed = 0;

  static DpGanConfig dpgan001();
  static DpGanConfig dpgan050();
};

struct CtGanConfig {
  std::size_t batch_size = 300;
  std::size_t gen_hidden = 50;
  std::size_t gen_layers = 2;
  std::size_t disc_hidden = 512;
  std::size_t disc_layers = 2;
  std::size_t embedding_dim = 32;
  std::size_t n_disc_updates = 7;
  std::size_t pac = 20;
  double disc_lr = 2e-4;
  double disc_weight_decay = 1e-6;
  double gen_lr = 2e-3;
  double gen_weight_decay = 1e-7;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double gumbel_tau = 0.2;
  double dropout_rate = 0.5;
  bool conditional = true;
  std::size_t epochs = kDefaultEpochs;
  std::uint64_t seed = 0;
};

using AnyConfig = std::variant<VaeConfig, DpGanConfig, CtGanConfig>;

Family family_of(const AnyConfig& c) noexcept;
// Family defaults by name; "dpgan050" selects the high-noise DPGAN preset.
AnyConfig default_config(const std::string& name);
std::size_t epochs_of(const AnyConfig& c) noexcept;
void set_epochs(AnyConfig& c, std::size_t epochs) noexcept;
void set_seed(AnyConfig& c, std::uint64_t seed) noexcept;

// Training-by-sampling distribution over (column, category) conditions: the
// column is uniform, the category is drawn with probability proportional to
// log(count + 1).
class CategorySampler {
 public:
  CategorySampler() = default;
  explicit CategorySampler(std::vector<std::array<std::size_t, 2>> counts);
  static CategorySampler fit(const nn::Matrix& data01);

  std::size_t columns() const noexcept { return counts_.size(); }
  const std::vector<std::array<std::size_t, 2>>& counts() const noexcept { return counts_; }
  double category_probability(std::size_t column, std::size_t category) const;
  std::pair<std::size_t, std::size_t> sample(Rng& rng) const;

 private:
  std::vector<std::array<std::size_t, 2>> counts_;
  std::vector<double> p_one_;
};

struct VaeModel {
  VaeConfig config;
  nn::Network encoder;
  nn::Network decoder;
};

struct DpGanModel {
  DpGanConfig config;
  nn::Network generator;
  nn::Network discriminator;
};

struct CtGanModel {
  CtGanConfig config;
  nn::Network generator;
  nn::Network discriminator;
  CategorySampler sampler;
};

// A trained synthesizer over d feature columns plus the label column.
struct GeneratorModel {
  std::vector<std::string> feature_columns;
  std::variant<VaeModel, DpGanModel, CtGanModel> body;

  Family family() const noexcept;
  std::size_t width() const noexcept { return feature_columns.size() + 1; }
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::map<std::string, double> losses;
  std::optional<similarity::PrdcScores> prdc;
};

struct TrainingTrace {
  std::vector<EpochRecord> epochs;
  std::vector<std::string> events;  // warnings such as discriminator saturation
};

// Called after every completed epoch (1-based). May return PRDC scores for
// the trace.
using EpochHook =
    std::function<std::optional<similarity::PrdcScores>(std::size_t epoch, const GeneratorModel&)>;

// Per-step instrumentation for invariant checks.
struct StepObserver {
  std::function<void(std::span<const double> clipped_norms)> on_clipped_norms;
  std::function<void(std::size_t rows, std::size_t cols)> on_discriminator_input;
};

struct TrainOptions {
  EpochHook on_epoch;
  StepObserver observer;
};

struct TrainResult {
  GeneratorModel model;
  TrainingTrace trace;
};

TrainResult vae_train(const data::LabeledDataset& data, const VaeConfig& cfg,
                      const TrainOptions& options = {});
TrainResult dpgan_train(const data::LabeledDataset& data, const DpGanConfig& cfg,
                        const TrainOptions& options = {});
TrainResult ctgan_train(const data::LabeledDataset& data, const CtGanConfig& cfg,
                        const TrainOptions& options = {});

TrainResult train(const data::LabeledDataset& data, const AnyConfig& cfg,
                  const TrainOptions& options = {});

// Decodes n rows in {0,1}^(d+1); the last column becomes the label.
data::LabeledDataset generate(const GeneratorModel& model, std::size_t n, Rng& rng);

// Conditional generation with a fixed (column, category) condition.
data::LabeledDataset generate_conditioned(const GeneratorModel& model, std::size_t n,
                                          std::size_t column, std::size_t category, Rng& rng);

// Fills m with independent N(0, 1) draws.
void fill_normal(nn::Matrix& m, Rng& rng);

}  // namespace synthaug::gen
