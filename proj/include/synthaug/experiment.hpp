#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synthaug/data.hpp"
#include "synthaug/generators/model.hpp"
#include "synthaug/report_json.hpp"
#include "synthaug/similarity.hpp"
#include "synthaug/uniqueness.hpp"
#include "synthaug/utility/protocol.hpp"

namespace synthaug::experiment {

// Environment variable that re-roots relative output directories.
inline constexpr const char* kOutputRootEnv = "SYNTHAUG_OUTPUT_ROOT";

struct BenchmarkParams {
  std::size_t n = 3000;
  std::size_t d = 41;
  double class_ratio = 0.8;
  double minority_coupling = 0.0;
  std::uint64_t seed = 0;
};

struct DatasetSource {
  std::string csv;  // saved dataset; empty selects the benchmark
  BenchmarkParams benchmark;
};

data::LabeledDataset load_source(const DatasetSource& src);

struct ExperimentConfig {
  DatasetSource dataset;
  gen::AnyConfig generator = gen::VaeConfig{};
  std::size_t folds = 5;
  std::size_t repetitions = 10;
  std::size_t n_generate = 100000;
  std::size_t prdc_k = similarity::kDefaultK;
  std::size_t prdc_repeats = 10;
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  // Per-epoch PRDC every `trace_every` epochs (0 disables) on at most
  // `trace_sample` rows per side.
  std::size_t trace_every = 0;
  std::size_t trace_sample = 1000;
  bool baselines = true;
  utility::SuiteConfig suite;
  std::size_t threads = 1;
};

Json to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig experiment_from_json(const Json& j);

// Relative paths are placed under $SYNTHAUG_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output(const std::string& dir);

// ---- grid search ---------------------------------------------------------

struct GridAxis {
  std::string key;  // top-level config key, or a JSON pointer such as "/dp/sigma"
  std::vector<Json> values;
};

struct GridSpec {
  gen::AnyConfig base = gen::VaeConfig{};
  std::vector<GridAxis> axes;
  double ho_fraction = 0.8;
  std::size_t prdc_k = similarity::kDefaultK;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

Json to_json(const GridSpec& grid);
GridSpec grid_from_json(const Json& j);

// Trains on `train` with the given generator config and returns n rows.
using Synthesizer = std::function<data::LabeledDataset(
    const data::LabeledDataset& train, const gen::AnyConfig& cfg, std::size_t n, std::uint64_t seed)>;

Synthesizer default_synthesizer();

struct GridPoint {
  gen::AnyConfig config;
  std::optional<similarity::PrdcScores> scores;
  double prdc_sum = 0.0;
  std::string error;  // non-empty when the point failed
};

struct GridResult {
  std::vector<GridPoint> points;  // grid order
  std::size_t best = 0;
  double min_sum = 0.0;
  double max_sum = 0.0;
};

// Cartesian product of the axes applied to the base config, in axis order.
std::vector<gen::AnyConfig> expand_grid(const GridSpec& grid);

// Stratified hold-out share of the data used for tuning.
data::LabeledDataset holdout_split(const data::LabeledDataset& ds, double fraction,
                                   std::uint64_t seed);

Json to_json(const GridResult& r);

// Argmax of prdc_sum; ties go to the lexicographically smallest config JSON.
GridResult grid_search(const GridSpec& grid, const data::LabeledDataset& ds,
                       const Synthesizer& synth = default_synthesizer());

// ---- full pipeline -------------------------------------------------------

struct FoldResult {
  std::size_t fold = 0;
  gen::TrainingTrace trace;
  uniqueness::UniquenessReport uniqueness;
  std::vector<similarity::PrdcScores> prdc;  // one per repeat
  std::vector<utility::UtilityReport> utility;  // A, B, then baselines
  std::vector<std::string> events;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<FoldResult> folds;
  Json results;   // deterministic numeric results (results.json)
  Json manifest;  // paths and timings (manifest.json)
};

RunResult run_experiment(const ExperimentConfig& cfg);

// Rebuilds every figure CSV of a finished run from its checkpoints.
void export_figures(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

// Class-0 rows then class-1 rows, original order within each block.
data::LabeledDataset export_heatmap_data(const data::LabeledDataset& ds);

std::string pca_csv(const data::LabeledDataset& ds);

}  // namespace synthaug::experiment
