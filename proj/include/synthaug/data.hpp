#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "synthaug/error.hpp"
#include "synthaug/nn/network.hpp"
#include "synthaug/rng.hpp"

namespace synthaug::data {

// Reserved column carrying the outcome label in saved datasets.
inline constexpr const char* kLabelColumn = "__label__";

enum class Cell : std::uint8_t { zero = 0, one = 1, missing = 2 };

struct RawTable {
  std::vector<std::string> columns;
  std::size_t rows = 0;
  std::vector<Cell> cells;  // row-major

  std::size_t cols() const noexcept { return columns.size(); }
  Cell at(std::size_t r, std::size_t c) const { return cells[r * columns.size() + c]; }
};

class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits,
               std::vector<std::string> columns = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return {bits_.data() + r * cols_, cols_};
  }
  std::uint8_t at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c]; }

  bool deduplicated = false;
  bool no_empty_rows = false;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<std::string> columns_;
};

// Features plus one {0,1} outcome per row; label 1 is the majority
// ("survived") class in the bundled benchmark.
struct LabeledDataset {
  BinaryMatrix features;
  std::vector<std::uint8_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_count() const noexcept { return features.cols(); }
  std::size_t class_count(std::uint8_t label) const;
  std::array<std::size_t, 2> class_counts() const;
  std::vector<std::size_t> indices_of(std::uint8_t label) const;
  LabeledDataset select(std::span<const std::size_t> rows) const;
};

LabeledDataset make_dataset(BinaryMatrix features, std::vector<std::uint8_t> labels);
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

// Features with the label appended as the last column, as doubles.
nn::Matrix joint_matrix(const LabeledDataset& ds);
nn::Matrix to_matrix(const BinaryMatrix& m);
// Inverse of joint_matrix for {0,1}-valued input.
LabeledDataset from_joint_bits(std::size_t rows, std::size_t width,
                               const std::vector<std::uint8_t>& bits,
                               std::vector<std::string> feature_columns);

// ---- ingestion -----------------------------------------------------------

RawTable parse_csv(std::istream& in, const std::string& missing_marker, const std::string& origin);
RawTable load_csv(const std::filesystem::path& path, const std::string& missing_marker = "");

// Drops columns whose missing fraction exceeds `threshold` (strictly) and
// imputes the remaining missing cells to 0.
RawTable filter_missing_columns(const RawTable& table, double threshold);

BinaryMatrix to_binary(const RawTable& table);

// Keeps the first occurrence of each row and drops all-zero rows.
BinaryMatrix drop_empty_and_duplicate_rows(const BinaryMatrix& m);
// Labeled variant: emptiness judged on features only, duplicates on
// features + label.
LabeledDataset drop_empty_and_duplicate_rows(const LabeledDataset& ds);

struct PreprocessReport {
  std::size_t input_rows = 0;
  std::size_t input_columns = 0;
  std::vector<std::string> dropped_columns;
  std::size_t imputed_cells = 0;
  std::size_t output_rows = 0;
};

// Full pre-processing: label column split off (must be complete), missingness
// filter on the features, then empty-row and duplicate removal.
LabeledDataset preprocess(const RawTable& table, const std::string& label_column, double threshold,
                          PreprocessReport* report = nullptr);

void save_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path);
LabeledDataset load_dataset_csv(const std::filesystem::path& path);

// ---- folds and sampling --------------------------------------------------

struct FoldSplit {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // fold index per row
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Each class is shuffled by seed and dealt round-robin; the dealing position
// carries over from one class to the next so fold sizes stay within one.
FoldSplit stratified_kfold(const LabeledDataset& ds, std::size_t k, std::uint64_t seed);

// Raised when a pool cannot cover the requested per-class counts.
class PoolShortfall : public Error {
 public:
  PoolShortfall(std::array<std::size_t, 2> requested, std::array<std::size_t, 2> available);

  std::array<std::size_t, 2> requested() const noexcept { return requested_; }
  std::array<std::size_t, 2> available() const noexcept { return available_; }
  std::array<std::size_t, 2> shortfall() const noexcept;

 private:
  std::array<std::size_t, 2> requested_;
  std::array<std::size_t, 2> available_;
};

// Per-class targets for n_target rows where `ratio` is the share of label 1:
// the minority share is rounded, the majority takes the remainder.
std::array<std::size_t, 2> proportional_counts(std::size_t n_target, double ratio);

// Samples without replacement; rows keep their pool order.
LabeledDataset class_proportional_sample(const LabeledDataset& pool, std::size_t n_target,
                                         double ratio, Rng& rng);

// ---- benchmark -----------------------------------------------------------

struct BenchmarkSpec {
  std::size_t n = 3000;
  std::size_t d = 41;
  double class_ratio = 0.8;  // share of label 1
  std::array<std::vector<double>, 2> probabilities;  // per-class Bernoulli parameters
  // Per-class pair coupling: with this probability feature 2m+1 copies
  // feature 2m within a row.
  std::array<double, 2> coupling{0.0, 0.0};
  std::uint64_t seed = 0;
};

// Draws per-class prevalences resembling sparse diagnosis-code data; the
// label-0 class gets elevated rates on a third of the features.
BenchmarkSpec make_benchmark_spec(std::size_t n, std::size_t d, double class_ratio,
                                  std::uint64_t seed, double minority_coupling = 0.0);

LabeledDataset generate_benchmark(const BenchmarkSpec& spec);

}  // namespace synthaug::data
