#include "synthaug/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace synthaug::data {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::string row_key(std::span<const std::uint8_t> bits, std::uint8_t label) {
  std::string key(bits.begin(), bits.end());
  key.push_back(static_cast<char>(label));
  return key;
}

}  // namespace

BinaryMatrix::BinaryMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits,
                           std::vector<std::string> columns)
    : rows_(rows), cols_(cols), bits_(std::move(bits)), columns_(std::move(columns)) {
  if (bits_.size() != rows_ * cols_)
    throw Error(ErrorCode::dimension_mismatch, "BinaryMatrix: bit count does not match shape");
  if (columns_.empty()) {
    for (std::size_t c = 0; c < cols_; ++c) columns_.push_back("f" + std::to_string(c));
  } else if (columns_.size() != cols_) {
    throw Error(ErrorCode::dimension_mismatch, "BinaryMatrix: column name count does not match");
  }
  for (std::uint8_t b : bits_)
    if (b > 1) throw Error(ErrorCode::invalid_argument, "BinaryMatrix: entries must be 0 or 1");
}

std::size_t LabeledDataset::class_count(std::uint8_t label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

std::array<std::size_t, 2> LabeledDataset::class_counts() const {
  return {class_count(0), class_count(1)};
}

std::vector<std::size_t> LabeledDataset::indices_of(std::uint8_t label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

LabeledDataset LabeledDataset::select(std::span<const std::size_t> rows) const {
  const std::size_t d = features.cols();
  std::vector<std::uint8_t> bits;
  bits.reserve(rows.size() * d);
  std::vector<std::uint8_t> lab;
  lab.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw Error(ErrorCode::invalid_argument, "select: row index out of range");
    auto src = features.row(r);
    bits.insert(bits.end(), src.begin(), src.end());
    lab.push_back(labels[r]);
  }
  return {BinaryMatrix(rows.size(), d, std::move(bits), features.columns()), std::move(lab)};
}

LabeledDataset make_dataset(BinaryMatrix features, std::vector<std::uint8_t> labels) {
  if (labels.size() != features.rows())
    throw Error(ErrorCode::dimension_mismatch, "dataset: label count does not match row count");
  for (std::uint8_t l : labels)
    if (l > 1) throw Error(ErrorCode::invalid_argument, "dataset: labels must be 0 or 1");
  return {std::move(features), std::move(labels)};
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.feature_count() != b.feature_count())
    throw Error(ErrorCode::dimension_mismatch, "concat: feature widths differ");
  std::vector<std::uint8_t> bits = a.features.bits();
  bits.insert(bits.end(), b.features.bits().begin(), b.features.bits().end());
  std::vector<std::uint8_t> labels = a.labels;
  labels.insert(labels.end(), b.labels.begin(), b.labels.end());
  return {BinaryMatrix(a.size() + b.size(), a.feature_count(), std::move(bits), a.features.columns()),
          std::move(labels)};
}

nn::Matrix to_matrix(const BinaryMatrix& m) {
  nn::Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.bits().size(); ++i) out.data()[i] = m.bits()[i];
  return out;
}

nn::Matrix joint_matrix(const LabeledDataset& ds) {
  const std::size_t d = ds.feature_count();
  nn::Matrix out(ds.size(), d + 1);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    auto row = ds.features.row(r);
    for (std::size_t c = 0; c < d; ++c) out(r, c) = row[c];
    out(r, d) = ds.labels[r];
  }
  return out;
}

LabeledDataset from_joint_bits(std::size_t rows, std::size_t width,
                               const std::vector<std::uint8_t>& bits,
                               std::vector<std::string> feature_columns) {
  if (width < 1 || bits.size() != rows * width)
    throw Error(ErrorCode::dimension_mismatch, "from_joint_bits: shape mismatch");
  const std::size_t d = width - 1;
  std::vector<std::uint8_t> features;
  features.reserve(rows * d);
  std::vector<std::uint8_t> labels(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto* row = bits.data() + r * width;
    features.insert(features.end(), row, row + d);
    labels[r] = row[d];
  }
  return make_dataset(BinaryMatrix(rows, d, std::move(features), std::move(feature_columns)),
                      std::move(labels));
}

RawTable parse_csv(std::istream& in, const std::string& missing_marker, const std::string& origin) {
  RawTable t;
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse_error, origin + ": missing header row");
  t.columns = split_line(line);
  std::unordered_set<std::string> seen;
  for (const auto& c : t.columns)
    if (!seen.insert(c).second)
      throw Error(ErrorCode::parse_error, origin + ": duplicate column name '" + c + "'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != t.columns.size())
      throw Error(ErrorCode::parse_error, origin + ": row " + std::to_string(t.rows + 1) +
                                              " (line " + std::to_string(line_no) + ") has " +
                                              std::to_string(fields.size()) + " cells, expected " +
                                              std::to_string(t.columns.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      if (f == missing_marker) t.cells.push_back(Cell::missing);
      else if (f == "0") t.cells.push_back(Cell::zero);
      else if (f == "1") t.cells.push_back(Cell::one);
      else
        throw Error(ErrorCode::parse_error, origin + ": row " + std::to_string(t.rows + 1) +
                                                ", column '" + t.columns[c] + "': invalid cell '" +
                                                f + "'");
    }
    ++t.rows;
  }
  return t;
}

RawTable load_csv(const std::filesystem::path& path, const std::string& missing_marker) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return parse_csv(in, missing_marker, path.string());
}

RawTable filter_missing_columns(const RawTable& table, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::invalid_argument, "missingness threshold must be in (0, 1]");
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    std::size_t missing = 0;
    for (std::size_t r = 0; r < table.rows; ++r) missing += table.at(r, c) == Cell::missing;
    const double frac =
        table.rows == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(table.rows);
    if (!(frac > threshold)) keep.push_back(c);
  }
  if (keep.empty())
    throw Error(ErrorCode::empty_result, "missingness filter removed every column");
  RawTable out;
  out.rows = table.rows;
  for (std::size_t c : keep) out.columns.push_back(table.columns[c]);
  out.cells.reserve(out.rows * keep.size());
  for (std::size_t r = 0; r < table.rows; ++r)
    for (std::size_t c : keep) {
      const Cell v = table.at(r, c);
      out.cells.push_back(v == Cell::missing ? Cell::zero : v);
    }
  return out;
}

BinaryMatrix to_binary(const RawTable& table) {
  std::vector<std::uint8_t> bits(table.cells.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (table.cells[i] == Cell::missing)
      throw Error(ErrorCode::invalid_argument, "to_binary: table still has missing cells");
    bits[i] = static_cast<std::uint8_t>(table.cells[i]);
  }
  return BinaryMatrix(table.rows, table.cols(), std::move(bits), table.columns);
}

BinaryMatrix drop_empty_and_duplicate_rows(const BinaryMatrix& m) {
  std::unordered_set<std::string> seen;
  std::vector<std::uint8_t> bits;
  std::size_t rows = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    if (std::none_of(row.begin(), row.end(), [](std::uint8_t b) { return b != 0; })) continue;
    if (!seen.insert(std::string(row.begin(), row.end())).second) continue;
    bits.insert(bits.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::empty_result, "no rows left after removing empty/duplicate rows");
  BinaryMatrix out(rows, m.cols(), std::move(bits), m.columns());
  out.deduplicated = true;
  out.no_empty_rows = true;
  return out;
}

LabeledDataset drop_empty_and_duplicate_rows(const LabeledDataset& ds) {
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    auto row = ds.features.row(r);
    if (std::none_of(row.begin(), row.end(), [](std::uint8_t b) { return b != 0; })) continue;
    if (!seen.insert(row_key(row, ds.labels[r])).second) continue;
    keep.push_back(r);
  }
  if (keep.empty())
    throw Error(ErrorCode::empty_result, "no rows left after removing empty/duplicate rows");
  LabeledDataset out = ds.select(keep);
  out.features.deduplicated = true;
  out.features.no_empty_rows = true;
  return out;
}

LabeledDataset preprocess(const RawTable& table, const std::string& label_column, double threshold,
                          PreprocessReport* report) {
  const auto it = std::find(table.columns.begin(), table.columns.end(), label_column);
  if (it == table.columns.end())
    throw Error(ErrorCode::invalid_argument, "label column '" + label_column + "' not found");
  const auto label_idx = static_cast<std::size_t>(it - table.columns.begin());
  if (table.cols() < 2) throw Error(ErrorCode::invalid_argument, "table has no feature columns");

  std::vector<std::uint8_t> labels(table.rows);
  RawTable features;
  features.rows = table.rows;
  for (std::size_t c = 0; c < table.cols(); ++c)
    if (c != label_idx) features.columns.push_back(table.columns[c]);
  features.cells.reserve(table.rows * features.cols());
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const Cell v = table.at(r, c);
      if (c == label_idx) {
        if (v == Cell::missing)
          throw Error(ErrorCode::invalid_argument,
                      "label missing in row " + std::to_string(r + 1));
        labels[r] = static_cast<std::uint8_t>(v);
      } else {
        features.cells.push_back(v);
      }
    }
  }
  const RawTable filtered = filter_missing_columns(features, threshold);
  LabeledDataset ds = drop_empty_and_duplicate_rows(make_dataset(to_binary(filtered), labels));
  if (report) {
    report->input_rows = table.rows;
    report->input_columns = table.cols();
    report->dropped_columns.clear();
    for (const auto& c : features.columns)
      if (std::find(filtered.columns.begin(), filtered.columns.end(), c) == filtered.columns.end())
        report->dropped_columns.push_back(c);
    std::size_t missing_after = 0;
    for (std::size_t c = 0; c < features.cols(); ++c) {
      if (std::find(filtered.columns.begin(), filtered.columns.end(), features.columns[c]) ==
          filtered.columns.end())
        continue;
      for (std::size_t r = 0; r < features.rows; ++r)
        missing_after += features.at(r, c) == Cell::missing;
    }
    report->imputed_cells = missing_after;
    report->output_rows = ds.size();
  }
  return ds;
}

void save_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  for (const auto& c : ds.features.columns()) out << c << ',';
  out << kLabelColumn << '\n';
  std::string line;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    line.clear();
    for (std::uint8_t b : ds.features.row(r)) {
      line.push_back(static_cast<char>('0' + b));
      line.push_back(',');
    }
    line.push_back(static_cast<char>('0' + ds.labels[r]));
    line.push_back('\n');
    out << line;
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

LabeledDataset load_dataset_csv(const std::filesystem::path& path) {
  // No cell may match the marker; "\x01" never appears in a valid file.
  const RawTable t = load_csv(path, std::string(1, '\x01'));
  const auto it = std::find(t.columns.begin(), t.columns.end(), kLabelColumn);
  if (it == t.columns.end())
    throw Error(ErrorCode::parse_error, path.string() + ": no " + kLabelColumn + " column");
  const auto label_idx = static_cast<std::size_t>(it - t.columns.begin());
  std::vector<std::string> names;
  for (std::size_t c = 0; c < t.cols(); ++c)
    if (c != label_idx) names.push_back(t.columns[c]);
  std::vector<std::uint8_t> bits;
  bits.reserve(t.rows * names.size());
  std::vector<std::uint8_t> labels(t.rows);
  for (std::size_t r = 0; r < t.rows; ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) {
      const auto v = static_cast<std::uint8_t>(t.at(r, c));
      if (c == label_idx) labels[r] = v;
      else bits.push_back(v);
    }
  const std::size_t d = names.size();
  return make_dataset(BinaryMatrix(t.rows, d, std::move(bits), std::move(names)),
                      std::move(labels));
}

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

FoldSplit stratified_kfold(const LabeledDataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::invalid_argument, "stratified_kfold: k must be >= 2");
  const auto counts = ds.class_counts();
  for (std::uint8_t c = 0; c < 2; ++c)
    if (counts[c] == 0)
      throw Error(ErrorCode::insufficient_data,
                  "stratified_kfold: class " + std::to_string(c) + " is absent");
  if (ds.size() < k)
    throw Error(ErrorCode::insufficient_data, "stratified_kfold: " + std::to_string(ds.size()) +
                                                  " rows cannot fill k=" + std::to_string(k) +
                                                  " folds");
  FoldSplit split{k, std::vector<std::size_t>(ds.size()), seed};
  Rng rng = make_rng(seed);
  std::size_t next = 0;
  for (std::uint8_t c = 0; c < 2; ++c) {
    auto idx = ds.indices_of(c);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) {
      split.assignment[i] = next;
      next = (next + 1) % k;
    }
  }
  return split;
}

PoolShortfall::PoolShortfall(std::array<std::size_t, 2> requested,
                             std::array<std::size_t, 2> available)
    : Error(ErrorCode::pool_shortfall,
            "pool shortfall: class 0 needs " + std::to_string(requested[0]) + " (has " +
                std::to_string(available[0]) + "), class 1 needs " +
                std::to_string(requested[1]) + " (has " + std::to_string(available[1]) + ")"),
      requested_(requested),
      available_(available) {}

std::array<std::size_t, 2> PoolShortfall::shortfall() const noexcept {
  return {requested_[0] > available_[0] ? requested_[0] - available_[0] : 0,
          requested_[1] > available_[1] ? requested_[1] - available_[1] : 0};
}

std::array<std::size_t, 2> proportional_counts(std::size_t n_target, double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw Error(ErrorCode::invalid_argument, "class ratio must be in [0, 1]");
  const double n = static_cast<double>(n_target);
  if (ratio >= 0.5) {
    const auto minority = static_cast<std::size_t>(std::llround(n * (1.0 - ratio)));
    return {minority, n_target - minority};
  }
  const auto minority = static_cast<std::size_t>(std::llround(n * ratio));
  return {n_target - minority, minority};
}

LabeledDataset class_proportional_sample(const LabeledDataset& pool, std::size_t n_target,
                                         double ratio, Rng& rng) {
  const auto want = proportional_counts(n_target, ratio);
  const auto have = pool.class_counts();
  if (want[0] > have[0] || want[1] > have[1]) throw PoolShortfall(want, have);
  std::vector<std::size_t> chosen;
  chosen.reserve(n_target);
  for (std::uint8_t c = 0; c < 2; ++c) {
    auto idx = pool.indices_of(c);
    // Partial Fisher-Yates: the first want[c] slots become a uniform sample.
    for (std::size_t i = 0; i < want[c]; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want[c]));
  }
  std::sort(chosen.begin(), chosen.end());
  return pool.select(chosen);
}

BenchmarkSpec make_benchmark_spec(std::size_t n, std::size_t d, double class_ratio,
                                  std::uint64_t seed, double minority_coupling) {
  BenchmarkSpec spec;
  spec.n = n;
  spec.d = d;
  spec.class_ratio = class_ratio;
  spec.seed = seed;
  spec.coupling = {minority_coupling, 0.0};
  Rng rng = make_rng(derive_seed(seed, {stage_id("benchmark-spec")}));
  std::uniform_real_distribution<double> base(0.02, 0.25);
  std::uniform_real_distribution<double> lift(1.5, 3.0);
  std::uniform_real_distribution<double> damp(0.4, 0.8);
  spec.probabilities[0].resize(d);
  spec.probabilities[1].resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double p = base(rng);
    spec.probabilities[1][j] = p;
    switch (j % 3) {
      case 0: spec.probabilities[0][j] = std::min(0.9, p * lift(rng)); break;
      case 1: spec.probabilities[0][j] = p * damp(rng); break;
      default: spec.probabilities[0][j] = p; break;
    }
  }
  return spec;
}

LabeledDataset generate_benchmark(const BenchmarkSpec& spec) {
  if (spec.d == 0 || spec.n == 0)
    throw Error(ErrorCode::invalid_argument, "benchmark: n and d must be positive");
  for (const auto& probs : spec.probabilities) {
    if (probs.size() != spec.d)
      throw Error(ErrorCode::invalid_argument, "benchmark: probability vector length must equal d");
    for (double p : probs)
      if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::invalid_argument, "benchmark: probabilities must lie in [0, 1]");
  }
  for (double c : spec.coupling)
    if (!(c >= 0.0 && c <= 1.0))
      throw Error(ErrorCode::invalid_argument, "benchmark: coupling must lie in [0, 1]");

  const auto counts = proportional_counts(spec.n, spec.class_ratio);
  Rng rng = make_rng(derive_seed(spec.seed, {stage_id("benchmark-rows")}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::unordered_set<std::string> seen;
  std::vector<std::uint8_t> bits;
  bits.reserve(spec.n * spec.d);
  std::vector<std::uint8_t> labels;
  labels.reserve(spec.n);
  std::vector<std::uint8_t> row(spec.d);
  for (std::uint8_t c = 0; c < 2; ++c) {
    const std::size_t max_draws = 50 * counts[c] + 1000;
    std::size_t accepted = 0;
    for (std::size_t draw = 0; accepted < counts[c]; ++draw) {
      if (draw == max_draws)
        throw Error(ErrorCode::insufficient_data,
                    "benchmark: only " + std::to_string(accepted) + " distinct non-empty rows of class " +
                        std::to_string(c) + " after " + std::to_string(max_draws) + " draws");
      for (std::size_t j = 0; j < spec.d; ++j)
        row[j] = u(rng) < spec.probabilities[c][j] ? 1 : 0;
      for (std::size_t j = 0; j + 1 < spec.d; j += 2)
        if (u(rng) < spec.coupling[c]) row[j + 1] = row[j];
      if (std::none_of(row.begin(), row.end(), [](std::uint8_t b) { return b != 0; })) continue;
      if (!seen.insert(row_key(row, c)).second) continue;
      bits.insert(bits.end(), row.begin(), row.end());
      labels.push_back(c);
      ++accepted;
    }
  }
  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  LabeledDataset all = make_dataset(BinaryMatrix(spec.n, spec.d, std::move(bits)), std::move(labels));
  LabeledDataset out = all.select(order);
  out.features.deduplicated = true;
  out.features.no_empty_rows = true;
  return out;
}

}  // namespace synthaug::data
