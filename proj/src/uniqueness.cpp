#include "synthaug/uniqueness.hpp"

#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "synthaug/error.hpp"

namespace synthaug::uniqueness {

namespace {

std::string row_key(const data::LabeledDataset& ds, std::size_t r) {
  const auto bits = ds.features.row(r);
  std::string key(bits.begin(), bits.end());
  key.push_back(static_cast<char>(ds.labels[r]));
  return key;
}

std::unordered_set<std::string> key_set(const data::LabeledDataset& ds) {
  std::unordered_set<std::string> keys;
  keys.reserve(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) keys.insert(row_key(ds, r));
  return keys;
}

void check_widths(const data::LabeledDataset& train, const data::LabeledDataset& generated) {
  if (train.feature_count() != generated.feature_count())
    throw Error(ErrorCode::dimension_mismatch,
                "uniqueness: training data has " + std::to_string(train.feature_count()) +
                    " features, generated data has " + std::to_string(generated.feature_count()));
}

}  // namespace

UniquenessReport audit(const data::LabeledDataset& train, const data::LabeledDataset& generated) {
  check_widths(train, generated);
  const auto train_keys = key_set(train);
  std::unordered_set<std::string> copies;
  std::unordered_set<std::string> novel;
  UniquenessReport r;
  r.n_generated = generated.size();
  for (std::size_t i = 0; i < generated.size(); ++i) {
    std::string key = row_key(generated, i);
    if (train_keys.count(key)) {
      ++r.n_copy_total;
      copies.insert(std::move(key));
    } else {
      ++r.n_novel_total;
      if (novel.insert(std::move(key)).second) ++r.novel_unique_by_class[generated.labels[i]];
    }
  }
  r.n_copy_distinct = copies.size();
  r.n_novel_unique = novel.size();
  return r;
}

data::LabeledDataset filter_unique_novel(const data::LabeledDataset& train,
                                         const data::LabeledDataset& generated) {
  check_widths(train, generated);
  const auto train_keys = key_set(train);
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    std::string key = row_key(generated, i);
    if (!train_keys.count(key) && seen.insert(std::move(key)).second) keep.push_back(i);
  }
  if (keep.empty())
    throw Error(ErrorCode::empty_result,
                "no novel unique rows among " + std::to_string(generated.size()) +
                    " generated rows (generator collapse)");
  data::LabeledDataset out = generated.select(keep);
  out.features.deduplicated = true;
  return out;
}

data::LabeledDataset distinct_rows(const data::LabeledDataset& ds) {
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (seen.insert(row_key(ds, i)).second) keep.push_back(i);
  data::LabeledDataset out = ds.select(keep);
  out.features.deduplicated = true;
  return out;
}

std::array<double, 4> authenticity_shares(const UniquenessReport& r) {
  if (r.n_generated == 0) return {0.0, 0.0, 0.0, 0.0};
  const double n = static_cast<double>(r.n_generated);
  return {static_cast<double>(r.n_copy_distinct) / n,
          static_cast<double>(r.n_copy_total - r.n_copy_distinct) / n,
          static_cast<double>(r.n_novel_total - r.n_novel_unique) / n,
          static_cast<double>(r.n_novel_unique) / n};
}

std::string authenticity_csv(const std::vector<std::pair<std::string, UniquenessReport>>& reports) {
  std::string out = "model,n_generated,copy_unique,copy_dup,novel_dup,novel_unique\n";
  char buf[160];
  for (const auto& [name, r] : reports) {
    const auto s = authenticity_shares(r);
    std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,%.6f,%.6f\n", r.n_generated, s[0], s[1], s[2],
                  s[3]);
    out += name;
    out += buf;
  }
  return out;
}

}  // namespace synthaug::uniqueness
