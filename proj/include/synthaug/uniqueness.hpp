#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "synthaug/data.hpp"

namespace synthaug::uniqueness {

// Copy/novel accounting of a generated batch. Rows match exactly, label
// included.
struct UniquenessReport {
  std::size_t n_generated = 0;
  std::size_t n_copy_total = 0;     // rows equal to some training row
  std::size_t n_copy_distinct = 0;  // distinct training rows hit
  std::size_t n_novel_total = 0;
  std::size_t n_novel_unique = 0;   // distinct novel rows
  std::array<std::size_t, 2> novel_unique_by_class{0, 0};
};

UniquenessReport audit(const data::LabeledDataset& train, const data::LabeledDataset& generated);

// Distinct generated rows absent from train, in first-occurrence order.
// Throws empty_result when nothing survives.
data::LabeledDataset filter_unique_novel(const data::LabeledDataset& train,
                                         const data::LabeledDataset& generated);

// First occurrence of every distinct row.
data::LabeledDataset distinct_rows(const data::LabeledDataset& ds);

// Stacked shares in the order copy-unique, copy-dup, novel-dup, novel-unique;
// they sum to 1.
std::array<double, 4> authenticity_shares(const UniquenessReport& r);

// One CSV row per named report with the four shares.
std::string authenticity_csv(const std::vector<std::pair<std::string, UniquenessReport>>& reports);

}  // namespace synthaug::uniqueness
