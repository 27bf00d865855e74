#pragma once

#include <cstddef>
#include <vector>

#include "synthaug/nn/network.hpp"

namespace synthaug::similarity {

inline constexpr std::size_t kDefaultK = 5;

struct PrdcScores {
  double precision = 0.0;
  double recall = 0.0;
  double density = 0.0;
  double coverage = 0.0;
  std::size_t k = kDefaultK;
  std::size_t n_real = 0;
  std::size_t n_synth = 0;
};

// Euclidean distance from each row to its k-th nearest other row (the row
// itself is excluded, equal distances share a rank).
std::vector<double> knn_radii(const nn::Matrix& points, std::size_t k);

// Precision / recall / density / coverage of `synth` against `real` with
// k-NN balls and strict "<" membership. Rows are points.
PrdcScores prdc(const nn::Matrix& real, const nn::Matrix& synth, std::size_t k = kDefaultK);

double prdc_sum(const PrdcScores& s) noexcept;

}  // namespace synthaug::similarity
