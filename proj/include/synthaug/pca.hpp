#pragma once

#include <array>

#include "synthaug/data.hpp"
#include "synthaug/nn/network.hpp"

namespace synthaug {

struct Pca2d {
  nn::Matrix coords;      // n x 2
  nn::Matrix components;  // 2 x d, orthonormal rows
  std::array<double, 2> explained_variance{0.0, 0.0};
  std::array<double, 2> explained_ratio{0.0, 0.0};
};

// Top two principal axes of the sample covariance (n - 1 denominator) by power
// iteration with deflation. Each axis is signed so its largest-magnitude
// loading is positive.
Pca2d pca_2d(const nn::Matrix& x);

// Features only; the label is not part of the embedding.
Pca2d pca_2d(const data::LabeledDataset& ds);

}  // namespace synthaug
