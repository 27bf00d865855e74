#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace synthaug::utility {

// Mann-Whitney AUC: (concordant + 0.5 * tied pairs) / (n_pos * n_neg), via
// midranks. Throws insufficient_data unless both classes are present.
double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when no positives exist
  bool precision_undefined = false;
  std::size_t n_predicted_positive = 0;
};

Confusion confusion_metrics(std::span<const std::uint8_t> predictions,
                            std::span<const std::uint8_t> labels);

}  // namespace synthaug::utility
