#include "synthaug/utility/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "synthaug/error.hpp"

namespace synthaug::utility {

double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorCode::dimension_mismatch, "auc_roc: scores and labels differ in length");
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw Error(ErrorCode::insufficient_data, "auc_roc needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the midrank keeps every quantity an integer.
  std::size_t pos_rank2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::size_t rank2 = i + j + 1;  // 2 * mean of ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) pos_rank2 += rank2;
    i = j;
  }
  const std::size_t u2 = pos_rank2 - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Confusion confusion_metrics(std::span<const std::uint8_t> predictions,
                            std::span<const std::uint8_t> labels) {
  if (predictions.size() != labels.size())
    throw Error(ErrorCode::dimension_mismatch, "confusion_metrics: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  const auto n = static_cast<double>(labels.size());
  c.n_predicted_positive = c.tp + c.fp;
  c.accuracy = n > 0 ? static_cast<double>(c.tp + c.tn) / n : 0.0;
  c.precision_undefined = c.n_predicted_positive == 0;
  c.precision = c.precision_undefined
                    ? 0.0
                    : static_cast<double>(c.tp) / static_cast<double>(c.n_predicted_positive);
  c.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  return c;
}

}  // namespace synthaug::utility
