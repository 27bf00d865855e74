#pragma once

#include <utility>
#include <vector>

#include "synthaug/generators/model.hpp"

namespace synthaug::gen::detail {

using Condition = std::pair<std::size_t, std::size_t>;  // (column, category)

// One-hot rows over 2 * columns slots; slot 2j + c encodes (j, c).
nn::Matrix condition_matrix(const std::vector<Condition>& conds, std::size_t columns);

// [noise | condition] for the CTGAN generator; the condition block is omitted
// for unconditional models.
nn::Matrix ctgan_generator_input(const CtGanModel& model, const nn::Matrix& noise,
                                 const nn::Matrix& cond);

// Wraps non-finite failures with the epoch and batch they occurred in.
[[noreturn]] void rethrow_at(const Error& e, std::size_t epoch, std::size_t batch);

void require_trainable(const data::LabeledDataset& data);

nn::Matrix gather_rows(const nn::Matrix& m, const std::size_t* rows, std::size_t count);

// Shuffled batch boundaries over n rows. With drop_last, a trailing partial
// batch is dropped unless it would be the only one.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch,
                                                              bool drop_last);

// Runs the epoch hook and appends the record.
void finish_epoch(TrainingTrace& trace, EpochRecord record, const TrainOptions& options,
                  const GeneratorModel& model);

}  // namespace synthaug::gen::detail
