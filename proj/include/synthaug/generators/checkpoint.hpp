#pragma once

#include <filesystem>

#include "synthaug/generators/model.hpp"
#include "synthaug/report_json.hpp"

namespace synthaug::gen {

inline constexpr int kCheckpointVersion = 1;

Json model_to_json(const GeneratorModel& model);
GeneratorModel model_from_json(const Json& j);

// JSON container; doubles are written with round-trip precision, so a loaded
// model generates bit-identical output.
void save_checkpoint(const GeneratorModel& model, const std::filesystem::path& path);
GeneratorModel load_checkpoint(const std::filesystem::path& path);

}  // namespace synthaug::gen
