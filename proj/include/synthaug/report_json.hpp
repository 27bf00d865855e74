#pragma once

// JSON conversions for configs, reports and models (nlohmann ADL hooks).

#include <initializer_list>
#include <string>

#include "json.hpp"
#include "synthaug/generators/model.hpp"
#include "synthaug/similarity.hpp"
#include "synthaug/uniqueness.hpp"
#include "synthaug/utility/protocol.hpp"

namespace synthaug {

using Json = nlohmann::json;

// Throws invalid_argument if obj holds a key outside `allowed`.
void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const char* what);

namespace nn {
// Eigen types are not reachable by ADL, so matrices convert explicitly.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
void to_json(Json& j, const DpSgdConfig& c);
void from_json(const Json& j, DpSgdConfig& c);
void to_json(Json& j, const Network& net);
void from_json(const Json& j, Network& net);
}  // namespace nn

namespace similarity {
void to_json(Json& j, const PrdcScores& s);
void from_json(const Json& j, PrdcScores& s);
}  // namespace similarity

namespace gen {
void to_json(Json& j, const VaeConfig& c);
void from_json(const Json& j, VaeConfig& c);
void to_json(Json& j, const DpGanConfig& c);
void from_json(const Json& j, DpGanConfig& c);
void to_json(Json& j, const CtGanConfig& c);
void from_json(const Json& j, CtGanConfig& c);
void to_json(Json& j, const EpochRecord& r);
void to_json(Json& j, const TrainingTrace& t);

// Family-tagged generator config: {"family": ..., "config": {...}}. A
// missing "config" object means family defaults.
Json config_to_json(const AnyConfig& c);
AnyConfig config_from_json(const Json& j);
}  // namespace gen

namespace uniqueness {
void to_json(Json& j, const UniquenessReport& r);
void from_json(const Json& j, UniquenessReport& r);
}  // namespace uniqueness

namespace utility {
void to_json(Json& j, const EvalResult& r);
void to_json(Json& j, const Summary& s);
void to_json(Json& j, const CellResult& c);
// Cells plus best-per-cell and per-classifier summaries.
void to_json(Json& j, const UtilityReport& r);
void to_json(Json& j, const ClassifierParams& p);
void from_json(const Json& j, ClassifierParams& p);
}  // namespace utility

}  // namespace synthaug
