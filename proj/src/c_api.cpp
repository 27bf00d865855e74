#include "synthaug/synthaug.h"

#include <cstring>
#include <new>
#include <string>

#include "synthaug/data.hpp"
#include "synthaug/experiment.hpp"
#include "synthaug/generators/checkpoint.hpp"
#include "synthaug/report_json.hpp"
#include "synthaug/similarity.hpp"
#include "synthaug/uniqueness.hpp"
#include "synthaug/utility/protocol.hpp"

struct sa_dataset {
  synthaug::data::LabeledDataset ds;
};

struct sa_model {
  synthaug::gen::GeneratorModel model;
};

namespace {

using synthaug::Error;
using synthaug::ErrorCode;
using synthaug::Json;
namespace data = synthaug::data;
namespace gen = synthaug::gen;
namespace ex = synthaug::experiment;
namespace utility = synthaug::utility;

thread_local std::string last_error;

sa_status fail(sa_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
sa_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SA_OK;
  } catch (const Error& e) {
    return fail(static_cast<sa_status>(static_cast<int>(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SA_PARSE_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SA_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(SA_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(SA_INTERNAL_ERROR, "unknown exception");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

Json parse(const char* text, const char* what) {
  if (!text || !*text) return Json::object();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string(what) + ": " + e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const Json& j) {
  if (out) *out = dup_string(j.dump(2));
}

sa_dataset* wrap(data::LabeledDataset ds) { return new sa_dataset{std::move(ds)}; }

template <class T>
void read(const Json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) field = it->get<T>();
}

}  // namespace

extern "C" {

const char* sa_version(void) { return "0.3.0"; }

const char* sa_last_error(void) { return last_error.c_str(); }

const char* sa_status_name(sa_status status) {
  switch (status) {
    case SA_OK: return "ok";
    case SA_INVALID_ARGUMENT: return "invalid_argument";
    case SA_DIMENSION_MISMATCH: return "dimension_mismatch";
    case SA_NON_FINITE: return "non_finite";
    case SA_PARSE_ERROR: return "parse_error";
    case SA_IO_ERROR: return "io_error";
    case SA_INSUFFICIENT_DATA: return "insufficient_data";
    case SA_POOL_SHORTFALL: return "pool_shortfall";
    case SA_EMPTY_RESULT: return "empty_result";
    case SA_TRAINING_FAILURE: return "training_failure";
    case SA_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

void sa_string_free(char* s) { std::free(s); }

sa_status sa_dataset_load(const char* path, sa_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(data::load_dataset_csv(path));
  });
}

sa_status sa_dataset_save(const sa_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    data::save_dataset_csv(ds->ds, path);
  });
}

sa_status sa_dataset_create(size_t rows, size_t n_features, const uint8_t* features,
                            const uint8_t* labels, sa_dataset** out) {
  return guarded([&] {
    require(out, "out");
    if (rows > 0) {
      require(labels, "labels");
      if (n_features > 0) require(features, "features");
    }
    std::vector<std::uint8_t> bits(features, features + rows * n_features);
    std::vector<std::uint8_t> y(labels, labels + rows);
    *out = wrap(data::make_dataset(data::BinaryMatrix(rows, n_features, std::move(bits)), std::move(y)));
  });
}

void sa_dataset_free(sa_dataset* ds) { delete ds; }

size_t sa_dataset_rows(const sa_dataset* ds) { return ds ? ds->ds.size() : 0; }

size_t sa_dataset_features(const sa_dataset* ds) { return ds ? ds->ds.feature_count() : 0; }

sa_status sa_dataset_copy(const sa_dataset* ds, uint8_t* features, uint8_t* labels) {
  return guarded([&] {
    require(ds, "dataset");
    const auto& bits = ds->ds.features.bits();
    if (features) std::copy(bits.begin(), bits.end(), features);
    if (labels) std::copy(ds->ds.labels.begin(), ds->ds.labels.end(), labels);
  });
}

sa_status sa_preprocess(const char* csv_path, const char* options_json, sa_dataset** out,
                        char** report_json) {
  return guarded([&] {
    require(csv_path, "csv path");
    require(out, "out");
    const Json opt = parse(options_json, "preprocess options");
    synthaug::reject_unknown_keys(opt, {"label_column", "threshold", "missing_marker"},
                                  "preprocess options");
    std::string label = data::kLabelColumn, marker;
    double threshold = 0.5;
    read(opt, "label_column", label);
    read(opt, "threshold", threshold);
    read(opt, "missing_marker", marker);
    data::PreprocessReport report;
    data::LabeledDataset ds =
        data::preprocess(data::load_csv(csv_path, marker), label, threshold, &report);
    emit(report_json, Json{{"input_rows", report.input_rows},
                           {"input_columns", report.input_columns},
                           {"dropped_columns", report.dropped_columns},
                           {"imputed_cells", report.imputed_cells},
                           {"output_rows", report.output_rows},
                           {"features", ds.feature_count()},
                           {"class_counts", ds.class_counts()}});
    *out = wrap(std::move(ds));
  });
}

sa_status sa_benchmark_generate(const char* options_json, sa_dataset** out) {
  return guarded([&] {
    require(out, "out");
    const Json opt = parse(options_json, "benchmark options");
    synthaug::reject_unknown_keys(opt, {"n", "d", "class_ratio", "minority_coupling", "seed"},
                                  "benchmark options");
    ex::DatasetSource src;
    read(opt, "n", src.benchmark.n);
    read(opt, "d", src.benchmark.d);
    read(opt, "class_ratio", src.benchmark.class_ratio);
    read(opt, "minority_coupling", src.benchmark.minority_coupling);
    read(opt, "seed", src.benchmark.seed);
    *out = wrap(ex::load_source(src));
  });
}

sa_status sa_tune(const sa_dataset* ds, const char* grid_json, char** result_json) {
  return guarded([&] {
    require(ds, "dataset");
    require(result_json, "result");
    const ex::GridSpec grid = ex::grid_from_json(parse(grid_json, "grid"));
    emit(result_json, ex::to_json(ex::grid_search(grid, ds->ds)));
  });
}

sa_status sa_train(const sa_dataset* ds, const char* generator_json, sa_model** out,
                   char** trace_json) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    const gen::AnyConfig cfg = gen::config_from_json(parse(generator_json, "generator"));
    gen::TrainResult r = gen::train(ds->ds, cfg);
    emit(trace_json, Json(r.trace));
    *out = new sa_model{std::move(r.model)};
  });
}

sa_status sa_model_save(const sa_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    gen::save_checkpoint(model->model, path);
  });
}

sa_status sa_model_load(const char* path, sa_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sa_model{gen::load_checkpoint(path)};
  });
}

void sa_model_free(sa_model* model) { delete model; }

sa_status sa_model_info(const sa_model* model, char** info_json) {
  return guarded([&] {
    require(model, "model");
    require(info_json, "info");
    const Json j = gen::model_to_json(model->model);
    Json info{{"family", gen::to_string(model->model.family())},
              {"features", model->model.feature_columns.size()},
              {"feature_columns", model->model.feature_columns}};
    if (auto it = j.find("config"); it != j.end()) info["config"] = *it;
    emit(info_json, info);
  });
}

sa_status sa_generate(const sa_model* model, size_t n, uint64_t seed, sa_dataset** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    synthaug::Rng rng = synthaug::make_rng(seed);
    *out = wrap(gen::generate(model->model, n, rng));
  });
}

sa_status sa_audit(const sa_dataset* train, const sa_dataset* generated, char** report_json) {
  return guarded([&] {
    require(train, "train");
    require(generated, "generated");
    require(report_json, "report");
    emit(report_json, Json(synthaug::uniqueness::audit(train->ds, generated->ds)));
  });
}

sa_status sa_filter_unique_novel(const sa_dataset* train, const sa_dataset* generated,
                                 sa_dataset** out) {
  return guarded([&] {
    require(train, "train");
    require(generated, "generated");
    require(out, "out");
    *out = wrap(synthaug::uniqueness::filter_unique_novel(train->ds, generated->ds));
  });
}

sa_status sa_prdc(const sa_dataset* real, const sa_dataset* synth, size_t k, char** scores_json) {
  return guarded([&] {
    require(real, "real");
    require(synth, "synth");
    require(scores_json, "scores");
    const auto s = synthaug::similarity::prdc(data::joint_matrix(real->ds),
                                              data::joint_matrix(synth->ds), k);
    Json j = s;
    j["sum"] = synthaug::similarity::prdc_sum(s);
    emit(scores_json, j);
  });
}

sa_status sa_utility(const sa_dataset* ds, const sa_dataset* pool, const char* options_json,
                     char** report_json) {
  return guarded([&] {
    require(ds, "dataset");
    require(report_json, "report");
    const Json opt = parse(options_json, "utility options");
    synthaug::reject_unknown_keys(opt, {"settings", "folds", "repetitions", "seed", "classifiers",
                                        "classifier_params", "threads"},
                                  "utility options");
    std::vector<std::string> settings{"A", "B", "original", "upsampled", "downsampled"};
    std::size_t folds = 5, reps = 10;
    std::uint64_t seed = 0;
    utility::SuiteConfig suite;
    read(opt, "settings", settings);
    read(opt, "folds", folds);
    read(opt, "repetitions", reps);
    read(opt, "seed", seed);
    read(opt, "threads", suite.threads);
    read(opt, "classifier_params", suite.params);
    if (auto it = opt.find("classifiers"); it != opt.end()) {
      suite.kinds.clear();
      for (const auto& n : *it) suite.kinds.push_back(utility::classifier_from_string(n));
    }
    for (const auto& s : settings) {
      if (s != "A" && s != "B" && s != "original" && s != "upsampled" && s != "downsampled")
        throw Error(ErrorCode::invalid_argument, "unknown utility setting '" + s + "'");
      if ((s == "A" || s == "B") && !pool)
        throw Error(ErrorCode::invalid_argument, "setting " + s + " needs a synthetic pool");
    }

    const data::FoldSplit split =
        data::stratified_kfold(ds->ds, folds, synthaug::derive_seed(seed, {synthaug::stage_id("folds")}));
    std::vector<std::vector<utility::UtilityReport>> parts(settings.size());
    for (std::size_t f = 0; f < folds; ++f) {
      const utility::FoldData fold = utility::make_fold(ds->ds, split, f);
      const std::uint64_t fseed = synthaug::derive_seed(seed, {f, synthaug::stage_id("utility")});
      for (std::size_t i = 0; i < settings.size(); ++i) {
        const std::string& s = settings[i];
        if (s == "A")
          parts[i].push_back(utility::setting_a(fold, pool->ds, reps, fseed, suite));
        else if (s == "B")
          parts[i].push_back(utility::setting_b(fold, pool->ds, reps, fseed, suite));
        else
          parts[i].push_back(utility::baseline(
              fold,
              s == "original"    ? utility::Baseline::original
              : s == "upsampled" ? utility::Baseline::upsampled
                                 : utility::Baseline::downsampled,
              reps, fseed, suite));
      }
    }
    Json out = Json::object();
    for (std::size_t i = 0; i < settings.size(); ++i) out[settings[i]] = utility::merge(parts[i]);
    emit(report_json, out);
  });
}

sa_status sa_run_experiment(const char* config_json, char** summary_json) {
  return guarded([&] {
    const ex::ExperimentConfig cfg = ex::experiment_from_json(parse(config_json, "config"));
    const ex::RunResult r = ex::run_experiment(cfg);
    emit(summary_json, Json{{"output_dir", r.dir.string()},
                            {"aggregate", r.results.at("aggregate")},
                            {"manifest", r.manifest}});
  });
}

sa_status sa_export_figures(const char* run_dir, const char* out_dir) {
  return guarded([&] {
    require(run_dir, "run directory");
    require(out_dir, "output directory");
    ex::export_figures(run_dir, out_dir);
  });
}

}  // extern "C"
