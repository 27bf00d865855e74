// Command-line driver over the synthaug C interface.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "synthaug/synthaug.h"

namespace {

using Json = nlohmann::json;

struct Failure {
  sa_status status;
};

void check(sa_status s) {
  if (s != SA_OK) throw Failure{s};
}

struct DatasetDeleter {
  void operator()(sa_dataset* d) const { sa_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(sa_model* m) const { sa_model_free(m); }
};
using Dataset = std::unique_ptr<sa_dataset, DatasetDeleter>;
using Model = std::unique_ptr<sa_model, ModelDeleter>;

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s ? s : "";
  sa_string_free(s);
  return out;
}

Dataset load_dataset(const std::string& path) {
  sa_dataset* d = nullptr;
  check(sa_dataset_load(path.c_str(), &d));
  return Dataset(d);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    throw Failure{SA_IO_ERROR};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_file(const std::string& path) {
  try {
    return Json::parse(slurp(path));
  } catch (const Json::exception& e) {
    std::cerr << "error: " << path << ": " << e.what() << "\n";
    throw Failure{SA_PARSE_ERROR};
  }
}

// Writes to path, or stdout when path is empty.
void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{SA_IO_ERROR};
  }
  out << text << "\n";
}

std::string authenticity_csv(const Json& report, const std::string& name) {
  const Json& s = report.at("shares");
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f,%.6f", name.c_str(),
                report.at("n_generated").get<std::size_t>(), s.at("copy_unique").get<double>(),
                s.at("copy_dup").get<double>(), s.at("novel_dup").get<double>(),
                s.at("novel_unique").get<double>());
  return std::string("model,n_generated,copy_unique,copy_dup,novel_dup,novel_unique\n") + buf;
}

Json generator_spec(const std::string& config_path, const std::string& family) {
  Json g = config_path.empty() ? Json{{"family", family}, {"config", Json::object()}}
                               : parse_file(config_path);
  if (!g.contains("family")) g = Json{{"family", family}, {"config", g}};
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic tabular data generation, auditing and utility evaluation"};
  app.set_version_flag("--version", std::string(sa_version()));
  app.require_subcommand(1);

  std::string input, output, label = "__label__", marker, report;
  double threshold = 0.5;
  auto* pre = app.add_subcommand("preprocess", "Clean a raw binary CSV into a labeled dataset");
  pre->add_option("-i,--input", input, "raw CSV")->required();
  pre->add_option("-o,--output", output, "dataset CSV")->required();
  pre->add_option("--label", label, "label column")->capture_default_str();
  pre->add_option("--threshold", threshold, "drop columns missing in more than this share")
      ->capture_default_str();
  pre->add_option("--missing-marker", marker, "cell text meaning missing");
  pre->add_option("--report", report, "pre-processing summary JSON");

  std::size_t n = 3000, d = 41;
  double ratio = 0.8, coupling = 0.0;
  std::uint64_t seed = 0;
  auto* bench = app.add_subcommand("benchmark-gen", "Generate the synthetic benchmark dataset");
  bench->add_option("-n,--rows", n)->capture_default_str();
  bench->add_option("-d,--features", d)->capture_default_str();
  bench->add_option("--class-ratio", ratio, "share of label 1")->capture_default_str();
  bench->add_option("--coupling", coupling, "minority-class feature coupling")->capture_default_str();
  bench->add_option("--seed", seed)->capture_default_str();
  bench->add_option("-o,--output", output)->required();

  std::string data_path, grid_path;
  auto* tune = app.add_subcommand("tune", "Grid search on the PRDC-sum objective");
  tune->add_option("--data", data_path)->required();
  tune->add_option("--grid", grid_path, "grid JSON")->required();
  tune->add_option("-o,--output", output, "result JSON (stdout if omitted)");

  std::string config_path, family = "vae", trace_path;
  std::size_t epochs = 0;
  bool seed_given = false;
  auto* train = app.add_subcommand("train", "Train a generator and save a checkpoint");
  train->add_option("--data", data_path)->required();
  train->add_option("--config", config_path, "generator JSON");
  train->add_option("--family", family, "vae, dpgan, dpgan001, dpgan050 or ctgan")
      ->capture_default_str();
  train->add_option("--epochs", epochs, "override the configured epochs");
  auto* train_seed = train->add_option("--seed", seed);
  train->add_option("-o,--output", output, "checkpoint JSON")->required();
  train->add_option("--trace", trace_path, "training trace JSON");

  std::string model_path;
  auto* generate = app.add_subcommand("generate", "Sample rows from a checkpoint");
  generate->add_option("--model", model_path)->required();
  generate->add_option("-n,--rows", n)->required();
  generate->add_option("--seed", seed)->capture_default_str();
  generate->add_option("-o,--output", output)->required();

  std::string train_path, generated_path, unique_path, csv_path;
  auto* audit = app.add_subcommand("audit", "Copy and novelty accounting against training data");
  audit->add_option("--train", train_path)->required();
  audit->add_option("--generated", generated_path)->required();
  audit->add_option("-o,--output", output, "report JSON (stdout if omitted)");
  audit->add_option("--csv", csv_path, "authenticity proportions CSV");
  audit->add_option("--unique-out", unique_path, "write the unique novel rows here");

  std::string real_path, synth_path;
  std::size_t k = 5;
  auto* prdc = app.add_subcommand("prdc", "Precision, recall, density and coverage");
  prdc->add_option("--real", real_path)->required();
  prdc->add_option("--synth", synth_path)->required();
  prdc->add_option("-k", k)->capture_default_str();
  prdc->add_option("-o,--output", output);

  std::string pool_path;
  std::vector<std::string> settings, classifiers;
  std::size_t folds = 5, reps = 10, threads = 1;
  auto* util = app.add_subcommand("utility", "Downstream classifier evaluation");
  util->add_option("--data", data_path)->required();
  util->add_option("--pool", pool_path, "unique synthetic pool");
  util->add_option("--settings", settings, "A, B, original, upsampled, downsampled");
  util->add_option("--classifiers", classifiers);
  util->add_option("--folds", folds)->capture_default_str();
  util->add_option("--repetitions", reps)->capture_default_str();
  util->add_option("--seed", seed)->capture_default_str();
  util->add_option("--threads", threads)->capture_default_str();
  util->add_option("-o,--output", output);

  std::string out_dir;
  auto* run = app.add_subcommand("run-all", "Full cross-validated pipeline");
  run->add_option("--config", config_path, "experiment JSON")->required();
  run->add_option("--output-dir", out_dir, "override output_dir");
  auto* run_seed = run->add_option("--seed", seed, "override the master seed");

  std::string run_dir;
  auto* figs = app.add_subcommand("export-figures", "Rebuild figure CSVs from a finished run");
  figs->add_option("--run", run_dir)->required();
  figs->add_option("-o,--output", out_dir)->required();

  CLI11_PARSE(app, argc, argv);
  seed_given = train_seed->count() > 0 || run_seed->count() > 0;

  try {
    if (*pre) {
      sa_dataset* ds = nullptr;
      char* rep = nullptr;
      const Json opt{{"label_column", label}, {"threshold", threshold}, {"missing_marker", marker}};
      check(sa_preprocess(input.c_str(), opt.dump().c_str(), &ds, &rep));
      Dataset owned(ds);
      const std::string text = take(rep);
      check(sa_dataset_save(ds, output.c_str()));
      if (!report.empty()) emit(text, report);
    } else if (*bench) {
      sa_dataset* ds = nullptr;
      const Json opt{{"n", n}, {"d", d}, {"class_ratio", ratio}, {"minority_coupling", coupling},
                     {"seed", seed}};
      check(sa_benchmark_generate(opt.dump().c_str(), &ds));
      Dataset owned(ds);
      check(sa_dataset_save(ds, output.c_str()));
    } else if (*tune) {
      Dataset ds = load_dataset(data_path);
      char* res = nullptr;
      check(sa_tune(ds.get(), slurp(grid_path).c_str(), &res));
      emit(take(res), output);
    } else if (*train) {
      Dataset ds = load_dataset(data_path);
      Json g = generator_spec(config_path, family);
      if (epochs > 0) g["config"]["epochs"] = epochs;
      if (seed_given) g["config"]["seed"] = seed;
      sa_model* m = nullptr;
      char* trace = nullptr;
      check(sa_train(ds.get(), g.dump().c_str(), &m, trace_path.empty() ? nullptr : &trace));
      Model owned(m);
      check(sa_model_save(m, output.c_str()));
      if (!trace_path.empty()) emit(take(trace), trace_path);
    } else if (*generate) {
      sa_model* m = nullptr;
      check(sa_model_load(model_path.c_str(), &m));
      Model owned(m);
      sa_dataset* out = nullptr;
      check(sa_generate(m, n, seed, &out));
      Dataset gen(out);
      check(sa_dataset_save(out, output.c_str()));
    } else if (*audit) {
      Dataset tr = load_dataset(train_path);
      Dataset gen = load_dataset(generated_path);
      char* rep = nullptr;
      check(sa_audit(tr.get(), gen.get(), &rep));
      const std::string text = take(rep);
      emit(text, output);
      if (!csv_path.empty()) emit(authenticity_csv(Json::parse(text), generated_path), csv_path);
      if (!unique_path.empty()) {
        sa_dataset* u = nullptr;
        check(sa_filter_unique_novel(tr.get(), gen.get(), &u));
        Dataset owned(u);
        check(sa_dataset_save(u, unique_path.c_str()));
      }
    } else if (*prdc) {
      Dataset real = load_dataset(real_path);
      Dataset synth = load_dataset(synth_path);
      char* res = nullptr;
      check(sa_prdc(real.get(), synth.get(), k, &res));
      emit(take(res), output);
    } else if (*util) {
      Dataset ds = load_dataset(data_path);
      Dataset pool;
      if (!pool_path.empty()) pool = load_dataset(pool_path);
      if (settings.empty())
        settings = pool ? std::vector<std::string>{"A", "B", "original", "upsampled", "downsampled"}
                        : std::vector<std::string>{"original", "upsampled", "downsampled"};
      Json opt{{"settings", settings}, {"folds", folds}, {"repetitions", reps}, {"seed", seed},
               {"threads", threads}};
      if (!classifiers.empty()) opt["classifiers"] = classifiers;
      char* res = nullptr;
      check(sa_utility(ds.get(), pool.get(), opt.dump().c_str(), &res));
      emit(take(res), output);
    } else if (*run) {
      Json cfg = parse_file(config_path);
      if (!out_dir.empty()) cfg["output_dir"] = out_dir;
      if (seed_given) cfg["seed"] = seed;
      char* summary = nullptr;
      check(sa_run_experiment(cfg.dump().c_str(), &summary));
      const Json s = Json::parse(take(summary));
      std::cout << "results written to " << s.at("output_dir").get<std::string>() << "\n";
      std::cout << s.at("aggregate").dump(2) << "\n";
    } else if (*figs) {
      check(sa_export_figures(run_dir.c_str(), out_dir.c_str()));
    }
  } catch (const Failure& f) {
    if (*sa_last_error()) std::cerr << "error (" << sa_status_name(f.status) << "): " << sa_last_error() << "\n";
    return static_cast<int>(f.status);
  }
  return 0;
}
