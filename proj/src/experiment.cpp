#include "synthaug/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>

#include "synthaug/error.hpp"
#include "synthaug/generators/checkpoint.hpp"
#include "synthaug/parallel.hpp"
#include "synthaug/pca.hpp"

namespace synthaug::experiment {

namespace fs = std::filesystem;

namespace {

template <class T>
void read(const Json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) field = it->get<T>();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

double label_one_share(const data::LabeledDataset& ds) {
  return static_cast<double>(ds.class_count(1)) / static_cast<double>(ds.size());
}

// Largest n <= want whose proportional class counts the pool can cover.
std::size_t feasible_size(const data::LabeledDataset& pool, std::size_t want, double ratio) {
  const auto have = pool.class_counts();
  std::size_t n = want;
  while (n > 0) {
    const auto c = data::proportional_counts(n, ratio);
    if (c[0] <= have[0] && c[1] <= have[1]) break;
    --n;
  }
  return n;
}

std::string fold_name(std::size_t f) { return "fold_" + std::to_string(f); }

Json prdc_summary(const std::vector<similarity::PrdcScores>& scores) {
  std::vector<double> p, r, d, c, s;
  for (const auto& x : scores) {
    p.push_back(x.precision);
    r.push_back(x.recall);
    d.push_back(x.density);
    c.push_back(x.coverage);
    s.push_back(similarity::prdc_sum(x));
  }
  return Json{{"precision", utility::summarize(p)}, {"recall", utility::summarize(r)},
              {"density", utility::summarize(d)},   {"coverage", utility::summarize(c)},
              {"sum", utility::summarize(s)}};
}

struct FoldInputs {
  data::LabeledDataset train;
  data::LabeledDataset generated;
  data::LabeledDataset pool;
};

// Generation is a pure function of the checkpoint and the seed, so the same
// call serves the run and the figure replay.
FoldInputs regenerate(const gen::GeneratorModel& model, const utility::FoldData& fold,
                      const ExperimentConfig& cfg) {
  Rng rng = make_rng(derive_seed(cfg.seed, {fold.index, stage_id("generate")}));
  FoldInputs in{fold.train, gen::generate(model, cfg.n_generate, rng), {}};
  in.pool = uniqueness::filter_unique_novel(fold.train, in.generated);
  return in;
}

void write_fold_figures(const fs::path& out, std::size_t f, const FoldInputs& in,
                        std::uint64_t seed, Json& explained) {
  const double ratio = label_one_share(in.train);
  const std::size_t n = feasible_size(in.pool, in.train.size(), ratio);
  const std::string tag = "fold" + std::to_string(f);
  const auto emit = [&](const data::LabeledDataset& ds, const std::string& kind) {
    data::save_dataset_csv(export_heatmap_data(ds), out / ("heatmap_" + kind + "_" + tag + ".csv"));
    if (ds.size() < 3) return;
    try {
      const Pca2d p = pca_2d(ds);
      write_text(out / ("pca_" + kind + "_" + tag + ".csv"), pca_csv(ds));
      explained[kind + "_" + tag] = p.explained_variance;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::insufficient_data) throw;
    }
  };
  emit(in.train, "real");
  if (n > 0) {
    Rng rng = make_rng(derive_seed(seed, {f, stage_id("figures")}));
    emit(data::class_proportional_sample(in.pool, n, ratio, rng), "synthetic");
  }
}

std::optional<similarity::PrdcScores> trace_prdc(const gen::GeneratorModel& model,
                                                 const utility::FoldData& fold,
                                                 const ExperimentConfig& cfg, std::size_t epoch) {
  const std::size_t m = std::min(cfg.trace_sample, fold.test.size());
  Rng rng = make_rng(derive_seed(cfg.seed, {fold.index, epoch, stage_id("trace")}));
  std::vector<std::size_t> idx(fold.test.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  const data::LabeledDataset real = fold.test.select(idx);
  const data::LabeledDataset synth = uniqueness::distinct_rows(gen::generate(model, m, rng));
  if (real.size() <= cfg.prdc_k || synth.size() <= cfg.prdc_k) return std::nullopt;
  return similarity::prdc(data::joint_matrix(real), data::joint_matrix(synth), cfg.prdc_k);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.folds < 2) throw Error(ErrorCode::invalid_argument, "folds must be at least 2");
  if (cfg.repetitions == 0 || cfg.prdc_repeats == 0)
    throw Error(ErrorCode::invalid_argument, "repetitions must be positive");
  if (cfg.n_generate == 0) throw Error(ErrorCode::invalid_argument, "n_generate must be positive");
  if (cfg.prdc_k == 0) throw Error(ErrorCode::invalid_argument, "prdc_k must be positive");
}

struct FoldOutcome {
  FoldResult result;
  double seconds = 0.0;
  std::string error;
  bool done = false;
};

FoldResult run_fold(const ExperimentConfig& cfg, const utility::FoldData& fold,
                    const fs::path& dir, Json& explained) {
  const std::size_t f = fold.index;
  const fs::path fdir = dir / fold_name(f);
  fs::create_directories(fdir);
  FoldResult out;
  out.fold = f;

  gen::AnyConfig gcfg = cfg.generator;
  gen::set_seed(gcfg, derive_seed(cfg.seed, {f, stage_id("generator")}));
  const std::size_t epochs = gen::epochs_of(gcfg);
  gen::TrainOptions options;
  if (cfg.trace_every > 0)
    options.on_epoch = [&](std::size_t epoch, const gen::GeneratorModel& model)
        -> std::optional<similarity::PrdcScores> {
      if (epoch % cfg.trace_every != 0 && epoch != epochs) return std::nullopt;
      return trace_prdc(model, fold, cfg, epoch);
    };
  gen::TrainResult trained = gen::train(fold.train, gcfg, options);
  out.trace = std::move(trained.trace);
  gen::save_checkpoint(trained.model, fdir / "model.json");

  const FoldInputs in = regenerate(trained.model, fold, cfg);
  out.uniqueness = uniqueness::audit(fold.train, in.generated);
  data::save_dataset_csv(in.pool, fdir / "synthetic_unique.csv");

  const double ratio = label_one_share(fold.train);
  const std::size_t n_sample = feasible_size(in.pool, fold.train.size(), ratio);
  if (n_sample < fold.train.size())
    out.events.push_back("unique pool covers " + std::to_string(n_sample) + " of " +
                         std::to_string(fold.train.size()) +
                         " class-proportional rows; samples shrunk");
  if (n_sample <= cfg.prdc_k)
    throw Error(ErrorCode::pool_shortfall,
                "unique synthetic pool too small for similarity evaluation (" +
                    std::to_string(in.pool.size()) + " rows)");
  const nn::Matrix real = data::joint_matrix(fold.train);
  for (std::size_t r = 0; r < cfg.prdc_repeats; ++r) {
    Rng rng = make_rng(derive_seed(cfg.seed, {f, r, stage_id("prdc")}));
    const auto sample = data::class_proportional_sample(in.pool, n_sample, ratio, rng);
    out.prdc.push_back(similarity::prdc(real, data::joint_matrix(sample), cfg.prdc_k));
  }

  const std::uint64_t useed = derive_seed(cfg.seed, {f, stage_id("utility")});
  out.utility.push_back(utility::setting_a(fold, in.pool, cfg.repetitions, useed, cfg.suite, n_sample));
  out.utility.push_back(utility::setting_b(fold, in.pool, cfg.repetitions, useed, cfg.suite));
  if (cfg.baselines)
    for (auto b : {utility::Baseline::original, utility::Baseline::upsampled,
                   utility::Baseline::downsampled})
      out.utility.push_back(utility::baseline(fold, b, cfg.repetitions, useed, cfg.suite));

  write_json(fdir / "trace.json", out.trace);
  write_json(fdir / "uniqueness.json", out.uniqueness);
  write_json(fdir / "prdc.json", Json{{"samples", out.prdc}, {"summary", prdc_summary(out.prdc)}});
  for (const auto& u : out.utility)
    write_text(fdir / ("utility_" + u.setting + ".csv"), utility::to_csv(u));

  const fs::path figs = dir / "figures";
  fs::create_directories(figs);
  write_fold_figures(figs, f, in, cfg.seed, explained);
  return out;
}

Json fold_json(const FoldResult& r) {
  Json utility = Json::object();
  for (const auto& u : r.utility) utility[u.setting] = u;
  return Json{{"fold", r.fold},
              {"trace", r.trace},
              {"uniqueness", r.uniqueness},
              {"prdc", r.prdc},
              {"prdc_summary", prdc_summary(r.prdc)},
              {"utility", std::move(utility)},
              {"events", r.events}};
}

Json aggregate_json(const std::vector<FoldResult>& folds) {
  std::vector<similarity::PrdcScores> all;
  std::array<std::vector<double>, 4> shares;
  std::vector<double> copy_rate;
  std::map<std::string, std::vector<utility::UtilityReport>> by_setting;
  std::vector<std::string> order;
  for (const auto& f : folds) {
    all.insert(all.end(), f.prdc.begin(), f.prdc.end());
    const auto s = uniqueness::authenticity_shares(f.uniqueness);
    for (int i = 0; i < 4; ++i) shares[i].push_back(s[i]);
    copy_rate.push_back(f.uniqueness.n_generated
                            ? static_cast<double>(f.uniqueness.n_copy_total) /
                                  static_cast<double>(f.uniqueness.n_generated)
                            : 0.0);
    for (const auto& u : f.utility) {
      if (!by_setting.count(u.setting)) order.push_back(u.setting);
      by_setting[u.setting].push_back(u);
    }
  }
  Json utility = Json::object();
  for (const auto& name : order) {
    const utility::UtilityReport merged = utility::merge(by_setting[name]);
    Json best;
    for (utility::Metric m : utility::kMetrics) best[utility::to_string(m)] = merged.best(m);
    Json per;
    for (utility::ClassifierKind k : merged.classifiers) {
      Json one;
      for (utility::Metric m : utility::kMetrics) one[utility::to_string(m)] = merged.of(k, m);
      one["n_results"] = merged.results_for(k);
      per[utility::to_string(k)] = std::move(one);
    }
    utility[name] = Json{{"cells", merged.cells.size()}, {"best", best}, {"per_classifier", per}};
  }
  return Json{{"prdc", all.empty() ? Json() : prdc_summary(all)},
              {"uniqueness",
               {{"copy_rate", utility::summarize(copy_rate)},
                {"copy_unique", utility::summarize(shares[0])},
                {"copy_dup", utility::summarize(shares[1])},
                {"novel_dup", utility::summarize(shares[2])},
                {"novel_unique", utility::summarize(shares[3])}}},
              {"utility", std::move(utility)}};
}

}  // namespace

data::LabeledDataset load_source(const DatasetSource& src) {
  if (!src.csv.empty()) return data::load_dataset_csv(src.csv);
  const auto& b = src.benchmark;
  return data::generate_benchmark(
      data::make_benchmark_spec(b.n, b.d, b.class_ratio, b.seed, b.minority_coupling));
}

fs::path resolve_output(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative())
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) p = fs::path(root) / p;
  return p;
}

// ---- config JSON -----------------------------------------------------------

Json to_json(const ExperimentConfig& cfg) {
  Json dataset;
  if (!cfg.dataset.csv.empty()) {
    dataset["csv"] = cfg.dataset.csv;
  } else {
    const auto& b = cfg.dataset.benchmark;
    dataset["benchmark"] = {{"n", b.n},
                            {"d", b.d},
                            {"class_ratio", b.class_ratio},
                            {"minority_coupling", b.minority_coupling},
                            {"seed", b.seed}};
  }
  std::vector<std::string> kinds;
  for (auto k : cfg.suite.kinds) kinds.emplace_back(utility::to_string(k));
  return Json{{"dataset", dataset},
              {"generator", gen::config_to_json(cfg.generator)},
              {"folds", cfg.folds},
              {"repetitions", cfg.repetitions},
              {"n_generate", cfg.n_generate},
              {"prdc_k", cfg.prdc_k},
              {"prdc_repeats", cfg.prdc_repeats},
              {"seed", cfg.seed},
              {"output_dir", cfg.output_dir},
              {"trace_every", cfg.trace_every},
              {"trace_sample", cfg.trace_sample},
              {"baselines", cfg.baselines},
              {"classifiers", kinds},
              {"classifier_params", cfg.suite.params},
              {"threads", cfg.threads}};
}

ExperimentConfig experiment_from_json(const Json& j) {
  reject_unknown_keys(j, {"dataset", "generator", "folds", "repetitions", "n_generate", "prdc_k",
                          "prdc_repeats", "seed", "output_dir", "trace_every", "trace_sample",
                          "baselines", "classifiers", "classifier_params", "threads"},
                      "experiment config");
  ExperimentConfig cfg;
  try {
    if (auto it = j.find("dataset"); it != j.end()) {
      reject_unknown_keys(*it, {"csv", "benchmark"}, "dataset");
      read(*it, "csv", cfg.dataset.csv);
      if (auto b = it->find("benchmark"); b != it->end()) {
        reject_unknown_keys(*b, {"n", "d", "class_ratio", "minority_coupling", "seed"}, "benchmark");
        read(*b, "n", cfg.dataset.benchmark.n);
        read(*b, "d", cfg.dataset.benchmark.d);
        read(*b, "class_ratio", cfg.dataset.benchmark.class_ratio);
        read(*b, "minority_coupling", cfg.dataset.benchmark.minority_coupling);
        read(*b, "seed", cfg.dataset.benchmark.seed);
      }
    }
    if (auto it = j.find("generator"); it != j.end()) cfg.generator = gen::config_from_json(*it);
    read(j, "folds", cfg.folds);
    read(j, "repetitions", cfg.repetitions);
    read(j, "n_generate", cfg.n_generate);
    read(j, "prdc_k", cfg.prdc_k);
    read(j, "prdc_repeats", cfg.prdc_repeats);
    read(j, "seed", cfg.seed);
    read(j, "output_dir", cfg.output_dir);
    read(j, "trace_every", cfg.trace_every);
    read(j, "trace_sample", cfg.trace_sample);
    read(j, "baselines", cfg.baselines);
    read(j, "threads", cfg.threads);
    if (auto it = j.find("classifiers"); it != j.end()) {
      cfg.suite.kinds.clear();
      for (const auto& name : *it)
        cfg.suite.kinds.push_back(utility::classifier_from_string(name.get<std::string>()));
    }
    read(j, "classifier_params", cfg.suite.params);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("experiment config: ") + e.what());
  }
  return cfg;
}

Json to_json(const GridSpec& grid) {
  Json axes = Json::array();
  for (const auto& a : grid.axes) axes.push_back({{"key", a.key}, {"values", a.values}});
  return Json{{"generator", gen::config_to_json(grid.base)},
              {"axes", axes},
              {"ho_fraction", grid.ho_fraction},
              {"prdc_k", grid.prdc_k},
              {"seed", grid.seed},
              {"threads", grid.threads}};
}

GridSpec grid_from_json(const Json& j) {
  reject_unknown_keys(j, {"generator", "axes", "ho_fraction", "prdc_k", "seed", "threads"}, "grid");
  GridSpec g;
  try {
    if (auto it = j.find("generator"); it != j.end()) g.base = gen::config_from_json(*it);
    if (auto it = j.find("axes"); it != j.end()) {
      if (it->is_object()) {
        for (const auto& [key, values] : it->items())
          g.axes.push_back({key, values.get<std::vector<Json>>()});
      } else {
        for (const auto& a : *it)
          g.axes.push_back({a.at("key").get<std::string>(), a.at("values").get<std::vector<Json>>()});
      }
    }
    read(j, "ho_fraction", g.ho_fraction);
    read(j, "prdc_k", g.prdc_k);
    read(j, "seed", g.seed);
    read(j, "threads", g.threads);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("grid: ") + e.what());
  }
  return g;
}

// ---- grid search -------------------------------------------------------------

Synthesizer default_synthesizer() {
  return [](const data::LabeledDataset& train, const gen::AnyConfig& cfg, std::size_t n,
            std::uint64_t seed) {
    gen::AnyConfig c = cfg;
    gen::set_seed(c, seed);
    const gen::TrainResult t = gen::train(train, c);
    Rng rng = make_rng(derive_seed(seed, {stage_id("grid-generate")}));
    return gen::generate(t.model, n, rng);
  };
}

std::vector<gen::AnyConfig> expand_grid(const GridSpec& grid) {
  const Json base = gen::config_to_json(grid.base);
  std::vector<Json> bodies{base.at("config")};
  for (const GridAxis& axis : grid.axes) {
    if (axis.values.empty())
      throw Error(ErrorCode::invalid_argument, "grid axis '" + axis.key + "' has no values");
    std::vector<Json> next;
    for (const Json& body : bodies)
      for (const Json& v : axis.values) {
        Json b = body;
        if (!axis.key.empty() && axis.key.front() == '/')
          b[Json::json_pointer(axis.key)] = v;
        else
          b[axis.key] = v;
        next.push_back(std::move(b));
      }
    bodies = std::move(next);
  }
  std::vector<gen::AnyConfig> out;
  for (Json& b : bodies) out.push_back(gen::config_from_json({{"family", base.at("family")}, {"config", b}}));
  return out;
}

data::LabeledDataset holdout_split(const data::LabeledDataset& ds, double fraction,
                                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorCode::invalid_argument, "hold-out fraction must be in (0, 1]");
  if (ds.size() == 0) throw Error(ErrorCode::insufficient_data, "empty dataset");
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  Rng rng = make_rng(derive_seed(seed, {stage_id("holdout")}));
  return data::class_proportional_sample(ds, n, label_one_share(ds), rng);
}

GridResult grid_search(const GridSpec& grid, const data::LabeledDataset& ds,
                       const Synthesizer& synth) {
  const std::vector<gen::AnyConfig> configs = expand_grid(grid);
  const data::LabeledDataset ho = holdout_split(ds, grid.ho_fraction, grid.seed);
  const nn::Matrix real = data::joint_matrix(ho);
  const double ratio = label_one_share(ho);

  GridResult result;
  result.points.resize(configs.size());
  parallel_for(configs.size(), grid.threads, [&](std::size_t i) {
    GridPoint& p = result.points[i];
    p.config = configs[i];
    try {
      const std::uint64_t seed = derive_seed(grid.seed, {i, stage_id("grid")});
      const data::LabeledDataset generated = synth(ho, configs[i], 4 * ho.size(), seed);
      const data::LabeledDataset distinct = uniqueness::distinct_rows(generated);
      Rng rng = make_rng(derive_seed(seed, {stage_id("grid-sample")}));
      const std::size_t n = feasible_size(distinct, ho.size(), ratio);
      const data::LabeledDataset sample = data::class_proportional_sample(distinct, n, ratio, rng);
      p.scores = similarity::prdc(real, data::joint_matrix(sample), grid.prdc_k);
      p.prdc_sum = similarity::prdc_sum(*p.scores);
    } catch (const Error& e) {
      p.error = e.what();
    }
  });

  std::optional<std::size_t> best;
  std::string best_key;
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const GridPoint& p = result.points[i];
    if (!p.scores) continue;
    const std::string key = gen::config_to_json(p.config).dump();
    if (!best) {
      best = i;
      best_key = key;
      result.min_sum = result.max_sum = p.prdc_sum;
      continue;
    }
    result.min_sum = std::min(result.min_sum, p.prdc_sum);
    result.max_sum = std::max(result.max_sum, p.prdc_sum);
    const double cur = result.points[*best].prdc_sum;
    if (p.prdc_sum > cur || (p.prdc_sum == cur && key < best_key)) {
      best = i;
      best_key = key;
    }
  }
  if (!best)
    throw Error(ErrorCode::training_failure,
                "every grid point failed; first error: " + result.points.front().error);
  result.best = *best;
  return result;
}

Json to_json(const GridResult& r) {
  Json points = Json::array();
  for (const GridPoint& p : r.points) {
    Json one{{"generator", gen::config_to_json(p.config)}};
    if (p.scores) {
      one["prdc"] = *p.scores;
      one["prdc_sum"] = p.prdc_sum;
    } else {
      one["error"] = p.error;
    }
    points.push_back(std::move(one));
  }
  return Json{{"best", r.best},
              {"best_generator", gen::config_to_json(r.points[r.best].config)},
              {"best_prdc_sum", r.points[r.best].prdc_sum},
              {"range", {r.min_sum, r.max_sum}},
              {"points", std::move(points)}};
}

// ---- pipeline ----------------------------------------------------------------

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  RunResult run;
  run.dir = resolve_output(cfg.output_dir);
  fs::create_directories(run.dir);
  const Json cfg_json = to_json(cfg);
  write_json(run.dir / "config.json", cfg_json);

  const data::LabeledDataset ds = load_source(cfg.dataset);
  const data::FoldSplit split =
      data::stratified_kfold(ds, cfg.folds, derive_seed(cfg.seed, {stage_id("folds")}));

  std::vector<FoldOutcome> outcomes(cfg.folds);
  std::vector<Json> explained(cfg.folds, Json::object());
  std::atomic<bool> failed{false};
  parallel_for(cfg.folds, cfg.threads, [&](std::size_t f) {
    if (failed) return;
    const auto t0 = clock::now();
    try {
      outcomes[f].result = run_fold(cfg, utility::make_fold(ds, split, f), run.dir, explained[f]);
      outcomes[f].done = true;
    } catch (const std::exception& e) {
      outcomes[f].error = e.what();
      failed = true;
    }
    outcomes[f].seconds = std::chrono::duration<double>(clock::now() - t0).count();
  });

  Json folds_json = Json::array();
  Json manifest_folds = Json::array();
  Json pca_explained = Json::object();
  std::vector<std::pair<std::string, uniqueness::UniquenessReport>> authenticity;
  std::string first_error;
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    const FoldOutcome& o = outcomes[f];
    Json m{{"fold", f}, {"seconds", o.seconds}};
    if (o.done) {
      run.folds.push_back(o.result);
      folds_json.push_back(fold_json(o.result));
      authenticity.emplace_back(fold_name(f), o.result.uniqueness);
      pca_explained.update(explained[f]);
      const std::string base = fold_name(f) + "/";
      m["status"] = "complete";
      m["artifacts"] = {{"checkpoint", base + "model.json"},
                        {"trace", base + "trace.json"},
                        {"uniqueness", base + "uniqueness.json"},
                        {"prdc", base + "prdc.json"},
                        {"synthetic_unique", base + "synthetic_unique.csv"}};
    } else {
      m["status"] = o.error.empty() ? "skipped" : "failed";
      if (!o.error.empty()) {
        m["error"] = o.error;
        if (first_error.empty()) first_error = fold_name(f) + ": " + o.error;
      }
    }
    manifest_folds.push_back(std::move(m));
  }

  run.results = Json{{"config", cfg_json},
                     {"folds", std::move(folds_json)},
                     {"aggregate", aggregate_json(run.folds)}};
  write_json(run.dir / "results.json", run.results);
  if (!run.folds.empty()) {
    const fs::path figs = run.dir / "figures";
    fs::create_directories(figs);
    write_text(figs / "authenticity.csv", uniqueness::authenticity_csv(authenticity));
    write_json(figs / "pca_explained_variance.json", pca_explained);
  }
  run.manifest = Json{{"status", first_error.empty() ? "complete" : "failed"},
                      {"results", "results.json"},
                      {"config", "config.json"},
                      {"folds", std::move(manifest_folds)},
                      {"total_seconds",
                       std::chrono::duration<double>(clock::now() - start).count()}};
  if (!first_error.empty()) run.manifest["error"] = first_error;
  write_json(run.dir / "manifest.json", run.manifest);
  if (!first_error.empty())
    throw Error(ErrorCode::training_failure, "run aborted at " + first_error +
                                                 " (partial manifest in " +
                                                 run.dir.string() + ")");
  return run;
}

void export_figures(const fs::path& run_dir, const fs::path& out_dir) {
  const ExperimentConfig cfg = experiment_from_json(read_json(run_dir / "config.json"));
  const data::LabeledDataset ds = load_source(cfg.dataset);
  const data::FoldSplit split =
      data::stratified_kfold(ds, cfg.folds, derive_seed(cfg.seed, {stage_id("folds")}));
  fs::create_directories(out_dir);
  std::vector<std::pair<std::string, uniqueness::UniquenessReport>> authenticity;
  Json explained = Json::object();
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    const fs::path ckpt = run_dir / fold_name(f) / "model.json";
    if (!fs::exists(ckpt)) continue;
    const utility::FoldData fold = utility::make_fold(ds, split, f);
    const FoldInputs in = regenerate(gen::load_checkpoint(ckpt), fold, cfg);
    authenticity.emplace_back(fold_name(f), uniqueness::audit(fold.train, in.generated));
    write_fold_figures(out_dir, f, in, cfg.seed, explained);
  }
  if (authenticity.empty())
    throw Error(ErrorCode::io_error, "no fold checkpoints under " + run_dir.string());
  write_text(out_dir / "authenticity.csv", uniqueness::authenticity_csv(authenticity));
  write_json(out_dir / "pca_explained_variance.json", explained);
}

data::LabeledDataset export_heatmap_data(const data::LabeledDataset& ds) {
  std::vector<std::size_t> order = ds.indices_of(0);
  const std::vector<std::size_t> ones = ds.indices_of(1);
  order.insert(order.end(), ones.begin(), ones.end());
  return ds.select(order);
}

std::string pca_csv(const data::LabeledDataset& ds) {
  const Pca2d p = pca_2d(ds);
  std::string out = "pc1,pc2,label\n";
  char buf[96];
  for (Eigen::Index r = 0; r < p.coords.rows(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", p.coords(r, 0), p.coords(r, 1),
                  static_cast<int>(ds.labels[static_cast<std::size_t>(r)]));
    out += buf;
  }
  return out;
}

}  // namespace synthaug::experiment
