#include "synthaug/report_json.hpp"

#include <algorithm>
#include <cstring>

#include "synthaug/error.hpp"

namespace synthaug {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class T>
void read(const Json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) field = it->get<T>();
}

}  // namespace

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const char* what) {
  if (!obj.is_object()) throw Error(ErrorCode::parse_error, std::string(what) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known)
      throw Error(ErrorCode::parse_error, std::string(what) + ": unknown key '" + key + "'");
  }
}

namespace nn {

Json matrix_to_json(const Matrix& m) {
  return Json{{"rows", m.rows()},
           {"cols", m.cols()},
           {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const Json& j) {
  Matrix m;
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
    throw Error(ErrorCode::parse_error, "matrix data does not match its shape");
  m.resize(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

void to_json(Json& j, const DpSgdConfig& c) {
  j = Json{{"clip_norm", c.clip_norm}, {"sigma", c.sigma}};
}

void from_json(const Json& j, DpSgdConfig& c) {
  reject_unknown_keys(j, {"clip_norm", "sigma"}, "dp");
  read(j, "clip_norm", c.clip_norm);
  read(j, "sigma", c.sigma);
}

void to_json(Json& j, const Network& net) {
  Json layers = Json::array();
  for (const Layer& layer : net.layers()) {
    std::visit(overloaded{[&](const Linear& l) {
                            layers.push_back({{"type", "linear"}, {"weight", matrix_to_json(l.weight)}, {"bias", matrix_to_json(l.bias)}});
                          },
                          [&](const Act& a) {
                            layers.push_back({{"type", "activation"}, {"kind", to_string(a.kind)}});
                          },
                          [&](const Dropout& d) {
                            layers.push_back({{"type", "dropout"}, {"rate", d.rate}});
                          },
                          [&](const BatchNorm& b) {
                            layers.push_back({{"type", "batch_norm"},
                                              {"gamma", matrix_to_json(b.gamma)},
                                              {"beta", matrix_to_json(b.beta)},
                                              {"running_mean", matrix_to_json(b.running_mean)},
                                              {"running_var", matrix_to_json(b.running_var)},
                                              {"epsilon", b.epsilon},
                                              {"momentum", b.momentum}});
                          },
                          [&](const Residual& r) {
                            layers.push_back({{"type", "residual"},
                                              {"weight", matrix_to_json(r.linear.weight)},
                                              {"bias", matrix_to_json(r.linear.bias)},
                                              {"gamma", matrix_to_json(r.norm.gamma)},
                                              {"beta", matrix_to_json(r.norm.beta)},
                                              {"running_mean", matrix_to_json(r.norm.running_mean)},
                                              {"running_var", matrix_to_json(r.norm.running_var)},
                                              {"epsilon", r.norm.epsilon},
                                              {"momentum", r.norm.momentum}});
                          }},
               layer);
  }
  j = Json{{"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

namespace {

BatchNorm read_norm(const Json& l) {
  return BatchNorm{matrix_from_json(l.at("gamma")),        matrix_from_json(l.at("beta")),
                   matrix_from_json(l.at("running_mean")), matrix_from_json(l.at("running_var")),
                   l.at("epsilon").get<double>(),      l.at("momentum").get<double>()};
}

}  // namespace

void from_json(const Json& j, Network& net) {
  std::vector<Layer> layers;
  for (const Json& l : j.at("layers")) {
    const auto type = l.at("type").get<std::string>();
    if (type == "linear") {
      layers.emplace_back(Linear{matrix_from_json(l.at("weight")), matrix_from_json(l.at("bias"))});
    } else if (type == "activation") {
      layers.emplace_back(Act{activation_from_string(l.at("kind").get<std::string>())});
    } else if (type == "dropout") {
      layers.emplace_back(Dropout{l.at("rate").get<double>()});
    } else if (type == "batch_norm") {
      layers.emplace_back(read_norm(l));
    } else if (type == "residual") {
      layers.emplace_back(
          Residual{Linear{matrix_from_json(l.at("weight")), matrix_from_json(l.at("bias"))}, read_norm(l)});
    } else {
      throw Error(ErrorCode::parse_error, "unknown layer type '" + type + "'");
    }
  }
  net = Network::from_layers(j.at("input_dim").get<std::size_t>(), std::move(layers));
}

}  // namespace nn

namespace similarity {

void to_json(Json& j, const PrdcScores& s) {
  j = Json{{"precision", s.precision}, {"recall", s.recall},   {"density", s.density},
           {"coverage", s.coverage},   {"sum", prdc_sum(s)},   {"k", s.k},
           {"n_real", s.n_real},       {"n_synth", s.n_synth}};
}

void from_json(const Json& j, PrdcScores& s) {
  s.precision = j.at("precision").get<double>();
  s.recall = j.at("recall").get<double>();
  s.density = j.at("density").get<double>();
  s.coverage = j.at("coverage").get<double>();
  read(j, "k", s.k);
  read(j, "n_real", s.n_real);
  read(j, "n_synth", s.n_synth);
}

}  // namespace similarity

namespace gen {

void to_json(Json& j, const VaeConfig& c) {
  j = Json{{"latent_dim", c.latent_dim}, {"hidden_dim", c.hidden_dim}, {"batch_size", c.batch_size},
           {"lr", c.lr},                 {"beta1", c.beta1},           {"beta2", c.beta2},
           {"dropout_rate", c.dropout_rate}, {"epochs", c.epochs},     {"seed", c.seed}};
}

void from_json(const Json& j, VaeConfig& c) {
  reject_unknown_keys(j, {"latent_dim", "hidden_dim", "batch_size", "lr", "beta1", "beta2",
                          "dropout_rate", "epochs", "seed"},
                      "vae config");
  read(j, "latent_dim", c.latent_dim);
  read(j, "hidden_dim", c.hidden_dim);
  read(j, "batch_size", c.batch_size);
  read(j, "lr", c.lr);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "dropout_rate", c.dropout_rate);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
}

void to_json(Json& j, const DpGanConfig& c) {
  j = Json{{"variant", c.variant},
           {"latent_dim", c.latent_dim},
           {"batch_size", c.batch_size},
           {"dp", c.dp},
           {"lr", c.lr},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"dropout_rate", c.dropout_rate},
           {"generator_blocks", c.generator_blocks},
           {"discriminator_hidden", c.discriminator_hidden},
           {"sanitize", c.sanitize},
           {"epochs", c.epochs},
           {"seed", c.seed}};
}

void from_json(const Json& j, DpGanConfig& c) {
  reject_unknown_keys(j, {"variant", "latent_dim", "batch_size", "dp", "lr", "beta1", "beta2",
                          "dropout_rate", "generator_blocks", "discriminator_hidden", "sanitize",
                          "epochs", "seed"},
                      "dpgan config");
  if (auto it = j.find("variant"); it != j.end()) {
    const auto v = it->get<std::string>();
    if (v == "DPGAN050")
      c = DpGanConfig::dpgan050();
    else if (v == "DPGAN001")
      c = DpGanConfig::dpgan001();
    else
      throw Error(ErrorCode::parse_error, "unknown DPGAN variant '" + v + "'");
  }
  read(j, "latent_dim", c.latent_dim);
  read(j, "batch_size", c.batch_size);
  read(j, "dp", c.dp);
  read(j, "lr", c.lr);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "dropout_rate", c.dropout_rate);
  read(j, "generator_blocks", c.generator_blocks);
  read(j, "discriminator_hidden", c.discriminator_hidden);
  read(j, "sanitize", c.sanitize);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
}

void to_json(Json& j, const CtGanConfig& c) {
  j = Json{{"batch_size", c.batch_size},
           {"gen_hidden", c.gen_hidden},
           {"gen_layers", c.gen_layers},
           {"disc_hidden", c.disc_hidden},
           {"disc_layers", c.disc_layers},
           {"embedding_dim", c.embedding_dim},
           {"n_disc_updates", c.n_disc_updates},
           {"pac", c.pac},
           {"disc_lr", c.disc_lr},
           {"disc_weight_decay", c.disc_weight_decay},
           {"gen_lr", c.gen_lr},
           {"gen_weight_decay", c.gen_weight_decay},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"gumbel_tau", c.gumbel_tau},
           {"dropout_rate", c.dropout_rate},
           {"conditional", c.conditional},
           {"epochs", c.epochs},
           {"seed", c.seed}};
}

void from_json(const Json& j, CtGanConfig& c) {
  reject_unknown_keys(j, {"batch_size", "gen_hidden", "gen_layers", "disc_hidden", "disc_layers",
                          "embedding_dim", "n_disc_updates", "pac", "disc_lr",
                          "disc_weight_decay", "gen_lr", "gen_weight_decay", "beta1", "beta2",
                          "gumbel_tau", "dropout_rate", "conditional", "epochs", "seed"},
                      "ctgan config");
  read(j, "batch_size", c.batch_size);
  read(j, "gen_hidden", c.gen_hidden);
  read(j, "gen_layers", c.gen_layers);
  read(j, "disc_hidden", c.disc_hidden);
  read(j, "disc_layers", c.disc_layers);
  read(j, "embedding_dim", c.embedding_dim);
  read(j, "n_disc_updates", c.n_disc_updates);
  read(j, "pac", c.pac);
  read(j, "disc_lr", c.disc_lr);
  read(j, "disc_weight_decay", c.disc_weight_decay);
  read(j, "gen_lr", c.gen_lr);
  read(j, "gen_weight_decay", c.gen_weight_decay);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "gumbel_tau", c.gumbel_tau);
  read(j, "dropout_rate", c.dropout_rate);
  read(j, "conditional", c.conditional);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
}

void to_json(Json& j, const EpochRecord& r) {
  j = Json{{"epoch", r.epoch}, {"losses", r.losses}};
  if (r.prdc) j["prdc"] = *r.prdc;
}

void to_json(Json& j, const TrainingTrace& t) {
  j = Json{{"epochs", t.epochs}, {"events", t.events}};
}

Json config_to_json(const AnyConfig& c) {
  Json body = std::visit([](const auto& x) { return Json(x); }, c);
  return Json{{"family", to_string(family_of(c))}, {"config", std::move(body)}};
}

AnyConfig config_from_json(const Json& j) {
  reject_unknown_keys(j, {"family", "config"}, "generator");
  const auto name = j.at("family").get<std::string>();
  AnyConfig c = default_config(name);
  if (auto it = j.find("config"); it != j.end())
    std::visit([&](auto& x) { from_json(*it, x); }, c);
  return c;
}

}  // namespace gen

}  // namespace synthaug

namespace synthaug {

namespace uniqueness {

void to_json(Json& j, const UniquenessReport& r) {
  const auto shares = authenticity_shares(r);
  j = Json{{"n_generated", r.n_generated},
           {"n_copy_total", r.n_copy_total},
           {"n_copy_distinct", r.n_copy_distinct},
           {"n_novel_total", r.n_novel_total},
           {"n_novel_unique", r.n_novel_unique},
           {"novel_unique_by_class", r.novel_unique_by_class},
           {"copy_rate", r.n_generated ? static_cast<double>(r.n_copy_total) /
                                             static_cast<double>(r.n_generated)
                                       : 0.0},
           {"shares",
            {{"copy_unique", shares[0]},
             {"copy_dup", shares[1]},
             {"novel_dup", shares[2]},
             {"novel_unique", shares[3]}}}};
}

void from_json(const Json& j, UniquenessReport& r) {
  r.n_generated = j.at("n_generated").get<std::size_t>();
  r.n_copy_total = j.at("n_copy_total").get<std::size_t>();
  r.n_copy_distinct = j.at("n_copy_distinct").get<std::size_t>();
  r.n_novel_total = j.at("n_novel_total").get<std::size_t>();
  r.n_novel_unique = j.at("n_novel_unique").get<std::size_t>();
  r.novel_unique_by_class = j.at("novel_unique_by_class").get<std::array<std::size_t, 2>>();
}

}  // namespace uniqueness

namespace utility {

void to_json(Json& j, const EvalResult& r) {
  j = Json{{"classifier", to_string(r.classifier)},
           {"auc_roc", r.auc_roc},
           {"accuracy", r.accuracy},
           {"precision", r.precision},
           {"recall", r.recall},
           {"precision_undefined", r.precision_undefined},
           {"n_test", r.n_test},
           {"n_predicted_positive", r.n_predicted_positive}};
}

void to_json(Json& j, const Summary& s) {
  j = Json{{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
}

void to_json(Json& j, const CellResult& c) {
  Json best;
  for (Metric m : kMetrics) best[to_string(m)] = to_string(best_by(c, m).classifier);
  j = Json{{"fold", c.fold},
           {"repetition", c.repetition},
           {"train_counts", c.train_counts},
           {"results", c.results},
           {"best_classifier", std::move(best)}};
}

void to_json(Json& j, const UtilityReport& r) {
  Json best;
  Json per;
  for (Metric m : kMetrics) best[to_string(m)] = r.best(m);
  std::vector<std::string> names;
  for (ClassifierKind k : r.classifiers) {
    names.emplace_back(to_string(k));
    Json one;
    for (Metric m : kMetrics) one[to_string(m)] = r.of(k, m);
    one["n_results"] = r.results_for(k);
    per[to_string(k)] = std::move(one);
  }
  j = Json{{"setting", r.setting},
           {"classifiers", names},
           {"best", std::move(best)},
           {"per_classifier", std::move(per)},
           {"cells", r.cells}};
}

void to_json(Json& j, const ClassifierParams& p) {
  j = Json{{"lr_iterations", p.lr_iterations}, {"lr_step", p.lr_step},
           {"l2", p.l2},                       {"svm_iterations", p.svm_iterations},
           {"svm_batch", p.svm_batch},         {"svm_step", p.svm_step},
           {"nb_alpha", p.nb_alpha},           {"knn_k", p.knn_k},
           {"forest_trees", p.forest_trees},   {"forest_min_split", p.forest_min_split},
           {"mlp_hidden", p.mlp_hidden},       {"mlp_epochs", p.mlp_epochs},
           {"mlp_batch", p.mlp_batch},         {"mlp_lr", p.mlp_lr}};
}

void from_json(const Json& j, ClassifierParams& p) {
  reject_unknown_keys(j, {"lr_iterations", "lr_step", "l2", "svm_iterations", "svm_batch",
                          "svm_step", "nb_alpha", "knn_k", "forest_trees", "forest_min_split",
                          "mlp_hidden", "mlp_epochs", "mlp_batch", "mlp_lr"},
                      "classifier_params");
  read(j, "lr_iterations", p.lr_iterations);
  read(j, "lr_step", p.lr_step);
  read(j, "l2", p.l2);
  read(j, "svm_iterations", p.svm_iterations);
  read(j, "svm_batch", p.svm_batch);
  read(j, "svm_step", p.svm_step);
  read(j, "nb_alpha", p.nb_alpha);
  read(j, "knn_k", p.knn_k);
  read(j, "forest_trees", p.forest_trees);
  read(j, "forest_min_split", p.forest_min_split);
  read(j, "mlp_hidden", p.mlp_hidden);
  read(j, "mlp_epochs", p.mlp_epochs);
  read(j, "mlp_batch", p.mlp_batch);
  read(j, "mlp_lr", p.mlp_lr);
}

}  // namespace utility

}  // namespace synthaug
