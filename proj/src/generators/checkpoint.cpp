#include "synthaug/generators/checkpoint.hpp"

#include <fstream>

#include "synthaug/error.hpp"

namespace synthaug::gen {

namespace {

constexpr const char* kFormat = "synthaug-model";

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_width(const nn::Network& net, std::size_t expected_in, const char* what) {
  if (net.input_dim() != expected_in)
    throw Error(ErrorCode::dimension_mismatch,
                std::string("checkpoint ") + what + " input width does not match its config");
}

}  // namespace

Json model_to_json(const GeneratorModel& model) {
  Json j{{"format", kFormat},
         {"version", kCheckpointVersion},
         {"feature_columns", model.feature_columns}};
  std::visit(overloaded{[&](const VaeModel& m) {
                          j["generator"] = config_to_json(m.config);
                          j["networks"] = {{"encoder", m.encoder}, {"decoder", m.decoder}};
                        },
                        [&](const DpGanModel& m) {
                          j["generator"] = config_to_json(m.config);
                          j["networks"] = {{"generator", m.generator},
                                           {"discriminator", m.discriminator}};
                        },
                        [&](const CtGanModel& m) {
                          j["generator"] = config_to_json(m.config);
                          j["networks"] = {{"generator", m.generator},
                                           {"discriminator", m.discriminator}};
                          j["sampler_counts"] = m.sampler.counts();
                        }},
             model.body);
  return j;
}

GeneratorModel model_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat)
      throw Error(ErrorCode::parse_error, "not a synthaug model file");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw Error(ErrorCode::parse_error, "unsupported model file version");
    GeneratorModel model;
    model.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    const std::size_t width = model.width();
    const AnyConfig cfg = config_from_json(j.at("generator"));
    const Json& nets = j.at("networks");
    std::visit(
        overloaded{
            [&](const VaeConfig& c) {
              VaeModel m{c, nets.at("encoder").get<nn::Network>(),
                         nets.at("decoder").get<nn::Network>()};
              check_width(m.encoder, width, "encoder");
              check_width(m.decoder, c.latent_dim, "decoder");
              model.body = std::move(m);
            },
            [&](const DpGanConfig& c) {
              DpGanModel m{c, nets.at("generator").get<nn::Network>(),
                           nets.at("discriminator").get<nn::Network>()};
              check_width(m.generator, c.latent_dim, "generator");
              check_width(m.discriminator, width, "discriminator");
              model.body = std::move(m);
            },
            [&](const CtGanConfig& c) {
              CtGanModel m{c, nets.at("generator").get<nn::Network>(),
                           nets.at("discriminator").get<nn::Network>(),
                           CategorySampler(j.at("sampler_counts")
                                               .get<std::vector<std::array<std::size_t, 2>>>())};
              if (m.sampler.columns() != width)
                throw Error(ErrorCode::dimension_mismatch, "checkpoint sampler width mismatch");
              check_width(m.generator, c.embedding_dim + (c.conditional ? 2 * width : 0),
                          "generator");
              model.body = std::move(m);
            }},
        cfg);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed model file: ") + e.what());
  }
}

void save_checkpoint(const GeneratorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

GeneratorModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace synthaug::gen
