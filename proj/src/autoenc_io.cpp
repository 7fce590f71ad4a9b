#include "coapids/autoenc.hpp"
#include "coapids/error.hpp"
#include "json_file.hpp"

namespace coapids::autoenc {

namespace {

constexpr const char* kFormat = "coapids-autoencoder";

nlohmann::json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
}

Matrix matrix_from(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.values().size()) throw Error(Errc::bad_model, "matrix data has the wrong length");
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "linear"; }

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "linear") return Activation::linear;
  throw Error(Errc::bad_model, "unknown activation '" + s + "'");
}

}  // namespace

nlohmann::json to_json(const AEModel& model) {
  const AEConfig& c = model.config;
  nlohmann::json cfg{{"input_dim", c.input_dim},       {"hidden_widths", c.hidden_widths},
                     {"latent_dim", c.latent_dim},     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},     {"learning_rate", c.learning_rate},
                     {"beta1", c.beta1},               {"beta2", c.beta2},
                     {"epsilon", c.epsilon},           {"seed", c.seed},
                     {"output_activation", activation_name(c.output_activation)}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers) {
    layers.push_back({{"weights", matrix_json(l.weights)}, {"bias", l.bias}, {"activation", activation_name(l.activation)}});
  }
  const AdamState& s = model.optimizer;
  nlohmann::json adam{{"step", s.step}};
  for (const char* key : {"m_weights", "v_weights"}) adam[key] = nlohmann::json::array();
  for (std::size_t i = 0; i < s.m_weights.size(); ++i) {
    adam["m_weights"].push_back(matrix_json(s.m_weights[i]));
    adam["v_weights"].push_back(matrix_json(s.v_weights[i]));
  }
  adam["m_bias"] = s.m_bias;
  adam["v_bias"] = s.v_bias;
  return {{"format", kFormat}, {"version", 1}, {"config", cfg}, {"layers", layers}, {"optimizer", adam}};
}

AEModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kFormat || j.at("version") != 1) {
      throw Error(Errc::bad_model, "not a version 1 autoencoder model");
    }
    AEModel model;
    const auto& cfg = j.at("config");
    AEConfig& c = model.config;
    cfg.at("input_dim").get_to(c.input_dim);
    cfg.at("hidden_widths").get_to(c.hidden_widths);
    cfg.at("latent_dim").get_to(c.latent_dim);
    cfg.at("epochs").get_to(c.epochs);
    cfg.at("batch_size").get_to(c.batch_size);
    cfg.at("learning_rate").get_to(c.learning_rate);
    cfg.at("beta1").get_to(c.beta1);
    cfg.at("beta2").get_to(c.beta2);
    cfg.at("epsilon").get_to(c.epsilon);
    cfg.at("seed").get_to(c.seed);
    c.output_activation = activation_from(cfg.at("output_activation").get<std::string>());
    c.validate();

    for (const auto& l : j.at("layers")) {
      model.layers.push_back({matrix_from(l.at("weights")), l.at("bias").get<std::vector<double>>(),
                              activation_from(l.at("activation").get<std::string>())});
    }
    const auto& adam = j.at("optimizer");
    AdamState& s = model.optimizer;
    adam.at("step").get_to(s.step);
    for (const auto& m : adam.at("m_weights")) s.m_weights.push_back(matrix_from(m));
    for (const auto& v : adam.at("v_weights")) s.v_weights.push_back(matrix_from(v));
    adam.at("m_bias").get_to(s.m_bias);
    adam.at("v_bias").get_to(s.v_bias);

    const auto widths = c.widths();
    if (model.layers.size() + 1 != widths.size()) throw Error(Errc::bad_model, "layer count does not match config");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& layer = model.layers[l];
      const bool shapes_ok = layer.weights.rows() == widths[l + 1] && layer.weights.cols() == widths[l] &&
                             layer.bias.size() == widths[l + 1] && l < s.m_weights.size() &&
                             l < s.v_weights.size() && l < s.m_bias.size() && l < s.v_bias.size() &&
                             s.m_weights[l].rows() == widths[l + 1] && s.m_weights[l].cols() == widths[l] &&
                             s.v_weights[l].rows() == widths[l + 1] && s.v_weights[l].cols() == widths[l] &&
                             s.m_bias[l].size() == widths[l + 1] && s.v_bias[l].size() == widths[l + 1];
      if (!shapes_ok) throw Error(Errc::bad_model, "layer " + std::to_string(l) + " has the wrong shape");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_model, std::string("malformed autoencoder: ") + e.what());
  }
}

void save_model(const AEModel& model, const std::filesystem::path& path) {
  detail::write_json_file(to_json(model), path);
}

AEModel load_model(const std::filesystem::path& path) { return model_from_json(detail::read_json_file(path)); }

}  // namespace coapids::autoenc
