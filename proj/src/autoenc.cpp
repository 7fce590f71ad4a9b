#include "coapids/autoenc.hpp"

#include <cmath>
#include <numeric>

#include "coapids/error.hpp"
#include "coapids/random.hpp"

namespace coapids::autoenc {

namespace {

void check_width(const AEModel& model, const Matrix& x) {
  if (x.cols() != model.config.input_dim) {
    throw Error(Errc::dimension_mismatch, "input has " + std::to_string(x.cols()) + " columns, model expects " +
                                              std::to_string(model.config.input_dim));
  }
}

void forward_layer(Exec exec, const DenseLayer& layer, const Matrix& in, Matrix& out) {
  if (out.rows() != in.rows() || out.cols() != layer.weights.rows()) out = Matrix(in.rows(), layer.weights.rows());
  kernels::dense_forward(exec, in, layer.weights, layer.bias, layer.activation, out);
}

// Runs layers [0, count) and keeps every activation; acts[0] is the input.
void forward_all(Exec exec, const AEModel& model, const Matrix& x, std::size_t count, std::vector<Matrix>& acts) {
  acts.resize(count + 1);
  acts[0] = x;
  for (std::size_t l = 0; l < count; ++l) forward_layer(exec, model.layers[l], acts[l], acts[l + 1]);
}

Matrix forward_to(Exec exec, const AEModel& model, const Matrix& x, std::size_t count) {
  check_width(model, x);
  Matrix cur = x, next;
  for (std::size_t l = 0; l < count; ++l) {
    forward_layer(exec, model.layers[l], cur, next);
    std::swap(cur, next);
  }
  return cur;
}

double mse(const Matrix& y, const Matrix& x) {
  double sum = 0.0;
  const auto a = y.values();
  const auto b = x.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - b[i];
    sum += e * e;
  }
  return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

}  // namespace

std::vector<std::size_t> AEConfig::widths() const {
  std::vector<std::size_t> w{input_dim};
  w.insert(w.end(), hidden_widths.begin(), hidden_widths.end());
  w.push_back(latent_dim);
  w.insert(w.end(), hidden_widths.rbegin(), hidden_widths.rend());
  w.push_back(input_dim);
  return w;
}

void AEConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::invalid_config, what); };
  if (input_dim == 0) bad("input_dim must be positive");
  if (latent_dim == 0) bad("latent_dim must be at least 1");
  for (std::size_t w : hidden_widths) {
    if (w == 0) bad("hidden widths must be positive");
  }
  if (batch_size == 0) bad("batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be finite and >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) bad("adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) bad("adam epsilon must be positive");
}

AEModel initialize(const AEConfig& config) {
  config.validate();
  AEModel model;
  model.config = config;
  Rng rng(config.seed);
  const auto widths = config.widths();
  const std::size_t latent = config.hidden_widths.size();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l];
    const std::size_t fan_out = widths[l + 1];
    DenseLayer layer;
    layer.weights = Matrix(fan_out, fan_in);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weights.values()) w = rng.uniform(-limit, limit);
    layer.bias.assign(fan_out, 0.0);
    if (l == latent) {
      layer.activation = Activation::linear;
    } else if (l + 2 == widths.size()) {
      layer.activation = config.output_activation;
    } else {
      layer.activation = Activation::relu;
    }
    model.optimizer.m_weights.emplace_back(fan_out, fan_in);
    model.optimizer.v_weights.emplace_back(fan_out, fan_in);
    model.optimizer.m_bias.emplace_back(fan_out, 0.0);
    model.optimizer.v_bias.emplace_back(fan_out, 0.0);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

double loss_and_gradients(const AEModel& model, const Matrix& batch, Gradients& grads, Exec exec) {
  check_width(model, batch);
  const std::size_t depth = model.layers.size();
  std::vector<Matrix> acts;
  forward_all(exec, model, batch, depth, acts);

  const Matrix& y = acts[depth];
  const double loss = mse(y, batch);
  const double scale = 2.0 / static_cast<double>(y.rows() * y.cols());
  Matrix delta(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.values().size(); ++i) delta.values()[i] = scale * (y.values()[i] - batch.values()[i]);

  grads.weights.resize(depth);
  grads.bias.resize(depth);
  Matrix grad_in;
  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = model.layers[l];
    if (grads.weights[l].rows() != layer.weights.rows() || grads.weights[l].cols() != layer.weights.cols()) {
      grads.weights[l] = Matrix(layer.weights.rows(), layer.weights.cols());
    }
    grads.bias[l].resize(layer.bias.size());
    Matrix* want_in = nullptr;
    if (l > 0) {
      grad_in = Matrix(acts[l].rows(), acts[l].cols());
      want_in = &grad_in;
    }
    if (exec == Exec::serial) {
      kernels::serial::dense_backward(acts[l], acts[l + 1], layer.weights, layer.activation, delta, grads.weights[l],
                                      grads.bias[l], want_in);
    } else {
      kernels::parallel::dense_backward(acts[l], acts[l + 1], layer.weights, layer.activation, delta,
                                        grads.weights[l], grads.bias[l], want_in);
    }
    if (l > 0) std::swap(delta, grad_in);
  }
  return loss;
}

double reconstruction_mse(const AEModel& model, const Matrix& x, Exec exec) {
  return mse(reconstruct(model, x, exec), x);
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 std::uint64_t step, const AdamHyper& h) {
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

void adam_step(AEModel& model, const Gradients& grads) {
  const AdamHyper hyper{model.config.learning_rate, model.config.beta1, model.config.beta2, model.config.epsilon};
  AdamState& s = model.optimizer;
  ++s.step;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    adam_update(model.layers[l].weights.values(), grads.weights[l].values(), s.m_weights[l].values(),
                s.v_weights[l].values(), s.step, hyper);
    adam_update(model.layers[l].bias, grads.bias[l], s.m_bias[l], s.v_bias[l], s.step, hyper);
  }
}

TrainResult train(const Matrix& x, const AEConfig& config, const EpochCallback& on_epoch, Exec exec) {
  TrainResult result{initialize(config), {}};
  AEModel& model = result.model;
  check_width(model, x);
  if (x.rows() == 0) throw Error(Errc::empty_data, "autoencoder training needs at least one row");

  // Continue the stream used for initialization so one seed fixes everything.
  Rng rng(config.seed);
  for (const auto& layer : model.layers) {
    for (std::size_t i = 0; i < layer.weights.values().size(); ++i) rng.uniform();
  }

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Gradients grads;
  result.loss_history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const Matrix batch = x.gather_rows(std::span(order).subspan(start, stop - start));
      loss_and_gradients(model, batch, grads, exec);
      adam_step(model, grads);
    }
    const double loss = reconstruction_mse(model, x, exec);
    if (!std::isfinite(loss)) {
      throw Error(Errc::non_finite_loss, "loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);
  }
  return result;
}

Matrix encode(const AEModel& model, const Matrix& x, Exec exec) {
  return forward_to(exec, model, x, model.latent_layer() + 1);
}

Matrix reconstruct(const AEModel& model, const Matrix& x, Exec exec) {
  return forward_to(exec, model, x, model.layers.size());
}

}  // namespace coapids::autoenc
