#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "coapids/exec.hpp"
#include "coapids/kernels.hpp"
#include "coapids/matrix.hpp"

namespace coapids::autoenc {

using kernels::Activation;

/// Symmetric dense autoencoder: d -> hidden... -> latent -> ...hidden -> d.
/// Hidden layers use relu, the latent layer is linear, the output layer uses
/// output_activation.
struct AEConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths{35, 28};
  std::size_t latent_dim = 2;
  std::size_t epochs = 50;
  std::size_t batch_size = 50;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  Activation output_activation = Activation::relu;

  /// Layer widths from input to output, e.g. {d, 35, 28, N, 28, 35, d}.
  std::vector<std::size_t> widths() const;
  /// Throws Error(invalid_config).
  void validate() const;

  bool operator==(const AEConfig&) const = default;
};

struct DenseLayer {
  Matrix weights;  // (out x in)
  std::vector<double> bias;
  Activation activation = Activation::relu;

  bool operator==(const DenseLayer&) const = default;
};

/// First and second moment estimates, one pair per parameter tensor.
struct AdamState {
  std::vector<Matrix> m_weights, v_weights;
  std::vector<std::vector<double>> m_bias, v_bias;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

struct AEModel {
  AEConfig config;
  std::vector<DenseLayer> layers;
  AdamState optimizer;

  /// Index of the layer that produces the latent code.
  std::size_t latent_layer() const noexcept { return config.hidden_widths.size(); }

  bool operator==(const AEModel&) const = default;
};

/// Glorot-uniform weights, zero biases, zeroed optimizer state.
AEModel initialize(const AEConfig& config);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

/// Mean squared reconstruction error of a batch and its gradient with
/// respect to every parameter.
double loss_and_gradients(const AEModel& model, const Matrix& batch, Gradients& grads, Exec exec = Exec::parallel);

/// Mean over all n*d entries of (reconstruct(X) - X)^2.
double reconstruction_mse(const AEModel& model, const Matrix& x, Exec exec = Exec::parallel);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of a flat tensor. step is the 1-based
/// step number after incrementing.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 std::uint64_t step, const AdamHyper& hyper);

/// Increments the step counter and applies adam_update to every tensor.
void adam_step(AEModel& model, const Gradients& grads);

struct TrainResult {
  AEModel model;
  std::vector<double> loss_history;  // full-data MSE after each epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Minibatch Adam on the reconstruction MSE. Rows are reshuffled each epoch
/// with the seeded generator; the last batch may be short. Throws
/// Error(dimension_mismatch) or Error(non_finite_loss).
TrainResult train(const Matrix& x, const AEConfig& config, const EpochCallback& on_epoch = {},
                  Exec exec = Exec::parallel);

/// Encoder half only; returns the (n x latent_dim) codes.
Matrix encode(const AEModel& model, const Matrix& x, Exec exec = Exec::parallel);

/// Full forward pass; returns (n x d).
Matrix reconstruct(const AEModel& model, const Matrix& x, Exec exec = Exec::parallel);

nlohmann::json to_json(const AEModel& model);
AEModel model_from_json(const nlohmann::json& j);
void save_model(const AEModel& model, const std::filesystem::path& path);
AEModel load_model(const std::filesystem::path& path);

}  // namespace coapids::autoenc
