#pragma once

#include <cstdint>
#include <span>

#include "coapids/exec.hpp"
#include "coapids/matrix.hpp"

namespace coapids::kernels {

enum class Activation : std::uint8_t { linear, relu };

// Every kernel has a serial reference and an OpenMP version. Each output
// element is produced by exactly one thread with a fixed summation order,
// so the two agree bit for bit.

namespace serial {

/// out = act(in * weights^T + bias). weights is (out_dim x in_dim).
void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out);

/// Backward pass of dense_forward. grad_out holds dL/d(out) on entry and is
/// overwritten with dL/d(pre-activation). grad_in may be null.
void dense_backward(const Matrix& in, const Matrix& out, const Matrix& weights, Activation act, Matrix& grad_out,
                    Matrix& grad_weights, std::span<double> grad_bias, Matrix* grad_in);

/// values[:, j] = clamp((values[:, j] - mins[j]) / (maxs[j] - mins[j]), 0, 1),
/// or 0 where maxs[j] <= mins[j].
void minmax_scale(Matrix& values, std::span<const double> mins, std::span<const double> maxs);

}  // namespace serial

namespace parallel {

void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out);
void dense_backward(const Matrix& in, const Matrix& out, const Matrix& weights, Activation act, Matrix& grad_out,
                    Matrix& grad_weights, std::span<double> grad_bias, Matrix* grad_in);
void minmax_scale(Matrix& values, std::span<const double> mins, std::span<const double> maxs);

}  // namespace parallel

inline void dense_forward(Exec exec, const Matrix& in, const Matrix& weights, std::span<const double> bias,
                          Activation act, Matrix& out) {
  exec == Exec::serial ? serial::dense_forward(in, weights, bias, act, out)
                       : parallel::dense_forward(in, weights, bias, act, out);
}

inline void minmax_scale(Exec exec, Matrix& values, std::span<const double> mins, std::span<const double> maxs) {
  exec == Exec::serial ? serial::minmax_scale(values, mins, maxs) : parallel::minmax_scale(values, mins, maxs);
}

}  // namespace coapids::kernels
