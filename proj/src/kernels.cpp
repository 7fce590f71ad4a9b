#include "coapids/kernels.hpp"

#include <algorithm>
#include <cstddef>

namespace coapids::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 15;

inline void forward_row(const Matrix& in, const Matrix& w, std::span<const double> b, Activation act,
                        Matrix& out, std::size_t i) {
  const auto x = in.row(i);
  auto y = out.row(i);
  for (std::size_t j = 0; j < w.rows(); ++j) {
    const auto wj = w.row(j);
    double acc = b[j];
    for (std::size_t k = 0; k < x.size(); ++k) acc += wj[k] * x[k];
    y[j] = (act == Activation::relu && acc < 0.0) ? 0.0 : acc;
  }
}

inline void activation_grad_row(const Matrix& out, Activation act, Matrix& grad, std::size_t i) {
  if (act != Activation::relu) return;
  const auto y = out.row(i);
  auto g = grad.row(i);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!(y[j] > 0.0)) g[j] = 0.0;
  }
}

inline void weight_grad_row(const Matrix& in, const Matrix& delta, Matrix& gw, std::span<double> gb,
                            std::size_t j) {
  auto gwj = gw.row(j);
  std::fill(gwj.begin(), gwj.end(), 0.0);
  double bias = 0.0;
  for (std::size_t i = 0; i < in.rows(); ++i) {
    const double d = delta(i, j);
    bias += d;
    if (d == 0.0) continue;
    const auto x = in.row(i);
    for (std::size_t k = 0; k < x.size(); ++k) gwj[k] += d * x[k];
  }
  gb[j] = bias;
}

inline void input_grad_row(const Matrix& delta, const Matrix& w, Matrix& gin, std::size_t i) {
  auto gi = gin.row(i);
  std::fill(gi.begin(), gi.end(), 0.0);
  const auto d = delta.row(i);
  for (std::size_t j = 0; j < w.rows(); ++j) {
    if (d[j] == 0.0) continue;
    const auto wj = w.row(j);
    for (std::size_t k = 0; k < gi.size(); ++k) gi[k] += d[j] * wj[k];
  }
}

inline void scale_row(Matrix& values, std::span<const double> mins, std::span<const double> maxs, std::size_t i) {
  auto r = values.row(i);
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double span = maxs[j] - mins[j];
    r[j] = span > 0.0 ? std::clamp((r[j] - mins[j]) / span, 0.0, 1.0) : 0.0;
  }
}

}  // namespace

namespace serial {

void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out) {
  for (std::size_t i = 0; i < in.rows(); ++i) forward_row(in, weights, bias, act, out, i);
}

void dense_backward(const Matrix& in, const Matrix& out, const Matrix& weights, Activation act, Matrix& grad_out,
                    Matrix& grad_weights, std::span<double> grad_bias, Matrix* grad_in) {
  for (std::size_t i = 0; i < out.rows(); ++i) activation_grad_row(out, act, grad_out, i);
  for (std::size_t j = 0; j < weights.rows(); ++j) weight_grad_row(in, grad_out, grad_weights, grad_bias, j);
  if (grad_in) {
    for (std::size_t i = 0; i < in.rows(); ++i) input_grad_row(grad_out, weights, *grad_in, i);
  }
}

void minmax_scale(Matrix& values, std::span<const double> mins, std::span<const double> maxs) {
  for (std::size_t i = 0; i < values.rows(); ++i) scale_row(values, mins, maxs, i);
}

}  // namespace serial

namespace parallel {

void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out) {
  const auto n = static_cast<std::ptrdiff_t>(in.rows());
  const bool big = in.rows() * weights.rows() * weights.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < n; ++i) forward_row(in, weights, bias, act, out, static_cast<std::size_t>(i));
}

void dense_backward(const Matrix& in, const Matrix& out, const Matrix& weights, Activation act, Matrix& grad_out,
                    Matrix& grad_weights, std::span<double> grad_bias, Matrix* grad_in) {
  const auto n = static_cast<std::ptrdiff_t>(out.rows());
  const auto q = static_cast<std::ptrdiff_t>(weights.rows());
  const bool big = in.rows() * weights.rows() * weights.cols() >= kParallelWork;
#pragma omp parallel if (big)
  {
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) activation_grad_row(out, act, grad_out, static_cast<std::size_t>(i));
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < q; ++j)
      weight_grad_row(in, grad_out, grad_weights, grad_bias, static_cast<std::size_t>(j));
    if (grad_in) {
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) input_grad_row(grad_out, weights, *grad_in, static_cast<std::size_t>(i));
    }
  }
}

void minmax_scale(Matrix& values, std::span<const double> mins, std::span<const double> maxs) {
  const auto n = static_cast<std::ptrdiff_t>(values.rows());
  const bool big = values.rows() * values.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < n; ++i) scale_row(values, mins, maxs, static_cast<std::size_t>(i));
}

}  // namespace parallel

}  // namespace coapids::kernels
