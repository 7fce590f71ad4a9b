#include <benchmark/benchmark.h>

#include <numeric>

#include "coapids/kernels.hpp"
#include "coapids/random.hpp"
#include "coapids/trees.hpp"

namespace {

using coapids::Exec;
using coapids::Matrix;
namespace kernels = coapids::kernels;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  coapids::Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

void BM_DenseForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix in = random_matrix(rows, 48, 1);
  const Matrix w = random_matrix(35, 48, 2);
  const std::vector<double> bias(35, 0.1);
  Matrix out(rows, 35);
  for (auto _ : state) {
    kernels::dense_forward(exec_of(state), in, w, bias, kernels::Activation::relu, out);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DenseBackward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix in = random_matrix(rows, 48, 1);
  const Matrix w = random_matrix(35, 48, 2);
  const std::vector<double> bias(35, 0.1);
  Matrix out(rows, 35);
  kernels::serial::dense_forward(in, w, bias, kernels::Activation::relu, out);
  const Matrix grad = random_matrix(rows, 35, 3);
  Matrix gw(35, 48), gin(rows, 48);
  std::vector<double> gb(35);
  for (auto _ : state) {
    Matrix g = grad;
    if (exec_of(state) == Exec::serial) {
      kernels::serial::dense_backward(in, out, w, kernels::Activation::relu, g, gw, gb, &gin);
    } else {
      kernels::parallel::dense_backward(in, out, w, kernels::Activation::relu, g, gw, gb, &gin);
    }
    benchmark::DoNotOptimize(gin.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MinMax(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix base = random_matrix(rows, 48, 4);
  const std::vector<double> lo(48, -0.5), hi(48, 0.5);
  for (auto _ : state) {
    Matrix m = base;
    kernels::minmax_scale(exec_of(state), m, lo, hi);
    benchmark::DoNotOptimize(m.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct ForestData {
  Matrix x;
  std::vector<int> y;
  std::vector<double> w;
};

ForestData forest_data(std::size_t rows) {
  ForestData d{random_matrix(rows, 4, 5), std::vector<int>(rows), std::vector<double>(rows, 1.0)};
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = d.x.row(i);
    d.y[i] = (r[0] > 0.0 ? 1 : 0) + (r[1] + r[2] > 0.3 ? 2 : 0);
  }
  return d;
}

void BM_ForestFit(benchmark::State& state) {
  const ForestData d = forest_data(static_cast<std::size_t>(state.range(0)));
  coapids::trees::ForestParams p;
  p.n_estimators = 16;
  for (auto _ : state) {
    auto f = coapids::trees::fit_forest(d.x, d.y, d.w, p, 4, exec_of(state));
    benchmark::DoNotOptimize(f.trees.data());
  }
}

void BM_ForestPredict(benchmark::State& state) {
  const ForestData d = forest_data(static_cast<std::size_t>(state.range(0)));
  coapids::trees::ForestParams p;
  p.n_estimators = 16;
  const coapids::trees::Model model = coapids::trees::fit_forest(d.x, d.y, d.w, p, 4, Exec::serial);
  for (auto _ : state) {
    auto proba = coapids::trees::predict_proba(model, d.x, exec_of(state));
    benchmark::DoNotOptimize(proba.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BoostFit(benchmark::State& state) {
  const ForestData d = forest_data(static_cast<std::size_t>(state.range(0)));
  coapids::trees::BoostParams p;
  p.n_estimators = 10;
  for (auto _ : state) {
    auto b = coapids::trees::fit_boost(d.x, d.y, d.w, p, 4, exec_of(state));
    benchmark::DoNotOptimize(b.rounds.data());
  }
}

}  // namespace

// Second argument: 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_DenseForward)->ArgsProduct({{1024, 16384}, {0, 1}});
BENCHMARK(BM_DenseBackward)->ArgsProduct({{1024, 16384}, {0, 1}});
BENCHMARK(BM_MinMax)->ArgsProduct({{1024, 65536}, {0, 1}});
BENCHMARK(BM_ForestFit)->ArgsProduct({{4096}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestPredict)->ArgsProduct({{4096}, {0, 1}});
BENCHMARK(BM_BoostFit)->ArgsProduct({{4096}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
