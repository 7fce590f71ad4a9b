#include <algorithm>
#include <exception>
#include <mutex>

#include "coapids/error.hpp"
#include "coapids/eval.hpp"
#include "coapids/random.hpp"

namespace coapids::eval {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// Splits params into the part that must match for a shared fit and the
// size that can be cut back after fitting.
std::pair<trees::Params, std::size_t> split_prefix(trees::Params p) {
  std::size_t size = 0;
  std::visit(Overloaded{
                 [&](trees::TreeParams& t) { size = std::exchange(t.max_leaf_nodes, 0); },
                 [&](trees::ForestParams& f) { size = std::exchange(f.n_estimators, 0); },
                 [&](trees::BoostParams& b) { size = std::exchange(b.n_estimators, 0); },
             },
             p);
  return {p, size};
}

trees::Params with_size(trees::Params p, std::size_t size) {
  std::visit(Overloaded{
                 [&](trees::TreeParams& t) { t.max_leaf_nodes = size; },
                 [&](trees::ForestParams& f) { f.n_estimators = size; },
                 [&](trees::BoostParams& b) { b.n_estimators = size; },
             },
             p);
  return p;
}

trees::Model cut_back(const trees::Model& m, std::size_t size) {
  return std::visit(Overloaded{
                        [&](const trees::TreeModel& t) -> trees::Model { return t.truncated(size); },
                        [&](const trees::ForestModel& f) -> trees::Model { return f.truncated(size); },
                        [&](const trees::BoostModel& b) -> trees::Model { return b.truncated(size); },
                    },
                    m);
}

struct Group {
  trees::Params shared;
  std::size_t largest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> members;  // (point index, size)
};

}  // namespace

trees::Params with_seed(trees::Params p, std::uint64_t seed) {
  std::visit([&](auto& v) { v.seed = seed; }, p);
  return p;
}

std::vector<trees::Params> default_grid(Learner l) {
  using trees::Criterion;
  std::vector<trees::Params> grid;
  switch (l) {
    case Learner::dt:
      for (std::size_t leaves : {8, 16, 32, 64, 128}) {
        for (Criterion c : {Criterion::gini, Criterion::entropy}) {
          trees::TreeParams p;
          p.max_leaf_nodes = leaves;
          p.criterion = c;
          grid.emplace_back(p);
        }
      }
      break;
    case Learner::rf:
      for (std::size_t n : {50, 100, 200}) {
        for (Criterion c : {Criterion::gini, Criterion::entropy}) {
          trees::ForestParams p;
          p.n_estimators = n;
          p.criterion = c;
          grid.emplace_back(p);
        }
      }
      break;
    case Learner::xgb:
      for (std::size_t n : {50, 100, 200}) {
        for (std::size_t depth : {3, 6, 10}) {
          trees::BoostParams p;
          p.n_estimators = n;
          p.max_depth = depth;
          grid.emplace_back(p);
        }
      }
      break;
  }
  return grid;
}

GridResult grid_search(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                       std::span<const trees::Params> grid, std::uint64_t seed, const GridOptions& options) {
  if (grid.empty()) throw Error(Errc::invalid_config, "empty hyperparameter grid");
  if (y.size() != x.rows()) throw Error(Errc::length_mismatch, "labels do not match the row count");
  const std::size_t k = options.k_folds;
  const std::vector<int> fold = stratified_folds(y, k, seed);

  std::vector<Group> groups;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto [shared, size] = split_prefix(grid[i]);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.shared == shared; });
    if (it == groups.end()) {
      groups.push_back({shared, 0, {}});
      it = groups.end() - 1;
    }
    it->largest = std::max(it->largest, size);
    it->members.emplace_back(i, size);
  }

  GridResult result;
  for (const auto& p : grid) result.points.push_back({p, std::vector<double>(k, 0.0), 0.0});

  const auto units = static_cast<std::ptrdiff_t>(groups.size() * k);
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic) if (options.exec == Exec::parallel)
  for (std::ptrdiff_t u = 0; u < units; ++u) {
    try {
      const Group& g = groups[static_cast<std::size_t>(u) / k];
      const auto f = static_cast<int>(static_cast<std::size_t>(u) % k);
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t r = 0; r < y.size(); ++r) (fold[r] == f ? test_rows : train_rows).push_back(r);
      const Matrix x_train = x.gather_rows(train_rows);
      const Matrix x_test = x.gather_rows(test_rows);
      std::vector<int> y_train, y_test;
      for (std::size_t r : train_rows) y_train.push_back(y[r]);
      for (std::size_t r : test_rows) y_test.push_back(y[r]);
      const std::vector<double> w = options.class_weighting
                                        ? trees::compute_class_weights(y_train).sample_weights(y_train)
                                        : std::vector<double>(y_train.size(), 1.0);

      const trees::Params params = with_seed(with_size(g.shared, g.largest), derive_seed(seed, static_cast<std::uint64_t>(f)));
      const trees::Model full = trees::fit(x_train, y_train, w, params, n_classes, Exec::serial);
      for (const auto& [point, size] : g.members) {
        const auto pred = trees::predict(cut_back(full, size), x_test, Exec::serial);
        result.points[point].fold_f1[static_cast<std::size_t>(f)] = compute_metrics(y_test, pred, n_classes).f1;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < result.points.size(); ++i) {
    GridPoint& p = result.points[i];
    double sum = 0.0;
    for (double v : p.fold_f1) sum += v;
    p.mean_f1 = sum / static_cast<double>(k);
    if (p.mean_f1 > result.points[result.best].mean_f1) result.best = i;
  }
  return result;
}

}  // namespace coapids::eval
