#include <cmath>
#include <set>

#include "coapids/error.hpp"
#include "tree_impl.hpp"

namespace coapids::trees {

ForestModel ForestModel::truncated(std::size_t n) const {
  ForestModel out = *this;
  if (n < out.trees.size()) {
    out.trees.resize(n);
    out.info.resize(n);
  }
  return out;
}

ForestModel fit_forest(const Matrix& x, std::span<const int> y, std::span<const double> sample_weights,
                       const ForestParams& params, std::size_t n_classes, Exec exec) {
  const std::size_t k = detail::check_inputs(x, y, sample_weights, n_classes);
  const detail::Columns cols(x);
  const std::size_t d = cols.d;
  const std::size_t mtry = params.features_per_split == 0
                               ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                               : std::min(params.features_per_split, d);

  ForestModel forest;
  forest.n_features = d;
  forest.n_classes = k;
  forest.features_per_split = mtry;
  forest.trees.resize(params.n_estimators);
  forest.info.resize(params.n_estimators);

  const auto n_trees = static_cast<std::ptrdiff_t>(params.n_estimators);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    const std::uint64_t seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
    Rng rng(seed);
    std::vector<double> w(sample_weights.begin(), sample_weights.end());
    if (params.bootstrap) {
      std::vector<std::uint32_t> counts(cols.n, 0);
      for (std::size_t i = 0; i < cols.n; ++i) ++counts[rng.below(cols.n)];
      for (std::size_t i = 0; i < cols.n; ++i) w[i] *= counts[i];
    }
    detail::GrowOptions opt;
    opt.criterion = params.criterion;
    opt.features_per_split = mtry;
    opt.rng = &rng;
    TreeModel tree = detail::grow_classifier(cols, y, w, k, opt);

    std::set<int> used;
    for (const TreeNode& node : tree.nodes) {
      if (!node.is_leaf()) used.insert(node.feature);
    }
    forest.info[static_cast<std::size_t>(t)] = {seed, std::vector<int>(used.begin(), used.end())};
    forest.trees[static_cast<std::size_t>(t)] = std::move(tree);
  }
  return forest;
}

}  // namespace coapids::trees
