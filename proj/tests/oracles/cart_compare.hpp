#pragma once

// Random instances for the exhaustive-split oracle and the comparison
// against fit_tree.

#include <string>

#include "coapids/trees.hpp"
#include "oracles/brute_cart.hpp"
#include "oracles/gen.hpp"

namespace oracle {

struct CartInstance {
  coapids::Matrix x;
  std::vector<int> y;
  std::vector<double> w;
  std::size_t k = 2;
  coapids::trees::TreeParams params;
};

inline CartInstance random_cart_instance(coapids::Rng& rng, std::size_t max_n = 200, std::size_t max_d = 5,
                                         std::size_t max_k = 3, std::size_t max_leaves = 4) {
  CartInstance c;
  const std::size_t n = 2 + rng.below(max_n - 1);
  const std::size_t d = 1 + rng.below(max_d);
  c.k = 2 + rng.below(max_k - 1);
  c.x = rng.below(2) ? gen::coarse_matrix(rng, n, d, 2 + rng.below(8)) : gen::matrix(rng, n, d);
  c.y = gen::labels(rng, n, c.k);
  c.w.assign(n, 1.0);
  switch (rng.below(3)) {
    case 0: break;
    case 1:
      for (double& v : c.w) v = rng.uniform(0.1, 3.0);
      break;
    default:
      for (double& v : c.w) v = static_cast<double>(1 + rng.below(3));
      break;
  }
  c.params.criterion = rng.below(2) ? coapids::trees::Criterion::gini : coapids::trees::Criterion::entropy;
  c.params.max_leaf_nodes = 1 + rng.below(max_leaves);
  return c;
}

// Empty when the fitted tree has the oracle's structure, thresholds and
// leaf distributions, and predicts identically.
inline std::string compare_with_brute(const CartInstance& c) {
  using namespace coapids::trees;
  const TreeModel tree = fit_tree(c.x, c.y, c.w, c.params, c.k);
  const auto brute = BruteCart(c.x, c.y, c.w, c.k,
                               c.params.criterion == Criterion::gini ? Impurity::gini : Impurity::entropy,
                               c.params.max_leaf_nodes)
                         .grow();
  if (tree.nodes.size() != brute.size()) {
    return "node count " + std::to_string(tree.nodes.size()) + " vs oracle " + std::to_string(brute.size());
  }
  for (std::size_t i = 0; i < brute.size(); ++i) {
    const auto& a = tree.nodes[i];
    const auto& b = brute[i];
    if (a.feature != b.feature || a.left != b.left || a.right != b.right) return "structure differs at node " + std::to_string(i);
    if (a.feature >= 0 && a.threshold != b.threshold) return "threshold differs at node " + std::to_string(i);
    for (std::size_t cls = 0; cls < c.k; ++cls) {
      if (std::abs(a.proba[cls] - b.proba[cls]) > 1e-12) return "distribution differs at node " + std::to_string(i);
    }
  }
  const auto pred = predict(Model{tree}, c.x, coapids::Exec::serial);
  for (std::size_t r = 0; r < c.x.rows(); ++r) {
    if (pred[r] != brute_predict(brute, c.x.row(r))) return "prediction differs at row " + std::to_string(r);
  }
  return {};
}

}  // namespace oracle
