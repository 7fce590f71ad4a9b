#pragma once

// Exhaustive-split classification tree. Every node recounts its class sums
// from scratch for every candidate threshold, so the only thing it shares
// with the real grower is the tie rule:
//   candidates are visited feature-ascending, threshold-ascending; a later
//   candidate wins only if its gain exceeds the best by more than tol, and
//   the first must exceed tol itself. The frontier is scanned by node id
//   under the same rule. tol = 1e-12 * root weight.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "coapids/matrix.hpp"

namespace oracle {

enum class Impurity { gini, entropy };

struct BruteNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> proba;
};

inline double brute_impurity(Impurity c, const std::vector<double>& sums) {
  double total = 0.0;
  for (double s : sums) total += s;
  if (total <= 0.0) return 0.0;
  if (c == Impurity::gini) {
    double sq = 0.0;
    for (double s : sums) sq += (s / total) * (s / total);
    return std::max(0.0, 1.0 - sq);
  }
  double h = 0.0;
  for (double s : sums) {
    if (s > 0.0) h -= (s / total) * std::log(s / total) / std::log(2.0);
  }
  return std::max(0.0, h);
}

class BruteCart {
 public:
  BruteCart(const coapids::Matrix& x, std::span<const int> y, std::span<const double> w, std::size_t k, Impurity c,
            std::size_t max_leaves, std::size_t min_samples_split = 2)
      : x_(x), y_(y), w_(w), k_(k), c_(c), max_leaves_(max_leaves), min_split_(min_samples_split) {}

  std::vector<BruteNode> grow() {
    std::vector<std::size_t> all;
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      if (w_[r] > 0.0) all.push_back(r);
    }
    double root_w = 0.0;
    for (std::size_t r : all) root_w += w_[r];
    tol_ = 1e-12 * root_w;

    nodes_.clear();
    rows_.clear();
    cand_.clear();
    add_node(all);
    std::set<std::size_t> frontier{0};
    std::size_t leaves = 1;
    while (leaves < max_leaves_) {
      bool found = false;
      std::size_t pick = 0;
      double best = 0.0;
      for (std::size_t id : frontier) {
        if (!cand_[id].ok) continue;
        if (!found || cand_[id].gain > best + tol_) {
          found = true;
          pick = id;
          best = cand_[id].gain;
        }
        if (max_leaves_ == std::numeric_limits<std::size_t>::max()) break;
      }
      if (!found) break;
      frontier.erase(pick);
      const Cand s = cand_[pick];
      std::vector<std::size_t> l, r;
      for (std::size_t row : rows_[pick]) (x_(row, s.feature) <= s.threshold ? l : r).push_back(row);
      nodes_[pick].feature = static_cast<int>(s.feature);
      nodes_[pick].threshold = s.threshold;
      const std::size_t left_id = add_node(l);
      const std::size_t right_id = add_node(r);
      nodes_[pick].left = static_cast<int>(left_id);
      nodes_[pick].right = static_cast<int>(right_id);
      frontier.insert(left_id);
      frontier.insert(right_id);
      ++leaves;
    }
    return nodes_;
  }

 private:
  struct Cand {
    bool ok = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
  };

  std::vector<double> sums_of(const std::vector<std::size_t>& rows) const {
    std::vector<double> s(k_, 0.0);
    for (std::size_t r : rows) s[static_cast<std::size_t>(y_[r])] += w_[r];
    return s;
  }

  std::size_t add_node(const std::vector<std::size_t>& rows) {
    const auto sums = sums_of(rows);
    double total = 0.0;
    for (double v : sums) total += v;
    BruteNode n;
    for (double v : sums) n.proba.push_back(total > 0.0 ? v / total : 0.0);
    nodes_.push_back(n);
    rows_.push_back(rows);
    cand_.push_back(rows.size() >= min_split_ && brute_impurity(c_, sums) > 0.0 ? best_split(rows) : Cand{});
    return nodes_.size() - 1;
  }

  Cand best_split(const std::vector<std::size_t>& rows) const {
    Cand best;
    const auto sums = sums_of(rows);
    double total = 0.0;
    for (double v : sums) total += v;
    const double parent = total * brute_impurity(c_, sums);
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      std::vector<double> values;
      for (std::size_t r : rows) values.push_back(x_(r, f));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double lo = values[i], hi = values[i + 1];
        double t = 0.5 * (lo + hi);
        if (!(t < hi)) t = lo;
        std::vector<double> ls(k_, 0.0), rs(k_, 0.0);
        double lw = 0.0, rw = 0.0;
        for (std::size_t r : rows) {
          const double wr = w_[r];
          if (x_(r, f) <= t) {
            ls[static_cast<std::size_t>(y_[r])] += wr;
            lw += wr;
          } else {
            rs[static_cast<std::size_t>(y_[r])] += wr;
            rw += wr;
          }
        }
        const double gain = parent - lw * brute_impurity(c_, ls) - rw * brute_impurity(c_, rs);
        if (best.ok ? gain > best.gain + tol_ : gain > tol_) best = {true, f, t, gain};
      }
    }
    return best;
  }

  const coapids::Matrix& x_;
  std::span<const int> y_;
  std::span<const double> w_;
  std::size_t k_;
  Impurity c_;
  std::size_t max_leaves_;
  std::size_t min_split_;
  double tol_ = 0.0;
  std::vector<BruteNode> nodes_;
  std::vector<std::vector<std::size_t>> rows_;
  std::vector<Cand> cand_;
};

inline std::size_t brute_leaf(const std::vector<BruteNode>& nodes, std::span<const double> x) {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                       : nodes[i].right);
  }
  return i;
}

inline int brute_predict(const std::vector<BruteNode>& nodes, std::span<const double> x) {
  const auto& p = nodes[brute_leaf(nodes, x)].proba;
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace oracle
