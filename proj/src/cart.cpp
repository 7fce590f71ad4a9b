#include <algorithm>
#include <numeric>

#include "coapids/error.hpp"
#include "tree_impl.hpp"

namespace coapids::trees {

namespace detail {

namespace {

struct Split {
  bool ok = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct Open {
  std::size_t node;
  std::size_t begin, end;
  Split split;
};

class ClassifierGrower {
 public:
  ClassifierGrower(const Columns& cols, std::span<const int> y, std::span<const double> w, std::size_t k,
                   const GrowOptions& opt)
      : cols_(cols),
        y_(y),
        w_(w),
        k_(k),
        opt_(opt),
        index_(cols, positive_rows(w)),
        left_(k),
        right_(k),
        go_left_(cols.n, 0) {}

  TreeModel grow() {
    TreeModel tree;
    tree.n_features = cols_.d;
    tree.n_classes = k_;
    nodes_ = &tree.nodes;

    std::vector<double> sums(k_, 0.0);
    for (std::uint32_t r : index_.segment(0, 0, index_.size())) sums[static_cast<std::size_t>(y_[r])] += w_[r];
    root_weight_ = std::accumulate(sums.begin(), sums.end(), 0.0);
    tol_ = kTieTolerance * root_weight_;

    std::vector<Open> open;
    open.push_back(make_node(0, index_.size()));
    std::size_t leaves = 1;
    std::size_t rank = 0;
    std::size_t head = 0;  // queue position when growth is unlimited
    const bool unlimited = opt_.max_leaves == kUnlimited;
    while (leaves < opt_.max_leaves) {
      std::size_t pick = open.size();
      if (unlimited) {
        while (head < open.size() && !open[head].split.ok) ++head;
        pick = head;
      } else {
        double best = 0.0;
        for (std::size_t i = 0; i < open.size(); ++i) {
          const Split& s = open[i].split;
          if (s.ok && (pick == open.size() || s.gain > best + tol_)) {
            pick = i;
            best = s.gain;
          }
        }
      }
      if (pick >= open.size()) break;
      const Open cur = open[pick];
      if (unlimited) {
        ++head;
      } else {
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
      }

      const double* v = cols_.col(static_cast<std::size_t>(cur.split.feature));
      for (std::uint32_t r : index_.segment(0, cur.begin, cur.end)) go_left_[r] = v[r] <= cur.split.threshold;
      const std::size_t mid = index_.partition(cur.begin, cur.end, go_left_);

      TreeNode& parent = (*nodes_)[cur.node];
      parent.feature = cur.split.feature;
      parent.threshold = cur.split.threshold;
      parent.split_rank = rank++;
      const std::size_t left_id = nodes_->size();
      (*nodes_)[cur.node].left = static_cast<int>(left_id);
      (*nodes_)[cur.node].right = static_cast<int>(left_id + 1);
      open.push_back(make_node(cur.begin, mid));
      open.push_back(make_node(mid, cur.end));
      ++leaves;
    }
    nodes_ = nullptr;
    return tree;
  }

 private:
  Open make_node(std::size_t begin, std::size_t end) {
    std::vector<double> sums(k_, 0.0);
    for (std::uint32_t r : index_.segment(0, begin, end)) sums[static_cast<std::size_t>(y_[r])] += w_[r];
    const double total = std::accumulate(sums.begin(), sums.end(), 0.0);

    Open o{nodes_->size(), begin, end, {}};
    TreeNode node;
    node.proba.resize(k_);
    for (std::size_t c = 0; c < k_; ++c) node.proba[c] = total > 0.0 ? sums[c] / total : 0.0;
    nodes_->push_back(std::move(node));

    if (end - begin >= opt_.min_samples_split && impurity(opt_.criterion, sums, total) > 0.0) {
      o.split = find_split(begin, end, sums, total);
    }
    return o;
  }

  Split find_split(std::size_t begin, std::size_t end, const std::vector<double>& sums, double total) {
    Split best;
    const double parent = total * impurity(opt_.criterion, sums, total);
    const std::size_t d = cols_.d;
    const std::size_t batch = (opt_.features_per_split == 0 || opt_.features_per_split >= d) ? d : opt_.features_per_split;
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (batch < d) opt_.rng->shuffle(order);

    // Features are tried in random batches; a later batch is consulted only
    // when no earlier one produced a valid split.
    for (std::size_t start = 0; start < d && !best.ok; start += batch) {
      const std::size_t stop = std::min(d, start + batch);
      std::vector<std::size_t> feats(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(stop));
      std::sort(feats.begin(), feats.end());
      for (std::size_t f : feats) scan_feature(f, begin, end, sums, total, parent, best);
    }
    return best;
  }

  void scan_feature(std::size_t f, std::size_t begin, std::size_t end, const std::vector<double>& sums, double total,
                    double parent, Split& best) {
    const auto seg = index_.segment(f, begin, end);
    const double* v = cols_.col(f);
    if (v[seg.front()] == v[seg.back()]) return;
    std::fill(left_.begin(), left_.end(), 0.0);
    double wl = 0.0;
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
      const std::uint32_t r = seg[i];
      left_[static_cast<std::size_t>(y_[r])] += w_[r];
      wl += w_[r];
      const double a = v[r];
      const double b = v[seg[i + 1]];
      if (!(a < b)) continue;
      const double wr = total - wl;
      for (std::size_t c = 0; c < k_; ++c) right_[c] = std::max(0.0, sums[c] - left_[c]);
      const double gain = parent - wl * impurity(opt_.criterion, left_, wl) - wr * impurity(opt_.criterion, right_, wr);
      if (best.ok ? gain > best.gain + tol_ : gain > tol_) {
        best = {true, static_cast<int>(f), split_threshold(a, b), gain};
      }
    }
  }

  const Columns& cols_;
  std::span<const int> y_;
  std::span<const double> w_;
  std::size_t k_;
  GrowOptions opt_;
  SortedIndex index_;
  std::vector<double> left_, right_;
  std::vector<std::uint8_t> go_left_;
  std::vector<TreeNode>* nodes_ = nullptr;
  double root_weight_ = 0.0;
  double tol_ = 0.0;
};

}  // namespace

TreeModel grow_classifier(const Columns& cols, std::span<const int> y, std::span<const double> w,
                          std::size_t n_classes, const GrowOptions& options) {
  return ClassifierGrower(cols, y, w, n_classes, options).grow();
}

}  // namespace detail

std::size_t TreeModel::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t TreeModel::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return i;
}

TreeModel TreeModel::truncated(std::size_t max_leaves) const {
  if (max_leaves == 0) throw Error(Errc::invalid_config, "max_leaf_nodes must be positive");
  const std::size_t splits = max_leaves - 1;
  std::vector<int> remap(nodes.size(), -1);
  std::vector<char> keep(nodes.size(), 0);
  if (!nodes.empty()) keep[0] = 1;
  TreeModel out{n_features, n_classes, {}};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = static_cast<int>(out.nodes.size());
    TreeNode n = nodes[i];
    if (!n.is_leaf() && n.split_rank < splits) {
      keep[static_cast<std::size_t>(n.left)] = 1;
      keep[static_cast<std::size_t>(n.right)] = 1;
    } else {
      n.feature = -1;
      n.threshold = 0.0;
      n.left = n.right = -1;
      n.split_rank = kUnlimited;
    }
    out.nodes.push_back(std::move(n));
  }
  for (TreeNode& n : out.nodes) {
    if (n.is_leaf()) continue;
    n.left = remap[static_cast<std::size_t>(n.left)];
    n.right = remap[static_cast<std::size_t>(n.right)];
  }
  return out;
}

TreeModel fit_tree(const Matrix& x, std::span<const int> y, std::span<const double> sample_weights,
                   const TreeParams& params, std::size_t n_classes) {
  const std::size_t k = detail::check_inputs(x, y, sample_weights, n_classes);
  if (params.max_leaf_nodes == 0) throw Error(Errc::invalid_config, "max_leaf_nodes must be positive");
  const detail::Columns cols(x);
  detail::GrowOptions opt;
  opt.criterion = params.criterion;
  opt.max_leaves = params.max_leaf_nodes;
  opt.min_samples_split = std::max<std::size_t>(params.min_samples_split, 2);
  return detail::grow_classifier(cols, y, sample_weights, k, opt);
}

}  // namespace coapids::trees
