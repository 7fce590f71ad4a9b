#include <algorithm>
#include <cmath>

#include "coapids/error.hpp"
#include "tree_impl.hpp"

namespace coapids::trees {

namespace detail {

RegTree grow_regressor(const Columns& cols, SortedIndex index, std::span<const double> g, std::span<const double> h,
                       const RegOptions& opt, std::span<double> margin_out) {
  struct Item {
    std::size_t node, begin, end, depth;
  };
  RegTree tree;
  std::vector<Item> queue{{0, 0, index.size(), 0}};
  tree.nodes.emplace_back();
  std::vector<std::uint8_t> go_left(cols.n, 0);
  double tol = 0.0;

  for (std::size_t q = 0; q < queue.size(); ++q) {
    const Item it = queue[q];
    double G = 0.0, H = 0.0;
    for (std::uint32_t r : index.segment(0, it.begin, it.end)) {
      G += g[r];
      H += h[r];
    }
    if (q == 0) tol = kTieTolerance * std::max(1.0, H);

    bool found = false;
    int best_f = -1;
    double best_thr = 0.0, best_gain = 0.0;
    if (it.depth < opt.max_depth && it.end - it.begin >= 2) {
      const double parent = G * G / (H + opt.lambda);
      for (std::size_t f = 0; f < cols.d; ++f) {
        const auto seg = index.segment(f, it.begin, it.end);
        const double* v = cols.col(f);
        if (v[seg.front()] == v[seg.back()]) continue;
        double gl = 0.0, hl = 0.0;
        for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
          const std::uint32_t r = seg[i];
          gl += g[r];
          hl += h[r];
          const double a = v[r];
          const double b = v[seg[i + 1]];
          if (!(a < b)) continue;
          const double hr = H - hl;
          if (hl < opt.min_child_weight || hr < opt.min_child_weight) continue;
          const double gr = G - gl;
          const double gain = gl * gl / (hl + opt.lambda) + gr * gr / (hr + opt.lambda) - parent;
          if (found ? gain > best_gain + tol : gain > tol) {
            found = true;
            best_f = static_cast<int>(f);
            best_thr = split_threshold(a, b);
            best_gain = gain;
          }
        }
      }
    }

    if (!found) {
      const double denom = H + opt.lambda;
      const double value = denom > 0.0 ? -G / denom * opt.learning_rate : 0.0;
      tree.nodes[it.node].value = value;
      for (std::uint32_t r : index.segment(0, it.begin, it.end)) margin_out[r] += value;
      continue;
    }
    const double* v = cols.col(static_cast<std::size_t>(best_f));
    for (std::uint32_t r : index.segment(0, it.begin, it.end)) go_left[r] = v[r] <= best_thr;
    const std::size_t mid = index.partition(it.begin, it.end, go_left);
    const std::size_t left = tree.nodes.size();
    RegNode& node = tree.nodes[it.node];
    node.feature = best_f;
    node.threshold = best_thr;
    node.left = static_cast<int>(left);
    node.right = static_cast<int>(left + 1);
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    queue.push_back({left, it.begin, mid, it.depth + 1});
    queue.push_back({left + 1, mid, it.end, it.depth + 1});
  }
  return tree;
}

}  // namespace detail

namespace {

void softmax_row(std::span<const double> m, std::span<double> p) {
  const double top = *std::max_element(m.begin(), m.end());
  double z = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    p[c] = std::exp(m[c] - top);
    z += p[c];
  }
  for (double& v : p) v /= z;
}

double softmax_loss(const Matrix& margins, std::span<const int> y, std::span<const double> w, double total_w) {
  double loss = 0.0;
  for (std::size_t i = 0; i < margins.rows(); ++i) {
    const auto m = margins.row(i);
    const double top = *std::max_element(m.begin(), m.end());
    double z = 0.0;
    for (double v : m) z += std::exp(v - top);
    loss += w[i] * (top + std::log(z) - m[static_cast<std::size_t>(y[i])]);
  }
  return loss / total_w;
}

}  // namespace

double RegTree::value(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const RegNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

BoostModel BoostModel::truncated(std::size_t n) const {
  BoostModel out = *this;
  if (n < out.rounds.size()) {
    out.rounds.resize(n);
    out.loss_history.resize(n + 1);
  }
  return out;
}

BoostModel fit_boost(const Matrix& x, std::span<const int> y, std::span<const double> sample_weights,
                     const BoostParams& params, std::size_t n_classes, Exec exec) {
  const std::size_t k = detail::check_inputs(x, y, sample_weights, n_classes);
  if (params.max_depth == 0) throw Error(Errc::invalid_config, "max_depth must be positive");
  if (!(params.l2_leaf_regularization >= 0.0) || !(params.learning_rate > 0.0)) {
    throw Error(Errc::invalid_config, "boosting needs learning_rate > 0 and lambda >= 0");
  }
  const std::size_t n = x.rows();

  std::vector<double> class_w(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) class_w[static_cast<std::size_t>(y[i])] += sample_weights[i];
  if (std::count_if(class_w.begin(), class_w.end(), [](double v) { return v > 0.0; }) < 2) {
    throw Error(Errc::single_class, "boosting needs at least two classes");
  }
  double total_w = 0.0;
  for (double v : class_w) total_w += v;

  BoostModel model;
  model.n_features = x.cols();
  model.n_classes = k;
  model.base_score.resize(k);
  for (std::size_t c = 0; c < k; ++c) model.base_score[c] = std::log(std::max(class_w[c] / total_w, 1e-12));

  Matrix margins(n, k);
  for (std::size_t i = 0; i < n; ++i) std::copy(model.base_score.begin(), model.base_score.end(), margins.row(i).begin());
  model.loss_history.push_back(softmax_loss(margins, y, sample_weights, total_w));

  const detail::Columns cols(x);
  const detail::SortedIndex base_index(cols, detail::positive_rows(sample_weights));
  const detail::RegOptions opt{params.max_depth, params.l2_leaf_regularization, params.min_child_weight,
                               params.learning_rate};

  Matrix prob(n, k);
  std::vector<std::vector<double>> delta(k, std::vector<double>(n));
  for (std::size_t round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) softmax_row(margins.row(i), prob.row(i));
    std::vector<RegTree> trees(k);
    const auto kk = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
    for (std::ptrdiff_t ci = 0; ci < kk; ++ci) {
      const auto c = static_cast<std::size_t>(ci);
      std::vector<double> g(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = prob(i, c);
        const double target = static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0;
        g[i] = sample_weights[i] * (p - target);
        h[i] = sample_weights[i] * p * (1.0 - p);
      }
      std::fill(delta[c].begin(), delta[c].end(), 0.0);
      trees[c] = detail::grow_regressor(cols, base_index, g, h, opt, delta[c]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) margins(i, c) += delta[c][i];
    }
    model.rounds.push_back(std::move(trees));
    model.loss_history.push_back(softmax_loss(margins, y, sample_weights, total_w));
  }
  return model;
}

}  // namespace coapids::trees
