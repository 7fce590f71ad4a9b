#include <cmath>

#include "coapids/error.hpp"
#include "json_file.hpp"
#include "tree_impl.hpp"

namespace coapids::trees {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "coapids-classifier";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_width(std::size_t expected, const Matrix& x) {
  if (x.cols() != expected) {
    throw Error(Errc::dimension_mismatch,
                "input has " + std::to_string(x.cols()) + " features, model expects " + std::to_string(expected));
  }
}

json tree_json(const TreeModel& t) {
  json nodes = json::array();
  for (const TreeNode& n : t.nodes) {
    json j{{"proba", n.proba}};
    if (!n.is_leaf()) {
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["left"] = n.left;
      j["right"] = n.right;
      j["rank"] = n.split_rank;
    }
    nodes.push_back(std::move(j));
  }
  return {{"n_features", t.n_features}, {"n_classes", t.n_classes}, {"nodes", nodes}};
}

TreeModel tree_from(const json& j) {
  TreeModel t;
  j.at("n_features").get_to(t.n_features);
  j.at("n_classes").get_to(t.n_classes);
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    jn.at("proba").get_to(n.proba);
    if (jn.contains("feature")) {
      jn.at("feature").get_to(n.feature);
      jn.at("threshold").get_to(n.threshold);
      jn.at("left").get_to(n.left);
      jn.at("right").get_to(n.right);
      jn.at("rank").get_to(n.split_rank);
    }
    t.nodes.push_back(std::move(n));
  }
  const auto count = static_cast<int>(t.nodes.size());
  for (int i = 0; i < count; ++i) {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
    if (n.proba.size() != t.n_classes) throw Error(Errc::bad_model, "node probability vector has the wrong length");
    if (n.is_leaf()) continue;
    if (n.left <= i || n.right <= i || n.left >= count || n.right >= count ||
        static_cast<std::size_t>(n.feature) >= t.n_features) {
      throw Error(Errc::bad_model, "node " + std::to_string(i) + " has invalid children or feature");
    }
  }
  if (t.nodes.empty()) throw Error(Errc::bad_model, "tree has no nodes");
  return t;
}

json regtree_json(const RegTree& t) {
  json nodes = json::array();
  for (const RegNode& n : t.nodes) {
    if (n.is_leaf()) {
      nodes.push_back({{"value", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return nodes;
}

RegTree regtree_from(const json& j, std::size_t n_features) {
  RegTree t;
  for (const auto& jn : j) {
    RegNode n;
    if (jn.contains("feature")) {
      jn.at("feature").get_to(n.feature);
      jn.at("threshold").get_to(n.threshold);
      jn.at("left").get_to(n.left);
      jn.at("right").get_to(n.right);
    } else {
      jn.at("value").get_to(n.value);
      if (!std::isfinite(n.value)) throw Error(Errc::bad_model, "non-finite leaf value");
    }
    t.nodes.push_back(n);
  }
  const auto count = static_cast<int>(t.nodes.size());
  if (count == 0) throw Error(Errc::bad_model, "regression tree has no nodes");
  for (int i = 0; i < count; ++i) {
    const RegNode& n = t.nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) continue;
    if (n.left <= i || n.right <= i || n.left >= count || n.right >= count ||
        static_cast<std::size_t>(n.feature) >= n_features) {
      throw Error(Errc::bad_model, "regression node " + std::to_string(i) + " is invalid");
    }
  }
  return t;
}

json max_leaves_json(std::size_t v) { return v == kUnlimited ? json(nullptr) : json(v); }

std::size_t max_leaves_from(const json& j) { return j.is_null() ? kUnlimited : j.get<std::size_t>(); }

}  // namespace

std::string_view learner_name(const Params& p) noexcept {
  static constexpr std::string_view names[] = {"dt", "rf", "xgb"};
  return names[p.index()];
}

std::string_view learner_name(const Model& m) noexcept {
  static constexpr std::string_view names[] = {"dt", "rf", "xgb"};
  return names[m.index()];
}

std::size_t argmax(std::span<const double> v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Model fit(const Matrix& x, std::span<const int> y, std::span<const double> w, const Params& params,
          std::size_t n_classes, Exec exec) {
  return std::visit(Overloaded{
                        [&](const TreeParams& p) -> Model { return fit_tree(x, y, w, p, n_classes); },
                        [&](const ForestParams& p) -> Model { return fit_forest(x, y, w, p, n_classes, exec); },
                        [&](const BoostParams& p) -> Model { return fit_boost(x, y, w, p, n_classes, exec); },
                    },
                    params);
}

Matrix predict_proba(const Model& model, const Matrix& x, Exec exec) {
  const auto rows = static_cast<std::ptrdiff_t>(x.rows());
  return std::visit(
      Overloaded{
          [&](const TreeModel& t) {
            check_width(t.n_features, x);
            Matrix out(x.rows(), t.n_classes);
#pragma omp parallel for if (exec == Exec::parallel)
            for (std::ptrdiff_t i = 0; i < rows; ++i) {
              const auto p = t.proba(x.row(static_cast<std::size_t>(i)));
              std::copy(p.begin(), p.end(), out.row(static_cast<std::size_t>(i)).begin());
            }
            return out;
          },
          [&](const ForestModel& f) {
            check_width(f.n_features, x);
            Matrix out(x.rows(), f.n_classes);
            if (f.trees.empty()) return out;
            const double scale = 1.0 / static_cast<double>(f.trees.size());
#pragma omp parallel for if (exec == Exec::parallel)
            for (std::ptrdiff_t i = 0; i < rows; ++i) {
              const auto xi = x.row(static_cast<std::size_t>(i));
              auto oi = out.row(static_cast<std::size_t>(i));
              for (const TreeModel& t : f.trees) {
                const auto p = t.proba(xi);
                for (std::size_t c = 0; c < oi.size(); ++c) oi[c] += p[c];
              }
              for (double& v : oi) v *= scale;
            }
            return out;
          },
          [&](const BoostModel& b) {
            check_width(b.n_features, x);
            Matrix out(x.rows(), b.n_classes);
#pragma omp parallel for if (exec == Exec::parallel)
            for (std::ptrdiff_t i = 0; i < rows; ++i) {
              const auto xi = x.row(static_cast<std::size_t>(i));
              std::vector<double> m = b.base_score;
              for (const auto& round : b.rounds) {
                for (std::size_t c = 0; c < m.size(); ++c) m[c] += round[c].value(xi);
              }
              const double top = *std::max_element(m.begin(), m.end());
              double z = 0.0;
              for (double& v : m) z += (v = std::exp(v - top));
              auto oi = out.row(static_cast<std::size_t>(i));
              for (std::size_t c = 0; c < m.size(); ++c) oi[c] = m[c] / z;
            }
            return out;
          },
      },
      model);
}

std::vector<int> predict(const Model& model, const Matrix& x, Exec exec) {
  const Matrix p = predict_proba(model, x, exec);
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(argmax(p.row(i)));
  return out;
}

json params_to_json(const Params& params) {
  return std::visit(Overloaded{
                        [](const TreeParams& p) -> json {
                          return {{"learner", "dt"},
                                  {"criterion", criterion_name(p.criterion)},
                                  {"max_leaf_nodes", max_leaves_json(p.max_leaf_nodes)},
                                  {"min_samples_split", p.min_samples_split},
                                  {"seed", p.seed}};
                        },
                        [](const ForestParams& p) -> json {
                          return {{"learner", "rf"},
                                  {"n_estimators", p.n_estimators},
                                  {"criterion", criterion_name(p.criterion)},
                                  {"bootstrap", p.bootstrap},
                                  {"features_per_split", p.features_per_split},
                                  {"seed", p.seed}};
                        },
                        [](const BoostParams& p) -> json {
                          return {{"learner", "xgb"},
                                  {"n_estimators", p.n_estimators},
                                  {"max_depth", p.max_depth},
                                  {"learning_rate", p.learning_rate},
                                  {"l2_leaf_regularization", p.l2_leaf_regularization},
                                  {"min_child_weight", p.min_child_weight},
                                  {"seed", p.seed}};
                        },
                    },
                    params);
}

Params params_from_json(const json& j) {
  try {
    const std::string learner = j.at("learner").get<std::string>();
    if (learner == "dt") {
      TreeParams p;
      p.criterion = parse_criterion(j.at("criterion").get<std::string>());
      p.max_leaf_nodes = max_leaves_from(j.at("max_leaf_nodes"));
      j.at("min_samples_split").get_to(p.min_samples_split);
      j.at("seed").get_to(p.seed);
      return p;
    }
    if (learner == "rf") {
      ForestParams p;
      j.at("n_estimators").get_to(p.n_estimators);
      p.criterion = parse_criterion(j.at("criterion").get<std::string>());
      j.at("bootstrap").get_to(p.bootstrap);
      j.at("features_per_split").get_to(p.features_per_split);
      j.at("seed").get_to(p.seed);
      return p;
    }
    if (learner == "xgb") {
      BoostParams p;
      j.at("n_estimators").get_to(p.n_estimators);
      j.at("max_depth").get_to(p.max_depth);
      j.at("learning_rate").get_to(p.learning_rate);
      j.at("l2_leaf_regularization").get_to(p.l2_leaf_regularization);
      j.at("min_child_weight").get_to(p.min_child_weight);
      j.at("seed").get_to(p.seed);
      return p;
    }
    throw Error(Errc::bad_model, "unknown learner '" + learner + "'");
  } catch (const json::exception& e) {
    throw Error(Errc::bad_model, std::string("malformed parameters: ") + e.what());
  }
}

json to_json(const Model& model) {
  json j{{"format", kFormat}, {"version", 1}, {"learner", learner_name(model)}};
  std::visit(Overloaded{
                 [&](const TreeModel& t) { j["tree"] = tree_json(t); },
                 [&](const ForestModel& f) {
                   j["n_features"] = f.n_features;
                   j["n_classes"] = f.n_classes;
                   j["features_per_split"] = f.features_per_split;
                   json trees = json::array();
                   for (std::size_t i = 0; i < f.trees.size(); ++i) {
                     json t = tree_json(f.trees[i]);
                     t["seed"] = f.info[i].seed;
                     t["features_used"] = f.info[i].features_used;
                     trees.push_back(std::move(t));
                   }
                   j["trees"] = std::move(trees);
                 },
                 [&](const BoostModel& b) {
                   j["n_features"] = b.n_features;
                   j["n_classes"] = b.n_classes;
                   j["base_score"] = b.base_score;
                   j["loss_history"] = b.loss_history;
                   json rounds = json::array();
                   for (const auto& round : b.rounds) {
                     json per_class = json::array();
                     for (const RegTree& t : round) per_class.push_back(regtree_json(t));
                     rounds.push_back(std::move(per_class));
                   }
                   j["rounds"] = std::move(rounds);
                 },
             },
             model);
  return j;
}

Model model_from_json(const json& j) {
  try {
    if (j.at("format") != kFormat || j.at("version") != 1) throw Error(Errc::bad_model, "not a version 1 classifier");
    const std::string learner = j.at("learner").get<std::string>();
    if (learner == "dt") return tree_from(j.at("tree"));
    if (learner == "rf") {
      ForestModel f;
      j.at("n_features").get_to(f.n_features);
      j.at("n_classes").get_to(f.n_classes);
      j.at("features_per_split").get_to(f.features_per_split);
      for (const auto& jt : j.at("trees")) {
        f.trees.push_back(tree_from(jt));
        if (f.trees.back().n_features != f.n_features || f.trees.back().n_classes != f.n_classes) {
          throw Error(Errc::bad_model, "forest member has a different shape");
        }
        f.info.push_back({jt.at("seed").get<std::uint64_t>(), jt.at("features_used").get<std::vector<int>>()});
      }
      return f;
    }
    if (learner == "xgb") {
      BoostModel b;
      j.at("n_features").get_to(b.n_features);
      j.at("n_classes").get_to(b.n_classes);
      j.at("base_score").get_to(b.base_score);
      j.at("loss_history").get_to(b.loss_history);
      if (b.base_score.size() != b.n_classes) throw Error(Errc::bad_model, "base_score has the wrong length");
      for (const auto& jr : j.at("rounds")) {
        std::vector<RegTree> round;
        for (const auto& jt : jr) round.push_back(regtree_from(jt, b.n_features));
        if (round.size() != b.n_classes) throw Error(Errc::bad_model, "boosting round has the wrong tree count");
        b.rounds.push_back(std::move(round));
      }
      return b;
    }
    throw Error(Errc::bad_model, "unknown learner '" + learner + "'");
  } catch (const json::exception& e) {
    throw Error(Errc::bad_model, std::string("malformed classifier: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  coapids::detail::write_json_file(to_json(model), path);
}

Model load_model(const std::filesystem::path& path) { return model_from_json(coapids::detail::read_json_file(path)); }

}  // namespace coapids::trees
