#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "coapids/exec.hpp"
#include "coapids/matrix.hpp"

namespace coapids::trees {

enum class Criterion : std::uint8_t { gini, entropy };

std::string_view criterion_name(Criterion c) noexcept;
Criterion parse_criterion(std::string_view s);

/// Impurity of a node from its per-class weight sums; total is their sum.
double impurity(Criterion c, std::span<const double> class_sums, double total) noexcept;

/// Balanced weights w_c = n / (k * n_c) over the classes present.
struct ClassWeights {
  std::vector<double> per_class;  // indexed by class id; 0 for absent ids

  double operator[](int cls) const { return per_class.at(static_cast<std::size_t>(cls)); }
  std::vector<double> sample_weights(std::span<const int> labels) const;
};

/// Throws Error(single_class) when fewer than two classes occur.
ClassWeights compute_class_weights(std::span<const int> labels);

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct TreeParams {
  Criterion criterion = Criterion::gini;
  std::size_t max_leaf_nodes = kUnlimited;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;

  bool operator==(const TreeParams&) const = default;
};

struct ForestParams {
  std::size_t n_estimators = 100;
  Criterion criterion = Criterion::gini;
  bool bootstrap = true;
  std::size_t features_per_split = 0;  // 0 selects ceil(sqrt(d))
  std::uint64_t seed = 0;

  bool operator==(const ForestParams&) const = default;
};

struct BoostParams {
  std::size_t n_estimators = 100;
  std::size_t max_depth = 6;
  double learning_rate = 0.3;
  double l2_leaf_regularization = 1.0;
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const BoostParams&) const = default;
};

/// Classification tree node. Internal nodes keep their class distribution
/// too, so a tree can be cut back to fewer leaves. split_rank is the order
/// in which the node was expanded (kUnlimited for leaves).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> proba;
  std::size_t split_rank = kUnlimited;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t leaf_count() const noexcept;
  /// Index of the leaf reached by x.
  std::size_t leaf_for(std::span<const double> x) const;
  std::span<const double> proba(std::span<const double> x) const { return nodes[leaf_for(x)].proba; }

  /// The tree best-first growth would have produced with max_leaf_nodes =
  /// max_leaves: only the first max_leaves - 1 expansions are kept.
  TreeModel truncated(std::size_t max_leaves) const;

  bool operator==(const TreeModel&) const = default;
};

struct ForestTreeInfo {
  std::uint64_t seed = 0;
  std::vector<int> features_used;  // features appearing in at least one split, ascending

  bool operator==(const ForestTreeInfo&) const = default;
};

struct ForestModel {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::size_t features_per_split = 0;
  std::vector<TreeModel> trees;
  std::vector<ForestTreeInfo> info;

  /// The first n trees. Trees are seeded independently, so this equals a
  /// forest trained with n_estimators = n.
  ForestModel truncated(std::size_t n) const;

  bool operator==(const ForestModel&) const = default;
};

struct RegNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const RegNode&) const = default;
};

struct RegTree {
  std::vector<RegNode> nodes;

  double value(std::span<const double> x) const;
  bool operator==(const RegTree&) const = default;
};

struct BoostModel {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<double> base_score;           // log class prior
  std::vector<std::vector<RegTree>> rounds;  // rounds[r][c]
  std::vector<double> loss_history;          // training loss before round 0 and after each round

  /// The first n rounds; equals a model trained with n_estimators = n.
  BoostModel truncated(std::size_t n) const;

  bool operator==(const BoostModel&) const = default;
};

TreeModel fit_tree(const Matrix& x, std::span<const int> y, std::span<const double> sample_weights,
                   const TreeParams& params, std::size_t n_classes = 0);
ForestModel fit_forest(const Matrix& x, std::span<const int> y, std::span<const double> sample_weights,
                       const ForestParams& params, std::size_t n_classes = 0, Exec exec = Exec::parallel);
BoostModel fit_boost(const Matrix& x, std::span<const int> y, std::span<const double> sample_weights,
                     const BoostParams& params, std::size_t n_classes = 0, Exec exec = Exec::parallel);

using Params = std::variant<TreeParams, ForestParams, BoostParams>;
using Model = std::variant<TreeModel, ForestModel, BoostModel>;

/// Short learner names: "dt", "rf", "xgb".
std::string_view learner_name(const Params& p) noexcept;
std::string_view learner_name(const Model& m) noexcept;

Model fit(const Matrix& x, std::span<const int> y, std::span<const double> sample_weights, const Params& params,
          std::size_t n_classes = 0, Exec exec = Exec::parallel);

/// Per-row class scores: probabilities for trees and forests, softmax of the
/// summed margins for boosting. Throws Error(dimension_mismatch).
Matrix predict_proba(const Model& model, const Matrix& x, Exec exec = Exec::parallel);

/// Argmax of predict_proba; ties go to the lowest class id.
std::vector<int> predict(const Model& model, const Matrix& x, Exec exec = Exec::parallel);

std::size_t argmax(std::span<const double> v) noexcept;

nlohmann::json params_to_json(const Params& p);
Params params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace coapids::trees
