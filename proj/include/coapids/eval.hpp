#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coapids/autoenc.hpp"
#include "coapids/exec.hpp"
#include "coapids/ingest.hpp"
#include "coapids/matrix.hpp"
#include "coapids/preprocess.hpp"
#include "coapids/trees.hpp"

namespace coapids::eval {

/// k x k counts; rows are true classes, columns predictions.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::size_t> counts;

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * k + pred]; }
  std::size_t total() const noexcept;
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double precision = 0.0;  // support-weighted means
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionMatrix confusion;
};

/// 0/0 ratios are taken as 0. Throws Error(length_mismatch) and
/// Error(unknown_class_label) for ids outside [0, k).
MetricsReport compute_metrics(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k);

/// Fold id in [0, k_folds) for every row. Each class is shuffled and dealt
/// round-robin, continuing where the previous class stopped. Throws
/// Error(too_few_samples_per_class).
std::vector<int> stratified_folds(std::span<const int> labels, std::size_t k_folds, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<std::size_t> train, test;  // row indices, ascending
};

/// Per class, round(test_fraction * n_c) rows go to test (at least one when
/// the class has two or more rows).
TrainTestSplit stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);

enum class Learner : std::uint8_t { dt, rf, xgb };

/// "dt" | "rf" | "xgb" (case-insensitive). Throws Error(bad_config).
Learner parse_learner(std::string_view s);
std::string_view learner_key(Learner l) noexcept;     // "dt"
std::string_view learner_display(Learner l) noexcept;  // "DT"
std::vector<Learner> parse_learner_list(std::string_view csv);

/// Default search spaces in declared order.
std::vector<trees::Params> default_grid(Learner l);

struct GridPoint {
  trees::Params params;
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
};

struct GridResult {
  std::vector<GridPoint> points;
  std::size_t best = 0;

  const trees::Params& best_params() const { return points.at(best).params; }
};

struct GridOptions {
  std::size_t k_folds = 5;
  bool class_weighting = true;
  Exec exec = Exec::parallel;
};

/// Stratified k-fold search maximizing mean weighted F1; ties keep the
/// earliest point. The learner seed for fold f is seed ^ f. Points that
/// differ only in max_leaf_nodes (trees) or n_estimators (ensembles) share
/// one fit per fold, cut back to each point's size.
GridResult grid_search(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                       std::span<const trees::Params> grid, std::uint64_t seed, const GridOptions& options = {});

/// Overwrites the seed field of any params alternative.
trees::Params with_seed(trees::Params p, std::uint64_t seed);

struct Experiment {
  preprocess::EncodingPlan plan;
  preprocess::FeatureMatrix train;
  preprocess::FeatureMatrix test;
  std::vector<std::string> classes;
};

struct ExperimentOptions {
  double test_fraction = 0.2;
  preprocess::FitOptions fit;
  /// When set, keep only "normal" rows and rows of this class.
  std::optional<std::string> scenario;
  Exec exec = Exec::parallel;
};

/// Stratified split of a labeled frame table, plan fitted on the training
/// part only, both parts encoded with it.
Experiment prepare_experiment(const ingest::DatasetTable& table, std::uint64_t seed,
                              const ExperimentOptions& options = {});

struct SweepRow {
  std::size_t dim = 0;
  Learner classifier = Learner::dt;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool highlighted = false;
  bool operator==(const SweepRow&) const = default;
};

/// Rows ordered by dim (as requested), then classifier (as requested).
struct SweepReport {
  std::vector<SweepRow> rows;
  bool operator==(const SweepReport&) const = default;
};

inline constexpr double kHighlightThreshold = 0.99;

struct SweepOptions {
  autoenc::AEConfig ae;  // input_dim, latent_dim and seed are filled per dim
  GridOptions grid;
  std::map<Learner, std::vector<trees::Params>> grids;  // overrides default_grid
  std::function<void(const std::string&)> log;
};

/// For every dim: train an autoencoder on train features, encode both sets,
/// grid-search each classifier on the encoded training set, refit the best
/// point on all of it and score the encoded test set.
SweepReport sweep(const preprocess::FeatureMatrix& train, const preprocess::FeatureMatrix& test,
                  std::size_t n_classes, std::span<const std::size_t> dims, std::span<const Learner> classifiers,
                  std::uint64_t seed, const SweepOptions& options = {});

/// "dim,classifier,precision,recall,f1,highlighted" with six decimals.
std::string report_csv(const SweepReport& report);
SweepReport parse_report_csv(std::string_view text);

/// One line per dim with P/R/F columns per classifier; highlighted cells
/// are starred.
std::string report_table(const SweepReport& report);

/// Per-dim means over classifiers: "dim,precision,recall,f1".
std::string report_means_csv(const SweepReport& report);

}  // namespace coapids::eval
