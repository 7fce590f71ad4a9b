#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coapids {

/// Settings shared by all subcommands. Read from a plain-text file with one
/// "dotted.key = value" per line; '#' starts a comment. Command-line flags
/// override file values.
///
///   seed                      master seed (default 0)
///   input, output, plan, model
///                             file paths, relative to the config file
///   scenario.preset           dos-scenario | mitm-scenario | crossproto-scenario | merged
///   scenario.duration_s       with normal_rate_hz and windows: a custom
///   scenario.normal_rate_hz   single-segment scenario instead of a preset
///   scenario.windows          kind:start:end:rate[;...]
///   ingest.epoch_base         added to relative times for frame.time_epoch
///   preprocess.categorical    comma list of one-hot columns
///   ae.hidden                 comma list of encoder widths (default 35,28)
///   ae.latent_dim, ae.epochs, ae.batch_size, ae.learning_rate
///   ae.output_activation      relu | linear
///   trees.search              grid-search before fitting (default true)
///   trees.class_weighting     balanced sample weights (default true)
///   trees.dt.criterion, trees.dt.max_leaf_nodes
///   trees.rf.criterion, trees.rf.n_estimators, trees.rf.features_per_split
///   trees.xgb.n_estimators, trees.xgb.max_depth, trees.xgb.learning_rate,
///   trees.xgb.lambda, trees.xgb.min_child_weight
///   eval.dims                 comma list of latent sizes
///   eval.classifiers          comma list of dt, rf, xgb
///   eval.k_folds, eval.test_fraction
///   eval.scenario             keep only normal plus this class
struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> input, output, plan, model;

  std::string scenario_preset = "merged";
  std::optional<double> scenario_duration_s;
  std::optional<double> scenario_normal_rate_hz;
  std::optional<std::string> scenario_windows;

  double epoch_base = 1.7e9;
  std::optional<std::vector<std::string>> categorical;

  std::vector<std::size_t> ae_hidden{35, 28};
  std::size_t ae_latent_dim = 2;
  std::size_t ae_epochs = 50;
  std::size_t ae_batch_size = 50;
  double ae_learning_rate = 1e-3;
  std::string ae_output_activation = "relu";

  bool trees_search = true;
  bool class_weighting = true;
  std::string dt_criterion = "gini";
  std::size_t dt_max_leaf_nodes = 32;
  std::string rf_criterion = "gini";
  std::size_t rf_n_estimators = 100;
  std::size_t rf_features_per_split = 0;
  std::size_t xgb_n_estimators = 100;
  std::size_t xgb_max_depth = 6;
  double xgb_learning_rate = 0.3;
  double xgb_lambda = 1.0;
  double xgb_min_child_weight = 1.0;

  std::vector<std::size_t> dims{1, 2, 3, 4, 8};
  std::vector<std::string> classifiers{"dt", "rf", "xgb"};
  std::size_t k_folds = 5;
  double test_fraction = 0.2;
  std::optional<std::string> eval_scenario;
};

/// Applies "key = value" lines to config. Relative paths resolve against
/// base_dir. Throws UsageError for unknown keys, duplicates or bad values.
void apply_config_text(RunConfig& config, std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<std::size_t> parse_size_list(std::string_view text);
std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace coapids
