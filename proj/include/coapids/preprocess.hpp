#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coapids/exec.hpp"
#include "coapids/ingest.hpp"
#include "coapids/matrix.hpp"

namespace coapids::preprocess {

/// The six categorical CoAP fields that are one-hot encoded by default.
const std::vector<std::string>& default_categorical_columns();

struct MinMax {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const MinMax&) const = default;
};

/// Fitted preprocessing state.
///
/// Every input column (all table columns except "type") ends up in exactly
/// one of: dropped_columns, categorical_columns, numeric_columns. MAC
/// columns are a subset of numeric_columns. Output features are listed in
/// retained_columns, in input-column order; a categorical column contributes
/// one "<column>=<value>" feature per observed value.
struct EncodingPlan {
  std::vector<std::string> input_columns;
  std::vector<std::string> mac_columns;
  std::vector<std::string> categorical_columns;
  std::vector<std::pair<std::string, std::vector<std::string>>> category_maps;
  std::vector<std::string> numeric_columns;
  std::vector<std::string> dropped_columns;
  std::vector<std::string> retained_columns;
  std::vector<MinMax> min_max;  // one per retained column
  std::vector<std::string> label_classes;

  std::size_t feature_count() const noexcept { return retained_columns.size(); }

  nlohmann::json to_json() const;
  static EncodingPlan from_json(const nlohmann::json& j);

  bool operator==(const EncodingPlan&) const = default;
};

void save_plan(const EncodingPlan& plan, const std::filesystem::path& path);
EncodingPlan load_plan(const std::filesystem::path& path);

struct FeatureMatrix {
  std::vector<std::string> column_names;
  Matrix values;
  std::vector<int> labels;  // class ids; -1 for an unknown label in lenient mode

  bool operator==(const FeatureMatrix&) const = default;
};

struct FitOptions {
  /// Columns to one-hot encode; those absent from the table are ignored.
  std::vector<std::string> categorical = default_categorical_columns();
};

/// Throws Error(empty_table), Error(missing_type_column) or
/// Error(non_numeric_residue).
EncodingPlan fit_plan(const ingest::DatasetTable& table, const FitOptions& options = {});

/// Encodes and MinMax-scales a table with a fitted plan. Values outside the
/// fitted range clamp to [0, 1]; nulls and unseen categories encode as 0.
/// In strict mode an unknown class label throws Error(unknown_class_label).
FeatureMatrix apply_plan(const ingest::DatasetTable& table, const EncodingPlan& plan, bool strict_labels = true,
                         Exec exec = Exec::parallel);

/// MAC "00:00:00:00:00:ff" -> 255. nullopt if the text is not a MAC address.
std::optional<std::uint64_t> mac_to_number(std::string_view text) noexcept;

/// Matrix CSV: one column per feature, then "type" holding class names.
ingest::DatasetTable matrix_to_table(const FeatureMatrix& m, const std::vector<std::string>& class_names);

/// Parses a matrix CSV. Labels map through class_names; an empty list means
/// classes are taken in first-appearance order and returned through it.
FeatureMatrix matrix_from_table(const ingest::DatasetTable& table, std::vector<std::string>& class_names);

}  // namespace coapids::preprocess
