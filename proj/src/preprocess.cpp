#include "coapids/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "coapids/error.hpp"
#include "coapids/kernels.hpp"
#include "coapids/traffic_synth.hpp"

namespace coapids::preprocess {

namespace {

using ingest::Cell;
using ingest::DatasetTable;

[[noreturn]] void residue(const std::string& column, std::size_t row, const std::string& text) {
  throw Error(Errc::non_numeric_residue,
              "column '" + column + "' row " + std::to_string(row) + " holds non-numeric '" + text + "'");
}

bool looks_like_mac_column(const DatasetTable& t, std::size_t col) {
  bool any = false;
  for (const auto& row : t.rows) {
    if (!row[col]) continue;
    if (!mac_to_number(*row[col])) return false;
    any = true;
  }
  return any;
}

std::optional<double> numeric_value(const std::string& text, bool is_mac) {
  if (is_mac) {
    if (auto v = mac_to_number(text)) return static_cast<double>(*v);
    return std::nullopt;
  }
  return ingest::parse_number(text);
}

}  // namespace

const std::vector<std::string>& default_categorical_columns() {
  static const std::vector<std::string> cols{"coap.opt.ctype",    "coap.opt.desc",     "coap.opt.name",
                                             "coap.opt.uri_path", "coap.payload_desc", "coap.token"};
  return cols;
}

std::optional<std::uint64_t> mac_to_number(std::string_view text) noexcept {
  const auto mac = synth::parse_mac_address(text);
  if (!mac) return std::nullopt;
  std::uint64_t v = 0;
  for (std::uint8_t b : *mac) v = (v << 8) | b;
  return v;
}

EncodingPlan fit_plan(const DatasetTable& table, const FitOptions& options) {
  table.validate();
  const std::size_t type_col = table.require_column(ingest::kTypeColumn);
  if (table.rows.empty()) throw Error(Errc::empty_table, "cannot fit a plan on an empty table");

  EncodingPlan plan;
  std::unordered_set<std::string> seen_labels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const Cell& label = table.rows[r][type_col];
    if (!label) throw Error(Errc::unknown_class_label, "row " + std::to_string(r) + " has no label");
    if (seen_labels.insert(*label).second) plan.label_classes.push_back(*label);
  }

  const std::unordered_set<std::string> categorical(options.categorical.begin(), options.categorical.end());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c == type_col) continue;
    const std::string& name = table.columns[c];
    plan.input_columns.push_back(name);

    if (categorical.contains(name)) {
      std::vector<std::string> values;
      std::unordered_set<std::string> distinct;
      bool has_null = false;
      for (const auto& row : table.rows) {
        if (!row[c]) {
          has_null = true;
        } else if (distinct.insert(*row[c]).second) {
          values.push_back(*row[c]);
        }
      }
      if (values.size() + (has_null ? 1 : 0) <= 1) {
        plan.dropped_columns.push_back(name);
        continue;
      }
      plan.categorical_columns.push_back(name);
      for (const auto& v : values) {
        plan.retained_columns.push_back(name + "=" + v);
        plan.min_max.push_back({0.0, 1.0});
      }
      plan.category_maps.emplace_back(name, std::move(values));
      continue;
    }

    const bool is_mac = looks_like_mac_column(table, c);
    bool any = false;
    double lo = 0.0, hi = 0.0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const Cell& cell = table.rows[r][c];
      if (!cell) continue;
      const auto v = numeric_value(*cell, is_mac);
      if (!v) residue(name, r, *cell);
      if (!any) {
        lo = hi = *v;
        any = true;
      } else {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
    if (!any || lo == hi) {
      plan.dropped_columns.push_back(name);
      continue;
    }
    if (is_mac) plan.mac_columns.push_back(name);
    plan.numeric_columns.push_back(name);
    plan.retained_columns.push_back(name);
    plan.min_max.push_back({lo, hi});
  }
  return plan;
}

FeatureMatrix apply_plan(const DatasetTable& table, const EncodingPlan& plan, bool strict_labels, Exec exec) {
  table.validate();
  const std::size_t n = table.rows.size();
  const std::size_t d = plan.feature_count();

  // Per input column: where its values go in the output.
  struct NumericSlot {
    std::size_t table_col;
    std::size_t feature;
    bool is_mac;
    std::string name;
  };
  struct CategoricalSlot {
    std::size_t table_col;
    std::unordered_map<std::string, std::size_t> feature_of;
  };
  std::vector<NumericSlot> numeric;
  std::vector<CategoricalSlot> categorical;
  const std::unordered_set<std::string> macs(plan.mac_columns.begin(), plan.mac_columns.end());
  std::unordered_map<std::string, std::size_t> feature_index;
  for (std::size_t f = 0; f < d; ++f) feature_index.emplace(plan.retained_columns[f], f);

  for (const auto& name : plan.numeric_columns) {
    numeric.push_back({table.require_column(name), feature_index.at(name), macs.contains(name), name});
  }
  for (const auto& [name, values] : plan.category_maps) {
    CategoricalSlot slot{table.require_column(name), {}};
    for (const auto& v : values) slot.feature_of.emplace(v, feature_index.at(name + "=" + v));
    categorical.push_back(std::move(slot));
  }

  FeatureMatrix out;
  out.column_names = plan.retained_columns;
  out.values = Matrix(n, d);
  std::vector<double> mins(d), maxs(d);
  for (std::size_t f = 0; f < d; ++f) {
    mins[f] = plan.min_max[f].min;
    maxs[f] = plan.min_max[f].max;
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    auto x = out.values.row(r);
    for (const auto& s : numeric) {
      const Cell& cell = row[s.table_col];
      if (!cell) {
        x[s.feature] = mins[s.feature];
        continue;
      }
      const auto v = numeric_value(*cell, s.is_mac);
      if (!v) residue(s.name, r, *cell);
      x[s.feature] = *v;
    }
    for (const auto& s : categorical) {
      const Cell& cell = row[s.table_col];
      if (!cell) continue;
      if (auto it = s.feature_of.find(*cell); it != s.feature_of.end()) x[it->second] = 1.0;
    }
  }
  kernels::minmax_scale(exec, out.values, mins, maxs);

  out.labels.assign(n, -1);
  const auto type_col = table.column_index(ingest::kTypeColumn);
  if (!type_col) {
    if (strict_labels) table.require_column(ingest::kTypeColumn);
    return out;
  }
  std::unordered_map<std::string, int> class_id;
  for (std::size_t i = 0; i < plan.label_classes.size(); ++i) class_id.emplace(plan.label_classes[i], static_cast<int>(i));
  for (std::size_t r = 0; r < n; ++r) {
    const Cell& label = table.rows[r][*type_col];
    auto it = label ? class_id.find(*label) : class_id.end();
    if (it != class_id.end()) {
      out.labels[r] = it->second;
    } else if (strict_labels) {
      throw Error(Errc::unknown_class_label,
                  "row " + std::to_string(r) + " label '" + label.value_or("") + "' is not in the plan");
    }
  }
  return out;
}

nlohmann::json EncodingPlan::to_json() const {
  nlohmann::json j;
  j["format"] = "coapids-encoding-plan";
  j["version"] = 1;
  j["input_columns"] = input_columns;
  j["mac_columns"] = mac_columns;
  j["categorical_columns"] = categorical_columns;
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& [col, values] : category_maps) maps.push_back({{"column", col}, {"values", values}});
  j["category_maps"] = maps;
  j["numeric_columns"] = numeric_columns;
  j["dropped_columns"] = dropped_columns;
  j["retained_columns"] = retained_columns;
  nlohmann::json mm = nlohmann::json::array();
  for (const auto& m : min_max) mm.push_back({m.min, m.max});
  j["min_max"] = mm;
  j["label_classes"] = label_classes;
  return j;
}

EncodingPlan EncodingPlan::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "coapids-encoding-plan" || j.at("version") != 1) {
      throw Error(Errc::bad_model, "not a version 1 encoding plan");
    }
    EncodingPlan p;
    j.at("input_columns").get_to(p.input_columns);
    j.at("mac_columns").get_to(p.mac_columns);
    j.at("categorical_columns").get_to(p.categorical_columns);
    for (const auto& m : j.at("category_maps")) {
      p.category_maps.emplace_back(m.at("column").get<std::string>(), m.at("values").get<std::vector<std::string>>());
    }
    j.at("numeric_columns").get_to(p.numeric_columns);
    j.at("dropped_columns").get_to(p.dropped_columns);
    j.at("retained_columns").get_to(p.retained_columns);
    for (const auto& m : j.at("min_max")) p.min_max.push_back({m.at(0).get<double>(), m.at(1).get<double>()});
    j.at("label_classes").get_to(p.label_classes);
    if (p.min_max.size() != p.retained_columns.size()) throw Error(Errc::bad_model, "min_max/retained size mismatch");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_model, std::string("malformed plan: ") + e.what());
  }
}

void save_plan(const EncodingPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  out << plan.to_json().dump(2) << '\n';
}

EncodingPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_model, std::string("plan is not JSON: ") + e.what());
  }
  return EncodingPlan::from_json(j);
}

ingest::DatasetTable matrix_to_table(const FeatureMatrix& m, const std::vector<std::string>& class_names) {
  DatasetTable t;
  t.columns = m.column_names;
  t.columns.emplace_back(ingest::kTypeColumn);
  t.rows.reserve(m.values.rows());
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    std::vector<Cell> row;
    row.reserve(t.columns.size());
    for (double v : m.values.row(r)) row.emplace_back(ingest::format_number(v));
    const int label = r < m.labels.size() ? m.labels[r] : -1;
    if (label >= 0 && static_cast<std::size_t>(label) < class_names.size()) {
      row.emplace_back(class_names[static_cast<std::size_t>(label)]);
    } else {
      row.emplace_back();
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

FeatureMatrix matrix_from_table(const DatasetTable& table, std::vector<std::string>& class_names) {
  table.validate();
  const std::size_t type_col = table.require_column(ingest::kTypeColumn);
  FeatureMatrix m;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c != type_col) m.column_names.push_back(table.columns[c]);
  }
  const bool learn_classes = class_names.empty();
  std::unordered_map<std::string, int> class_id;
  for (std::size_t i = 0; i < class_names.size(); ++i) class_id.emplace(class_names[i], static_cast<int>(i));

  m.values = Matrix(table.rows.size(), m.column_names.size());
  m.labels.assign(table.rows.size(), -1);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::size_t f = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == type_col) continue;
      const auto v = row[c] ? ingest::parse_number(*row[c]) : std::nullopt;
      if (!v) residue(table.columns[c], r, row[c].value_or(""));
      m.values(r, f++) = *v;
    }
    if (!row[type_col]) continue;
    auto it = class_id.find(*row[type_col]);
    if (it == class_id.end()) {
      if (!learn_classes) {
        throw Error(Errc::unknown_class_label, "row " + std::to_string(r) + " label '" + *row[type_col] + "'");
      }
      it = class_id.emplace(*row[type_col], static_cast<int>(class_names.size())).first;
      class_names.push_back(*row[type_col]);
    }
    m.labels[r] = it->second;
  }
  return m;
}

}  // namespace coapids::preprocess
