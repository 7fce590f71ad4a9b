#pragma once

// Invariants of a plan applied to the table it was fitted on. Returns an
// empty string when all hold, else a description of the first violation.

#include <algorithm>
#include <string>

#include "coapids/preprocess.hpp"

namespace oracle {

inline std::string check_fitted_matrix(const coapids::preprocess::EncodingPlan& plan,
                                       const coapids::preprocess::FeatureMatrix& m) {
  const auto& x = m.values;
  if (x.cols() != plan.retained_columns.size()) return "width differs from retained columns";
  for (double v : x.values()) {
    if (!(v >= 0.0 && v <= 1.0)) return "value outside [0,1]: " + std::to_string(v);
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    if (x.rows() > 0 && !(lo == 0.0 && hi == 1.0)) return "column " + plan.retained_columns[c] + " is constant or unscaled";
  }
  for (const auto& [column, values] : plan.category_maps) {
    std::vector<std::size_t> group;
    for (std::size_t c = 0; c < plan.retained_columns.size(); ++c) {
      if (plan.retained_columns[c].starts_with(column + "=")) group.push_back(c);
    }
    if (group.size() != values.size()) return "one-hot group " + column + " has the wrong width";
    for (std::size_t r = 0; r < x.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c : group) {
        if (x(r, c) != 0.0 && x(r, c) != 1.0) return "one-hot entry not binary in " + column;
        sum += x(r, c);
      }
      if (sum != 0.0 && sum != 1.0) return "one-hot row sum " + std::to_string(sum) + " in " + column;
    }
  }
  return {};
}

}  // namespace oracle
