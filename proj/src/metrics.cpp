#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "coapids/error.hpp"
#include "coapids/eval.hpp"
#include "coapids/random.hpp"
#include "coapids/run_config.hpp"

namespace coapids::eval {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::vector<std::size_t>> rows_by_class(std::span<const int> labels) {
  std::vector<std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw Error(Errc::unknown_class_label, "row " + std::to_string(i) + " has no class");
    const auto c = static_cast<std::size_t>(labels[i]);
    if (c >= by_class.size()) by_class.resize(c + 1);
    by_class[c].push_back(i);
  }
  return by_class;
}

}  // namespace

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t t = 0;
  for (std::size_t v : counts) t += v;
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k) {
  if (y_true.size() != y_pred.size()) {
    throw Error(Errc::length_mismatch, std::to_string(y_true.size()) + " labels vs " + std::to_string(y_pred.size()) +
                                           " predictions");
  }
  ConfusionMatrix cm{k, std::vector<std::size_t>(k * k, 0)};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k) {
      throw Error(Errc::unknown_class_label, "class id out of range at row " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t) * k + static_cast<std::size_t>(p)];
  }
  return cm;
}

MetricsReport compute_metrics(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k) {
  MetricsReport r;
  r.confusion = confusion_matrix(y_true, y_pred, k);
  const ConfusionMatrix& cm = r.confusion;
  const std::size_t n = cm.total();
  r.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    ClassMetrics& m = r.per_class[c];
    const std::size_t tp = cm.at(c, c);
    m.support = row;
    m.precision = ratio(tp, col);
    m.recall = ratio(tp, row);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    const double share = ratio(row, n);
    r.precision += share * m.precision;
    r.recall += share * m.recall;
    r.f1 += share * m.f1;
  }
  return r;
}

std::vector<int> stratified_folds(std::span<const int> labels, std::size_t k_folds, std::uint64_t seed) {
  if (k_folds < 2) throw Error(Errc::invalid_config, "k_folds must be at least 2");
  auto by_class = rows_by_class(labels);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && by_class[c].size() < k_folds) {
      throw Error(Errc::too_few_samples_per_class, "class " + std::to_string(c) + " has " +
                                                       std::to_string(by_class[c].size()) + " rows for " +
                                                       std::to_string(k_folds) + " folds");
    }
  }
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t next = 0;
  for (auto& rows : by_class) {
    rng.shuffle(rows);
    for (std::size_t r : rows) {
      fold[r] = static_cast<int>(next);
      next = (next + 1) % k_folds;
    }
  }
  return fold;
}

TrainTestSplit stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error(Errc::invalid_config, "test fraction must be in (0, 1)");
  auto by_class = rows_by_class(labels);
  Rng rng(seed);
  TrainTestSplit split;
  for (auto& rows : by_class) {
    if (rows.empty()) continue;
    rng.shuffle(rows);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    if (rows.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Learner parse_learner(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "dt") return Learner::dt;
  if (lower == "rf") return Learner::rf;
  if (lower == "xgb") return Learner::xgb;
  throw Error(Errc::bad_config, "unknown classifier '" + std::string(s) + "' (expected dt, rf or xgb)");
}

std::string_view learner_key(Learner l) noexcept {
  static constexpr std::string_view names[] = {"dt", "rf", "xgb"};
  return names[static_cast<std::size_t>(l)];
}

std::string_view learner_display(Learner l) noexcept {
  static constexpr std::string_view names[] = {"DT", "RF", "XGB"};
  return names[static_cast<std::size_t>(l)];
}

std::vector<Learner> parse_learner_list(std::string_view csv) {
  std::vector<Learner> out;
  for (const auto& item : split_list(csv)) out.push_back(parse_learner(item));
  return out;
}

}  // namespace coapids::eval
