#include <algorithm>
#include <cmath>
#include <string>

#include "coapids/error.hpp"
#include "tree_impl.hpp"

namespace coapids::trees {

std::string_view criterion_name(Criterion c) noexcept { return c == Criterion::gini ? "gini" : "entropy"; }

Criterion parse_criterion(std::string_view s) {
  if (s == "gini") return Criterion::gini;
  if (s == "entropy") return Criterion::entropy;
  throw Error(Errc::bad_config, "unknown criterion '" + std::string(s) + "'");
}

double impurity(Criterion c, std::span<const double> class_sums, double total) noexcept {
  if (!(total > 0.0)) return 0.0;
  double acc = 0.0;
  if (c == Criterion::gini) {
    for (double s : class_sums) {
      const double p = s / total;
      acc += p * p;
    }
    return std::max(0.0, 1.0 - acc);
  }
  for (double s : class_sums) {
    if (s <= 0.0) continue;
    const double p = s / total;
    acc -= p * std::log2(p);
  }
  return std::max(0.0, acc);
}

std::vector<double> ClassWeights::sample_weights(std::span<const int> labels) const {
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = (*this)[labels[i]];
  return w;
}

ClassWeights compute_class_weights(std::span<const int> labels) {
  std::vector<std::size_t> counts;
  for (int y : labels) {
    if (y < 0) throw Error(Errc::unknown_class_label, "negative class id");
    if (static_cast<std::size_t>(y) >= counts.size()) counts.resize(static_cast<std::size_t>(y) + 1, 0);
    ++counts[static_cast<std::size_t>(y)];
  }
  const auto present = static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
  if (present < 2) throw Error(Errc::single_class, "class weights need at least two classes");
  ClassWeights cw;
  cw.per_class.assign(counts.size(), 0.0);
  const double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) cw.per_class[c] = n / (static_cast<double>(present) * static_cast<double>(counts[c]));
  }
  return cw;
}

namespace detail {

Columns::Columns(const Matrix& x) : n(x.rows()), d(x.cols()), data(x.rows() * x.cols()) {
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    for (std::size_t f = 0; f < d; ++f) data[f * n + r] = row[f];
  }
}

SortedIndex::SortedIndex(const Columns& cols, std::span<const std::uint32_t> rows)
    : d_(cols.d), size_(rows.size()), order_(cols.d * rows.size()), scratch_(rows.size()) {
  for (std::size_t f = 0; f < d_; ++f) {
    auto* out = order_.data() + f * size_;
    std::copy(rows.begin(), rows.end(), out);
    const double* v = cols.col(f);
    std::sort(out, out + size_, [v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b] || (v[a] == v[b] && a < b); });
  }
}

std::size_t SortedIndex::partition(std::size_t begin, std::size_t end, const std::vector<std::uint8_t>& go_left) {
  std::size_t mid = begin;
  for (std::size_t f = 0; f < d_; ++f) {
    auto* seg = order_.data() + f * size_;
    std::size_t l = begin, r = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t row = seg[i];
      if (go_left[row]) {
        seg[l++] = row;
      } else {
        scratch_[r++] = row;
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), seg + l);
    mid = l;
  }
  return mid;
}

double split_threshold(double lo, double hi) noexcept {
  const double mid = 0.5 * (lo + hi);
  return mid < hi ? mid : lo;
}

std::vector<std::uint32_t> positive_rows(std::span<const double> w) {
  std::vector<std::uint32_t> rows;
  rows.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) rows.push_back(static_cast<std::uint32_t>(i));
  }
  return rows;
}

std::size_t check_inputs(const Matrix& x, std::span<const int> y, std::span<const double> w, std::size_t n_classes) {
  if (x.rows() == 0) throw Error(Errc::empty_data, "no training rows");
  if (y.size() != x.rows() || w.size() != x.rows()) {
    throw Error(Errc::length_mismatch, "labels/weights do not match the row count");
  }
  std::size_t k = n_classes;
  for (int label : y) {
    if (label < 0) throw Error(Errc::unknown_class_label, "negative class id");
    if (n_classes == 0) {
      k = std::max(k, static_cast<std::size_t>(label) + 1);
    } else if (static_cast<std::size_t>(label) >= n_classes) {
      throw Error(Errc::unknown_class_label, "class id " + std::to_string(label) + " out of range");
    }
  }
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(Errc::invalid_config, "sample weights must be finite and positive");
  }
  for (double v : x.values()) {
    if (std::isnan(v)) throw Error(Errc::invalid_config, "training features contain NaN");
  }
  return k;
}

}  // namespace detail
}  // namespace coapids::trees
