#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coapids/matrix.hpp"
#include "coapids/random.hpp"
#include "coapids/trees.hpp"

namespace coapids::trees::detail {

// Ties closer than this (times the root weight) count as equal gains.
inline constexpr double kTieTolerance = 1e-12;

// Column-major copy of the training matrix.
struct Columns {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> data;

  explicit Columns(const Matrix& x);
  const double* col(std::size_t f) const { return data.data() + f * n; }
};

// For every feature, the included rows sorted by (value, row). A node owns
// the same [begin, end) slice in every feature's order.
class SortedIndex {
 public:
  SortedIndex(const Columns& cols, std::span<const std::uint32_t> rows);

  std::size_t size() const noexcept { return size_; }
  std::span<const std::uint32_t> segment(std::size_t f, std::size_t begin, std::size_t end) const {
    return {order_.data() + f * size_ + begin, end - begin};
  }
  // Stable partition of [begin, end) in every feature so that rows with
  // go_left set come first. Returns the split point.
  std::size_t partition(std::size_t begin, std::size_t end, const std::vector<std::uint8_t>& go_left);

 private:
  std::size_t d_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> scratch_;
};

double split_threshold(double lo, double hi) noexcept;

struct GrowOptions {
  Criterion criterion = Criterion::gini;
  std::size_t max_leaves = kUnlimited;
  std::size_t min_samples_split = 2;
  std::size_t features_per_split = 0;  // 0 = all, in index order
  Rng* rng = nullptr;                  // required when features_per_split > 0
};

// Best-first classification tree over the rows with positive weight.
TreeModel grow_classifier(const Columns& cols, std::span<const int> y, std::span<const double> w,
                          std::size_t n_classes, const GrowOptions& options);

struct RegOptions {
  std::size_t max_depth = 6;
  double lambda = 1.0;
  double min_child_weight = 1.0;
  double learning_rate = 0.3;
};

// Depth-wise second-order regression tree. Adds the learned leaf value of
// every training row to margin_out[row].
RegTree grow_regressor(const Columns& cols, SortedIndex index, std::span<const double> g, std::span<const double> h,
                       const RegOptions& options, std::span<double> margin_out);

std::vector<std::uint32_t> positive_rows(std::span<const double> w);

// Validates shapes, labels and weights; returns the class count.
std::size_t check_inputs(const Matrix& x, std::span<const int> y, std::span<const double> w, std::size_t n_classes);

}  // namespace coapids::trees::detail
