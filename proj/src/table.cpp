#include "proxmed/table.hpp"

#include <limits>
#include <stdexcept>

namespace proxmed {

Table::Table(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  std::size_t n = 1;
  stride_.resize(shape_.size());
  for (int d = static_cast<int>(shape_.size()) - 1; d >= 0; --d) {
    if (shape_[static_cast<std::size_t>(d)] <= 0) {
      throw std::invalid_argument("Table: non-positive dimension");
    }
    stride_[static_cast<std::size_t>(d)] = n;
    n *= static_cast<std::size_t>(shape_[static_cast<std::size_t>(d)]);
  }
  v_.assign(n, fill);
}

void Table::for_each_index(const std::function<void(std::span<const int>)>& fn) const {
  if (v_.empty()) return;
  std::vector<int> idx(shape_.size(), 0);
  while (true) {
    fn(std::span<const int>(idx.data(), idx.size()));
    int d = static_cast<int>(shape_.size()) - 1;
    for (; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < shape_[static_cast<std::size_t>(d)]) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d < 0) return;
  }
}

std::pair<double, double> Table::row_sum_range() const {
  if (v_.empty() || shape_.empty()) return {0.0, 0.0};
  const std::size_t last = static_cast<std::size_t>(shape_.back());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < v_.size(); r += last) {
    double s = 0.0;
    for (std::size_t k = 0; k < last; ++k) s += v_[r + k];
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

}  // namespace proxmed
