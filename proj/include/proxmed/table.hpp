#pragma once

#include <cassert>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace proxmed {

// Dense N-dimensional probability table, row-major. Dimensions of size 1 act
// as broadcast axes: indexing them with any value resolves to 0.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<int> shape, double fill = 0.0);

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int dim(int d) const { return shape_[static_cast<std::size_t>(d)]; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& flat() { return v_; }
  const std::vector<double>& flat() const { return v_; }

  std::size_t offset(std::span<const int> idx) const {
    assert(idx.size() == shape_.size());
    std::size_t off = 0;
    for (std::size_t d = 0; d < shape_.size(); ++d) {
      const int i = shape_[d] == 1 ? 0 : idx[d];
      assert(i >= 0 && i < shape_[d]);
      off += static_cast<std::size_t>(i) * stride_[d];
    }
    return off;
  }

  template <typename... I>
  double& at(I... idx) {
    const int ix[] = {static_cast<int>(idx)...};
    return v_[offset(std::span<const int>(ix, sizeof...(idx)))];
  }
  template <typename... I>
  double at(I... idx) const {
    const int ix[] = {static_cast<int>(idx)...};
    return v_[offset(std::span<const int>(ix, sizeof...(idx)))];
  }

  // Visits every index tuple in row-major order.
  void for_each_index(const std::function<void(std::span<const int>)>& fn) const;

  // Sum over the last axis for each leading index; used for row-normalization
  // checks. Returns {min_row_sum, max_row_sum}.
  std::pair<double, double> row_sum_range() const;

 private:
  std::vector<int> shape_;
  std::vector<std::size_t> stride_;
  std::vector<double> v_;
};

}  // namespace proxmed
