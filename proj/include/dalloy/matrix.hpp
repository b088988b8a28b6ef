#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dalloy/errors.hpp"

namespace dalloy {

// Dense row-major matrix, the only storage used by the solvers.  Sizes stay
// small (|box| <= 4096) so there is no blocking or sparsity.
template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) fail(ErrorKind::Validation, "matrix dimensions must be nonnegative");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  // max_i sum_j |a_ij|
  double inf_norm() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double row = 0.0;
      for (int j = 0; j < cols_; ++j) row += std::abs((*this)(i, j));
      best = std::max(best, row);
    }
    return best;
  }

  double frobenius_norm() const {
    double sum = 0.0;
    for (const T& v : data_) {
      const double a = std::abs(v);
      sum += a * a;
    }
    return std::sqrt(sum);
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

}  // namespace dalloy
