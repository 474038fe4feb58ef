#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "urlspam/error.hpp"

namespace urlspam {

/// Dense row-major feature matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    if (rows.empty()) return m;
    m = Matrix(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != m.cols_) {
        throw Error(ErrorCode::LengthMismatch, "ragged rows in matrix literal");
      }
      std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const noexcept { return data_; }

  /// Rows `indices` (duplicates allowed) in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = row(indices[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Class labels: 1 = spam (positive), 0 = not spam.
using Labels = std::vector<int>;

inline void require_binary(std::span<const int> labels) {
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw Error(ErrorCode::NonBinaryLabels, "label " + std::to_string(y) + " is not 0 or 1");
    }
  }
}

inline void require_fit_inputs(const Matrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(x.rows()) + " rows vs " +
                                               std::to_string(y.size()) + " labels");
  }
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
  require_binary(y);
}

template <class T>
std::vector<T> select(std::span<const T> values, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(values[i]);
  return out;
}

}  // namespace urlspam
