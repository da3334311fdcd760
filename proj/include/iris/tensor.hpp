#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "iris/common.hpp"

namespace iris {

// Dense row-major matrix of doubles. Rows are the time (or batch) axis,
// columns the feature axis. All network activations use this type.
struct Matrix {
  i64 rows = 0;
  i64 cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(i64 r, i64 c) : rows(r), cols(c), v(static_cast<size_t>(r * c), 0.0) {
    require(r > 0 && c > 0, ErrorKind::Dimension, "matrix dimensions must be positive");
  }

  static Matrix from(std::initializer_list<std::initializer_list<double>> init) {
    const i64 r = static_cast<i64>(init.size());
    const i64 c = static_cast<i64>(init.begin()->size());
    Matrix m(r, c);
    i64 i = 0;
    for (const auto& row : init) {
      require(static_cast<i64>(row.size()) == c, ErrorKind::Dimension, "ragged initializer");
      for (double x : row) m.v[static_cast<size_t>(i++)] = x;
    }
    return m;
  }

  double& at(i64 r, i64 c) { return v[static_cast<size_t>(r * cols + c)]; }
  double at(i64 r, i64 c) const { return v[static_cast<size_t>(r * cols + c)]; }
  double* row(i64 r) { return v.data() + r * cols; }
  const double* row(i64 r) const { return v.data() + r * cols; }

  i64 size() const { return rows * cols; }

  Matrix top_rows(i64 n) const {
    require(n > 0 && n <= rows, ErrorKind::Dimension, "top_rows out of range");
    Matrix m(n, cols);
    std::copy(v.begin(), v.begin() + static_cast<size_t>(n * cols), m.v.begin());
    return m;
  }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && v == o.v;
  }
};

}  // namespace iris
