#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lesionkit/core/error.hpp"

namespace lesionkit::learn {

inline constexpr double kFiveYearsMonths = 60.0;

// Row-major n x p feature matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rs) {
    Matrix m(rs.size(), rs.empty() ? 0 : rs[0].size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (rs[i].size() != m.cols) throw DimensionMismatch("ragged feature rows");
      for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rs[i][j];
    }
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  Matrix take_rows(const std::vector<std::size_t>& idx) const {
    Matrix m(idx.size(), cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < cols; ++j) m(r, j) = (*this)(idx[r], j);
    return m;
  }
};

// Label 1 for survival of at least `threshold_months` (the boundary counts as
// a long survivor), 0 otherwise.
inline std::vector<int> dichotomize_survival(const std::vector<double>& months,
                                             double threshold_months = kFiveYearsMonths) {
  std::vector<int> y;
  y.reserve(months.size());
  for (double m : months) {
    if (!std::isfinite(m) || m < 0.0) throw InvalidArgument("survival months must be finite and >= 0");
    y.push_back(m >= threshold_months ? 1 : 0);
  }
  return y;
}

}  // namespace lesionkit::learn
