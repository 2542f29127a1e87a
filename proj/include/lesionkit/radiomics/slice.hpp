#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lesionkit/core/error.hpp"
#include "lesionkit/discretize.hpp"

namespace lesionkit::radiomics {

// Gray-level bins of one axial slice; 0 marks pixels outside the ROI.
struct SliceBins {
  int width = 0;
  int height = 0;
  std::int32_t num_levels = 0;  // gray levels 1..num_levels
  std::vector<std::int32_t> bins;

  SliceBins() = default;
  SliceBins(int w, int h, std::int32_t levels, std::vector<std::int32_t> b)
      : width(w), height(h), num_levels(levels), bins(std::move(b)) {
    if (bins.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
      throw DimensionMismatch("slice bin count does not match width*height");
    for (auto v : bins)
      if (v < 0 || v > num_levels) throw InvalidArgument("slice bin outside [0, num_levels]");
  }

  // Builds a slice from rows of bins (row-major, y outer); levels inferred.
  static SliceBins from_rows(const std::vector<std::vector<std::int32_t>>& rows) {
    const int h = static_cast<int>(rows.size());
    const int w = h ? static_cast<int>(rows[0].size()) : 0;
    std::vector<std::int32_t> b;
    std::int32_t levels = 0;
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != w) throw DimensionMismatch("ragged slice rows");
      for (auto v : r) {
        b.push_back(v);
        levels = std::max(levels, v);
      }
    }
    return SliceBins(w, h, levels, std::move(b));
  }

  bool in_roi(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height && at(x, y) > 0; }
  std::int32_t at(int x, int y) const {
    return bins[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  std::size_t roi_pixels() const {
    std::size_t n = 0;
    for (auto v : bins) n += v > 0;
    return n;
  }
};

inline SliceBins axial_slice(const DiscretizedROI& roi, std::int64_t z) {
  const Dims& d = roi.dims;
  std::vector<std::int32_t> b(static_cast<std::size_t>(d.nx * d.ny));
  for (std::int64_t y = 0; y < d.ny; ++y)
    for (std::int64_t x = 0; x < d.nx; ++x) b[static_cast<std::size_t>(x + d.nx * y)] = roi.bins(x, y, z);
  return SliceBins(static_cast<int>(d.nx), static_cast<int>(d.ny), roi.num_levels, std::move(b));
}

// Counts indexed by gray level (rows, 1-based) and a second quantity
// (columns, 1-based: run length, zone size, dependence, or a gray level).
struct CountMatrix {
  std::int32_t rows = 0;
  std::int32_t cols = 0;
  std::vector<double> data;

  CountMatrix() = default;
  CountMatrix(std::int32_t r, std::int32_t c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double& operator()(std::int32_t i, std::int32_t j) {
    return data[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j - 1)];
  }
  double operator()(std::int32_t i, std::int32_t j) const {
    return data[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j - 1)];
  }
  double total() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
  }
  bool operator==(const CountMatrix&) const = default;
};

// In-plane directions 0°, 45°, 90°, 135° as (dx, dy) unit steps.
inline constexpr std::array<std::array<int, 2>, 4> kDirections{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

// Statistics shared by the run-length, size-zone and dependence families,
// computed from a matrix M(i, j) where column j is the run length / zone size
// / dependence count and `np` is the number of ROI pixels.
struct RunStats {
  double small_emphasis = 0.0;   // Σ M / j² / N
  double large_emphasis = 0.0;   // Σ M j² / N
  double gray_nonuniformity = 0.0;
  double gray_nonuniformity_normalized = 0.0;
  double size_nonuniformity = 0.0;
  double size_nonuniformity_normalized = 0.0;
  double percentage = 0.0;  // N / np
  double gray_variance = 0.0;
  double size_variance = 0.0;
  double entropy = 0.0;
};

inline RunStats run_stats(const CountMatrix& m, double np) {
  RunStats s;
  const double n = m.total();
  if (!(n > 0.0)) throw EmptyRegion("texture matrix is empty");
  std::vector<double> by_gray(static_cast<std::size_t>(m.rows), 0.0), by_size(static_cast<std::size_t>(m.cols), 0.0);
  double mu_i = 0.0, mu_j = 0.0;
  for (std::int32_t i = 1; i <= m.rows; ++i)
    for (std::int32_t j = 1; j <= m.cols; ++j) {
      const double v = m(i, j);
      if (v == 0.0) continue;
      const double jj = static_cast<double>(j) * static_cast<double>(j);
      s.small_emphasis += v / jj;
      s.large_emphasis += v * jj;
      by_gray[static_cast<std::size_t>(i - 1)] += v;
      by_size[static_cast<std::size_t>(j - 1)] += v;
      const double p = v / n;
      mu_i += p * i;
      mu_j += p * j;
      s.entropy -= p * std::log2(p);
    }
  s.small_emphasis /= n;
  s.large_emphasis /= n;
  for (double g : by_gray) s.gray_nonuniformity += g * g;
  for (double z : by_size) s.size_nonuniformity += z * z;
  s.gray_nonuniformity_normalized = s.gray_nonuniformity / (n * n);
  s.size_nonuniformity_normalized = s.size_nonuniformity / (n * n);
  s.gray_nonuniformity /= n;
  s.size_nonuniformity /= n;
  s.percentage = n / np;
  for (std::int32_t i = 1; i <= m.rows; ++i)
    for (std::int32_t j = 1; j <= m.cols; ++j) {
      const double v = m(i, j);
      if (v == 0.0) continue;
      const double p = v / n;
      s.gray_variance += p * (i - mu_i) * (i - mu_i);
      s.size_variance += p * (j - mu_j) * (j - mu_j);
    }
  if (s.entropy == 0.0) s.entropy = 0.0;
  return s;
}

}  // namespace lesionkit::radiomics
