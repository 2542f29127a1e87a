#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/slice.hpp"

namespace lesionkit::radiomics {

// Symmetric co-occurrence counts for in-ROI pixel pairs separated by
// `distance` steps along direction `dir` (index into kDirections).
inline CountMatrix glcm_matrix(const SliceBins& s, std::size_t dir, int distance = 1) {
  CountMatrix p(s.num_levels, s.num_levels);
  const int dx = kDirections[dir][0] * distance, dy = kDirections[dir][1] * distance;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      if (!s.in_roi(x, y) || !s.in_roi(x + dx, y + dy)) continue;
      const auto a = s.at(x, y), b = s.at(x + dx, y + dy);
      p(a, b) += 1.0;
      p(b, a) += 1.0;
    }
  return p;
}

// Features of one co-occurrence matrix (counts are normalized here).
inline GlcmValues glcm_from_matrix(const CountMatrix& counts) {
  using namespace glcm;
  const double total = counts.total();
  if (!(total > 0.0)) throw EmptyRegion("glcm: no valid pixel pairs");
  const std::int32_t ng = counts.rows;
  GlcmValues f{};
  std::vector<double> px(static_cast<std::size_t>(ng), 0.0), py(static_cast<std::size_t>(ng), 0.0);
  std::vector<double> psum(static_cast<std::size_t>(2 * ng + 1), 0.0), pdiff(static_cast<std::size_t>(ng), 0.0);
  double sum_ij = 0.0;
  for (std::int32_t i = 1; i <= ng; ++i)
    for (std::int32_t j = 1; j <= ng; ++j) {
      const double p = counts(i, j) / total;
      if (p == 0.0) continue;
      px[static_cast<std::size_t>(i - 1)] += p;
      py[static_cast<std::size_t>(j - 1)] += p;
      psum[static_cast<std::size_t>(i + j)] += p;
      pdiff[static_cast<std::size_t>(std::abs(i - j))] += p;
      const double d = static_cast<double>(i - j);
      f[JointEnergy] += p * p;
      f[JointEntropy] -= p * std::log2(p);
      f[Contrast] += d * d * p;
      f[Idm] += p / (1.0 + d * d);
      f[Id] += p / (1.0 + std::abs(d));
      sum_ij += static_cast<double>(i) * j * p;
    }
  double mux = 0.0, muy = 0.0;
  for (std::int32_t i = 1; i <= ng; ++i) {
    mux += i * px[static_cast<std::size_t>(i - 1)];
    muy += i * py[static_cast<std::size_t>(i - 1)];
  }
  double varx = 0.0, vary = 0.0;
  for (std::int32_t i = 1; i <= ng; ++i) {
    varx += (i - mux) * (i - mux) * px[static_cast<std::size_t>(i - 1)];
    vary += (i - muy) * (i - muy) * py[static_cast<std::size_t>(i - 1)];
  }
  const double sigma = std::sqrt(varx) * std::sqrt(vary);
  f[Correlation] = sigma < 1e-12 ? 1.0 : (sum_ij - mux * muy) / sigma;
  f[Autocorrelation] = sum_ij;
  for (std::size_t k = 2; k < psum.size(); ++k) f[SumAverage] += static_cast<double>(k) * psum[k];
  double diff_avg = 0.0;
  for (std::size_t k = 0; k < pdiff.size(); ++k) {
    diff_avg += static_cast<double>(k) * pdiff[k];
    if (pdiff[k] > 0.0) f[DifferenceEntropy] -= pdiff[k] * std::log2(pdiff[k]);
  }
  for (std::size_t k = 0; k < pdiff.size(); ++k)
    f[DifferenceVariance] += (static_cast<double>(k) - diff_avg) * (static_cast<double>(k) - diff_avg) * pdiff[k];
  if (f[JointEntropy] == 0.0) f[JointEntropy] = 0.0;
  if (f[DifferenceEntropy] == 0.0) f[DifferenceEntropy] = 0.0;
  return f;
}

// Direction-averaged GLCM features of one slice; directions without any valid
// pair are left out. Empty when no direction has a pair.
inline std::optional<GlcmValues> glcm_slice_features(const SliceBins& s, int distance = 1) {
  GlcmValues acc{};
  int used = 0;
  for (std::size_t dir = 0; dir < kDirections.size(); ++dir) {
    const CountMatrix m = glcm_matrix(s, dir, distance);
    if (m.total() == 0.0) continue;
    const GlcmValues f = glcm_from_matrix(m);
    for (std::size_t k = 0; k < f.size(); ++k) acc[k] += f[k];
    ++used;
  }
  if (used == 0) return std::nullopt;
  for (double& v : acc) v /= used;
  return acc;
}

inline GlcmValues glcm_features(const SliceBins& s, int distance = 1) {
  if (distance < 1) throw InvalidArgument("glcm distance must be >= 1");
  auto f = glcm_slice_features(s, distance);
  if (!f) throw EmptyRegion("glcm: slice has no valid pixel pair in any direction");
  return *f;
}

}  // namespace lesionkit::radiomics
