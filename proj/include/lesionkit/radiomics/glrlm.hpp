#pragma once

#include <algorithm>

#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/slice.hpp"

namespace lesionkit::radiomics {

// R(i, j): number of maximal runs of gray level i and length j along the
// direction. Runs stop at pixels outside the ROI.
inline CountMatrix glrlm_matrix(const SliceBins& s, std::size_t dir) {
  CountMatrix r(s.num_levels, std::max(1, std::max(s.width, s.height)));
  const int dx = kDirections[dir][0], dy = kDirections[dir][1];
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      if (!s.in_roi(x, y)) continue;
      const auto level = s.at(x, y);
      if (s.in_roi(x - dx, y - dy) && s.at(x - dx, y - dy) == level) continue;  // not a run start
      int length = 1;
      while (s.in_roi(x + length * dx, y + length * dy) && s.at(x + length * dx, y + length * dy) == level) ++length;
      r(level, length) += 1.0;
    }
  return r;
}

inline GlrlmValues glrlm_from_matrix(const CountMatrix& r, double roi_pixels) {
  using namespace glrlm;
  const RunStats s = run_stats(r, roi_pixels);
  GlrlmValues f{};
  f[ShortRunEmphasis] = s.small_emphasis;
  f[LongRunEmphasis] = s.large_emphasis;
  f[GrayLevelNonUniformity] = s.gray_nonuniformity;
  f[GrayLevelNonUniformityNormalized] = s.gray_nonuniformity_normalized;
  f[RunLengthNonUniformity] = s.size_nonuniformity;
  f[RunLengthNonUniformityNormalized] = s.size_nonuniformity_normalized;
  f[RunPercentage] = s.percentage;
  f[GrayLevelVariance] = s.gray_variance;
  f[RunVariance] = s.size_variance;
  f[RunEntropy] = s.entropy;
  return f;
}

// Run-length features averaged over the four in-plane directions.
inline GlrlmValues glrlm_features(const SliceBins& s) {
  const auto np = static_cast<double>(s.roi_pixels());
  if (np == 0.0) throw EmptyRegion("glrlm: slice ROI is empty");
  GlrlmValues acc{};
  for (std::size_t dir = 0; dir < kDirections.size(); ++dir) {
    const GlrlmValues f = glrlm_from_matrix(glrlm_matrix(s, dir), np);
    for (std::size_t k = 0; k < f.size(); ++k) acc[k] += f[k];
  }
  for (double& v : acc) v /= static_cast<double>(kDirections.size());
  return acc;
}

}  // namespace lesionkit::radiomics
