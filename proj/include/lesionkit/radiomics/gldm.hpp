#pragma once

#include <cmath>
#include <cstdlib>

#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/slice.hpp"

namespace lesionkit::radiomics {

// D(i, k): pixels of gray level i whose dependence is k, where dependence is
// 1 + the number of in-ROI neighbours within Chebyshev distance `delta`
// whose level differs by at most `alpha`.
inline CountMatrix gldm_matrix(const SliceBins& s, int delta = 1, double alpha = 0.0) {
  if (delta < 1) throw InvalidArgument("gldm delta must be >= 1");
  if (!(alpha >= 0.0)) throw InvalidArgument("gldm alpha must be >= 0");
  const int side = 2 * delta + 1;
  CountMatrix d(s.num_levels, side * side);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      if (!s.in_roi(x, y)) continue;
      const auto level = s.at(x, y);
      int dependence = 1;
      for (int oy = -delta; oy <= delta; ++oy)
        for (int ox = -delta; ox <= delta; ++ox)
          if ((ox || oy) && s.in_roi(x + ox, y + oy) && std::abs(s.at(x + ox, y + oy) - level) <= alpha) ++dependence;
      d(level, dependence) += 1.0;
    }
  return d;
}

inline GldmValues gldm_from_matrix(const CountMatrix& m, double roi_pixels) {
  using namespace gldm;
  const RunStats s = run_stats(m, roi_pixels);
  GldmValues f{};
  f[SmallDependenceEmphasis] = s.small_emphasis;
  f[LargeDependenceEmphasis] = s.large_emphasis;
  f[GrayLevelNonUniformity] = s.gray_nonuniformity;
  f[DependenceNonUniformity] = s.size_nonuniformity;
  f[DependenceNonUniformityNormalized] = s.size_nonuniformity_normalized;
  f[GrayLevelVariance] = s.gray_variance;
  f[DependenceVariance] = s.size_variance;
  f[DependenceEntropy] = s.entropy;
  return f;
}

inline GldmValues gldm_features(const SliceBins& s, int delta = 1, double alpha = 0.0) {
  const auto np = static_cast<double>(s.roi_pixels());
  if (np == 0.0) throw EmptyRegion("gldm: slice ROI is empty");
  return gldm_from_matrix(gldm_matrix(s, delta, alpha), np);
}

}  // namespace lesionkit::radiomics
