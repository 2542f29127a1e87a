#pragma once

#include <algorithm>
#include <vector>

#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/slice.hpp"

namespace lesionkit::radiomics {

// S(i, j): number of 8-connected zones of gray level i with j pixels.
inline CountMatrix glszm_matrix(const SliceBins& s) {
  CountMatrix m(s.num_levels, std::max<std::int32_t>(1, static_cast<std::int32_t>(s.roi_pixels())));
  std::vector<std::uint8_t> seen(s.bins.size(), 0);
  std::vector<std::pair<int, int>> stack;
  auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(s.width) + static_cast<std::size_t>(x); };
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      if (!s.in_roi(x, y) || seen[idx(x, y)]) continue;
      const auto level = s.at(x, y);
      std::int32_t size = 0;
      stack.assign(1, {x, y});
      seen[idx(x, y)] = 1;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++size;
        for (int oy = -1; oy <= 1; ++oy)
          for (int ox = -1; ox <= 1; ++ox) {
            const int nx = cx + ox, ny = cy + oy;
            if ((ox || oy) && s.in_roi(nx, ny) && !seen[idx(nx, ny)] && s.at(nx, ny) == level) {
              seen[idx(nx, ny)] = 1;
              stack.emplace_back(nx, ny);
            }
          }
      }
      m(level, size) += 1.0;
    }
  return m;
}

inline GlszmValues glszm_from_matrix(const CountMatrix& m, double roi_pixels) {
  using namespace glszm;
  const RunStats s = run_stats(m, roi_pixels);
  GlszmValues f{};
  f[SmallAreaEmphasis] = s.small_emphasis;
  f[LargeAreaEmphasis] = s.large_emphasis;
  f[GrayLevelNonUniformity] = s.gray_nonuniformity;
  f[GrayLevelNonUniformityNormalized] = s.gray_nonuniformity_normalized;
  f[SizeZoneNonUniformity] = s.size_nonuniformity;
  f[SizeZoneNonUniformityNormalized] = s.size_nonuniformity_normalized;
  f[ZonePercentage] = s.percentage;
  f[GrayLevelVariance] = s.gray_variance;
  f[ZoneVariance] = s.size_variance;
  f[ZoneEntropy] = s.entropy;
  return f;
}

inline GlszmValues glszm_features(const SliceBins& s) {
  const auto np = static_cast<double>(s.roi_pixels());
  if (np == 0.0) throw EmptyRegion("glszm: slice ROI is empty");
  return glszm_from_matrix(glszm_matrix(s), np);
}

}  // namespace lesionkit::radiomics
