#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lesionkit/volgrid.hpp"

namespace lesionkit {

inline constexpr double kDefaultBinWidth = 25.0;  // HU

struct RoiVoxel {
  std::size_t index;  // linear index into the grid
  std::int32_t bin;   // 1..num_levels
};

// Fixed-bin-width discretization of the ROI intensities, relative to the ROI
// minimum: bin(x) = floor((x - roi_min) / bin_width) + 1.
struct DiscretizedROI {
  Dims dims;
  std::vector<RoiVoxel> voxels;  // ascending linear index
  BinMap bins;                   // 0 outside the ROI
  double bin_width = kDefaultBinWidth;
  double roi_min = 0.0;
  std::int32_t num_levels = 0;
};

inline std::int32_t bin_of(double x, double roi_min, double bin_width) {
  return static_cast<std::int32_t>(std::floor((x - roi_min) / bin_width)) + 1;
}

inline DiscretizedROI discretize(const Volume3D& vol, const LabelMask& mask, double bin_width = kDefaultBinWidth) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw InvalidArgument("bin width must be finite and > 0");
  require_same_grid(vol, mask, "discretize");

  DiscretizedROI roi;
  roi.dims = vol.dims();
  roi.bin_width = bin_width;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) lo = std::min(lo, static_cast<double>(vol[i]));
  if (!std::isfinite(lo)) throw EmptyRegion("discretize: ROI is empty");
  roi.roi_min = lo;

  std::vector<std::int32_t> bins(vol.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const std::int32_t b = bin_of(vol[i], lo, bin_width);
    bins[i] = b;
    roi.voxels.push_back({i, b});
    roi.num_levels = std::max(roi.num_levels, b);
  }
  roi.bins = BinMap(vol.dims(), vol.geometry(), std::move(bins));
  return roi;
}

}  // namespace lesionkit
