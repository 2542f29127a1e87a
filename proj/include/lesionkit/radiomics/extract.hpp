#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lesionkit/core/format.hpp"
#include "lesionkit/core/parallel.hpp"
#include "lesionkit/discretize.hpp"
#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/first_order.hpp"
#include "lesionkit/radiomics/glcm.hpp"
#include "lesionkit/radiomics/gldm.hpp"
#include "lesionkit/radiomics/glrlm.hpp"
#include "lesionkit/radiomics/glszm.hpp"
#include "lesionkit/radiomics/ngtdm.hpp"
#include "lesionkit/radiomics/shape.hpp"
#include "lesionkit/resample.hpp"

namespace lesionkit::radiomics {

struct ExtractionConfig {
  double bin_width = kDefaultBinWidth;  // HU
  InplaneSpacing target_spacing{1.0, 1.0};
  int min_slice_pixels = 5;
  int glcm_distance = 1;
  int delta = 1;       // NGTDM / GLDM neighbourhood (Chebyshev)
  double alpha = 0.0;  // GLDM gray-level tolerance
  SurfaceMethod surface = SurfaceMethod::crofton;

  void validate() const {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw InvalidArgument("bin_width must be > 0");
    if (!(target_spacing.x > 0.0) || !(target_spacing.y > 0.0)) throw InvalidArgument("target spacing must be > 0");
    if (min_slice_pixels < 1) throw InvalidArgument("min_slice_pixels must be >= 1");
    if (glcm_distance < 1) throw InvalidArgument("glcm_distance must be >= 1");
    if (delta < 1) throw InvalidArgument("delta must be >= 1");
    if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
  }

  std::string canonical() const {
    return "bin_width=" + format_double(bin_width) + ";target_spacing_xy=" + format_double(target_spacing.x) + "," +
           format_double(target_spacing.y) + ";min_slice_pixels=" + std::to_string(min_slice_pixels) +
           ";glcm_distance=" + std::to_string(glcm_distance) + ";delta=" + std::to_string(delta) +
           ";alpha=" + format_double(alpha) + ";surface=" + (surface == SurfaceMethod::crofton ? "crofton" : "faces");
  }

  std::string hash() const { return hex64(fnv1a64(canonical())); }
};

struct FeatureVector {
  std::vector<double> values;  // catalog order; NaN marks a degenerate value
  std::string config_hash;
  int n_slices_used = 0;
  bool texture_degenerate = false;  // no slice reached min_slice_pixels

  double operator[](const std::string& name) const {
    const auto& cat = catalog();
    for (std::size_t i = 0; i < cat.size(); ++i)
      if (cat[i].name == name) return values[i];
    throw InvalidArgument("unknown feature '" + name + "'");
  }
};

namespace detail {

template <std::size_t N>
struct SliceAverage {
  std::vector<std::array<double, N>> samples;

  void add(const std::array<double, N>& v) { samples.push_back(v); }

  std::array<double, N> mean() const {
    std::array<double, N> out{};
    if (samples.empty()) {
      out.fill(std::numeric_limits<double>::quiet_NaN());
      return out;
    }
    std::vector<double> column(samples.size());
    for (std::size_t k = 0; k < N; ++k) {
      for (std::size_t s = 0; s < samples.size(); ++s) column[s] = samples[s][k];
      out[k] = pairwise_sum(column) / static_cast<double>(samples.size());
    }
    return out;
  }
};

template <std::size_t N>
void append(std::vector<double>& out, const std::array<double, N>& v) {
  out.insert(out.end(), v.begin(), v.end());
}

}  // namespace detail

// Full catalog for one lesion: in-plane resampling, one global fixed-width
// discretization over the 3D ROI, shape on the 3D mask, first-order over all
// ROI voxels, and the five texture families per axial slice averaged over the
// slices holding at least `min_slice_pixels` ROI pixels.
inline FeatureVector extract_all(const Volume3D& vol, const LabelMask& mask, const ExtractionConfig& cfg = {}) {
  cfg.validate();
  require_same_grid(vol, mask, "extract_all");
  const CroppedPair crop = crop_to_bbox(vol, mask, 8);
  const Volume3D image = resample_image_inplane(crop.volume, cfg.target_spacing);
  const LabelMask roi_mask = resample_mask_inplane(crop.mask, cfg.target_spacing);
  if (count_foreground(roi_mask) == 0) throw EmptyRegion("extract_all: ROI vanished after resampling");

  const DiscretizedROI roi = discretize(image, roi_mask, cfg.bin_width);
  std::vector<double> x;
  std::vector<std::int32_t> bins;
  x.reserve(roi.voxels.size());
  for (const auto& v : roi.voxels) {
    x.push_back(image[v.index]);
    bins.push_back(v.bin);
  }

  FeatureVector fv;
  fv.config_hash = cfg.hash();
  fv.values.reserve(catalog().size());
  detail::append(fv.values, first_order_from(std::move(x), bins));
  detail::append(fv.values, shape_features(roi_mask, cfg.surface));

  detail::SliceAverage<glcm::kCount> glcm_avg;
  detail::SliceAverage<glrlm::kCount> glrlm_avg;
  detail::SliceAverage<glszm::kCount> glszm_avg;
  detail::SliceAverage<ngtdm::kCount> ngtdm_avg;
  detail::SliceAverage<gldm::kCount> gldm_avg;
  for (std::int64_t z = 0; z < roi.dims.nz; ++z) {
    const SliceBins slice = axial_slice(roi, z);
    const auto np = slice.roi_pixels();
    if (np < static_cast<std::size_t>(cfg.min_slice_pixels)) continue;
    ++fv.n_slices_used;
    if (auto g = glcm_slice_features(slice, cfg.glcm_distance)) glcm_avg.add(*g);
    glrlm_avg.add(glrlm_features(slice));
    glszm_avg.add(glszm_features(slice));
    ngtdm_avg.add(ngtdm_features(slice, cfg.delta));
    gldm_avg.add(gldm_features(slice, cfg.delta, cfg.alpha));
  }
  fv.texture_degenerate = fv.n_slices_used == 0;
  detail::append(fv.values, glcm_avg.mean());
  detail::append(fv.values, glrlm_avg.mean());
  detail::append(fv.values, glszm_avg.mean());
  detail::append(fv.values, ngtdm_avg.mean());
  detail::append(fv.values, gldm_avg.mean());
  return fv;
}

}  // namespace lesionkit::radiomics
