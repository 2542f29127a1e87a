#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lesionkit/volgrid.hpp"

namespace lesionkit {

struct InplaneSpacing {
  double x = 1.0;
  double y = 1.0;
};

namespace detail {

// Mirror (whole-sample symmetric) extension of index i into [0, n).
inline std::int64_t mirror_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// In-place conversion of samples to cubic B-spline coefficients with mirror
// boundaries (recursive causal/anti-causal filtering, pole sqrt(3)-2).
inline void bspline3_prefilter(std::vector<double>& c) {
  const std::size_t n = c.size();
  if (n < 2) return;
  const double z = std::sqrt(3.0) - 2.0;
  const double lambda = (1.0 - z) * (1.0 - 1.0 / z);
  for (double& v : c) v *= lambda;

  // Causal initialisation over the full mirrored period.
  {
    double zn = z;
    const double iz = 1.0 / z;
    double z2n = std::pow(z, static_cast<double>(n - 1));
    double sum = c[0] + z2n * c[n - 1];
    z2n *= z2n * iz;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      sum += (zn + z2n) * c[k];
      zn *= z;
      z2n *= iz;
    }
    c[0] = sum / (1.0 - zn * zn);
  }
  for (std::size_t k = 1; k < n; ++k) c[k] += z * c[k - 1];
  c[n - 1] = (z / (z * z - 1.0)) * (z * c[n - 2] + c[n - 1]);
  for (std::size_t k = n - 1; k-- > 0;) c[k] = z * (c[k + 1] - c[k]);
}

inline void bspline3_weights(double t, double w[4]) {
  // t in [0,1): offset of the sample from the left-centre knot.
  const double s = 1.0 - t;
  w[0] = s * s * s / 6.0;
  w[1] = (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0;
  w[2] = (4.0 - 6.0 * s * s + 3.0 * s * s * s) / 6.0;
  w[3] = t * t * t / 6.0;
}

inline double bspline3_eval(const std::vector<double>& coeffs, double u) {
  const auto n = static_cast<std::int64_t>(coeffs.size());
  const double fl = std::floor(u);
  const auto i = static_cast<std::int64_t>(fl);
  double w[4];
  bspline3_weights(u - fl, w);
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += w[k] * coeffs[static_cast<std::size_t>(mirror_index(i - 1 + k, n))];
  return v;
}

// Output grid along one axis: size m and the input continuous index sampled by
// output index 0, with step `ratio` (centre of the axis is preserved).
struct AxisMap {
  std::int64_t m = 0;
  double start = 0.0;
  double ratio = 1.0;
  bool identity = false;

  double source(std::int64_t j) const { return start + static_cast<double>(j) * ratio; }
};

inline AxisMap axis_map(std::int64_t n, double old_spacing, double new_spacing) {
  AxisMap map;
  if (old_spacing == new_spacing) {
    map.m = n;
    map.identity = true;
    return map;
  }
  map.ratio = new_spacing / old_spacing;
  map.m = std::max<std::int64_t>(1, std::llround(static_cast<double>(n) * old_spacing / new_spacing));
  map.start = (static_cast<double>(n) - 1.0) / 2.0 - (static_cast<double>(map.m) - 1.0) / 2.0 * map.ratio;
  return map;
}

inline VoxelGeometry resampled_geometry(const VoxelGeometry& geom, const AxisMap& mx, const AxisMap& my,
                                        const InplaneSpacing& target) {
  VoxelGeometry out = geom;
  out.origin = geom.physical(mx.identity ? 0.0 : mx.start, my.identity ? 0.0 : my.start, 0.0);
  if (!mx.identity) out.spacing[0] = target.x;
  if (!my.identity) out.spacing[1] = target.y;
  return out;
}

inline void check_target(const InplaneSpacing& target) {
  if (!(target.x > 0.0) || !(target.y > 0.0) || !std::isfinite(target.x) || !std::isfinite(target.y))
    throw InvalidArgument("target in-plane spacing must be finite and > 0");
}

}  // namespace detail

// Resamples every axial slice to the target in-plane spacing with cubic
// B-spline interpolation (mirror boundaries). The z axis is untouched.
inline Volume3D resample_image_inplane(const Volume3D& vol, InplaneSpacing target) {
  detail::check_target(target);
  if (vol.empty()) throw InvalidArgument("cannot resample an empty volume");
  const Dims d = vol.dims();
  const auto mx = detail::axis_map(d.nx, vol.geometry().spacing[0], target.x);
  const auto my = detail::axis_map(d.ny, vol.geometry().spacing[1], target.y);
  if (mx.identity && my.identity) return vol;

  const Dims out{mx.m, my.m, d.nz};
  std::vector<float> values(out.size());
  std::vector<double> stage(static_cast<std::size_t>(mx.m * d.ny));
  std::vector<double> line;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    // Along x.
    for (std::int64_t y = 0; y < d.ny; ++y) {
      line.resize(static_cast<std::size_t>(d.nx));
      for (std::int64_t x = 0; x < d.nx; ++x) line[static_cast<std::size_t>(x)] = vol(x, y, z);
      if (mx.identity) {
        for (std::int64_t x = 0; x < d.nx; ++x)
          stage[static_cast<std::size_t>(x + mx.m * y)] = line[static_cast<std::size_t>(x)];
        continue;
      }
      detail::bspline3_prefilter(line);
      for (std::int64_t j = 0; j < mx.m; ++j)
        stage[static_cast<std::size_t>(j + mx.m * y)] = detail::bspline3_eval(line, mx.source(j));
    }
    // Along y.
    for (std::int64_t x = 0; x < mx.m; ++x) {
      line.resize(static_cast<std::size_t>(d.ny));
      for (std::int64_t y = 0; y < d.ny; ++y) line[static_cast<std::size_t>(y)] = stage[static_cast<std::size_t>(x + mx.m * y)];
      if (my.identity) {
        for (std::int64_t y = 0; y < d.ny; ++y)
          values[out.index(x, y, z)] = static_cast<float>(line[static_cast<std::size_t>(y)]);
        continue;
      }
      detail::bspline3_prefilter(line);
      for (std::int64_t j = 0; j < my.m; ++j)
        values[out.index(x, j, z)] = static_cast<float>(detail::bspline3_eval(line, my.source(j)));
    }
  }
  return Volume3D(out, detail::resampled_geometry(vol.geometry(), mx, my, target), std::move(values));
}

// Nearest-neighbour companion of resample_image_inplane; same output grid.
inline LabelMask resample_mask_inplane(const LabelMask& mask, InplaneSpacing target) {
  detail::check_target(target);
  if (mask.empty()) throw InvalidArgument("cannot resample an empty mask");
  const Dims d = mask.dims();
  const auto mx = detail::axis_map(d.nx, mask.geometry().spacing[0], target.x);
  const auto my = detail::axis_map(d.ny, mask.geometry().spacing[1], target.y);
  if (mx.identity && my.identity) return mask;

  auto nearest = [](const detail::AxisMap& m, std::int64_t j, std::int64_t n) {
    if (m.identity) return j;
    const auto i = static_cast<std::int64_t>(std::floor(m.source(j) + 0.5));
    return std::clamp<std::int64_t>(i, 0, n - 1);
  };
  const Dims out{mx.m, my.m, d.nz};
  std::vector<std::uint8_t> values(out.size());
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < out.ny; ++y) {
      const std::int64_t sy = nearest(my, y, d.ny);
      for (std::int64_t x = 0; x < out.nx; ++x) values[out.index(x, y, z)] = mask(nearest(mx, x, d.nx), sy, z);
    }
  return LabelMask(out, detail::resampled_geometry(mask.geometry(), mx, my, target), std::move(values));
}

}  // namespace lesionkit
