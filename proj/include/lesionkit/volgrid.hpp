#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lesionkit/core/error.hpp"

namespace lesionkit {

using Vec3 = std::array<double, 3>;
// Column-major: axes[a] is the unit direction of voxel axis a in physical space.
using Axes3 = std::array<Vec3, 3>;

inline constexpr Axes3 kIdentityAxes{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct VoxelGeometry {
  Vec3 spacing{1.0, 1.0, 1.0};  // mm
  Vec3 origin{0.0, 0.0, 0.0};   // mm, centre of voxel (0,0,0)
  Axes3 axes = kIdentityAxes;

  double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

  // Physical position of the centre of a voxel given continuous indices.
  Vec3 physical(double i, double j, double k) const {
    const double idx[3] = {i * spacing[0], j * spacing[1], k * spacing[2]};
    Vec3 p = origin;
    for (int a = 0; a < 3; ++a)
      for (int r = 0; r < 3; ++r) p[r] += axes[a][r] * idx[a];
    return p;
  }

  void validate() const {
    for (double s : spacing)
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("voxel spacing must be finite and > 0");
    for (double o : origin)
      if (!std::isfinite(o)) throw InvalidArgument("voxel origin must be finite");
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double expected = a == b ? 1.0 : 0.0;
        if (std::abs(dot(axes[a], axes[b]) - expected) > 1e-6)
          throw InvalidArgument("direction axes are not orthonormal");
      }
  }

  bool approx_equal(const VoxelGeometry& other, double tol = 1e-6) const {
    for (int a = 0; a < 3; ++a) {
      if (std::abs(spacing[a] - other.spacing[a]) > tol) return false;
      if (std::abs(origin[a] - other.origin[a]) > tol) return false;
      for (int r = 0; r < 3; ++r)
        if (std::abs(axes[a][r] - other.axes[a][r]) > tol) return false;
    }
    return true;
  }
};

struct Dims {
  std::int64_t nx = 0, ny = 0, nz = 0;

  std::size_t size() const { return static_cast<std::size_t>(nx * ny * nz); }
  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>(x + nx * (y + ny * z));
  }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  std::array<std::int64_t, 3> coords(std::size_t linear) const {
    const auto l = static_cast<std::int64_t>(linear);
    return {l % nx, (l / nx) % ny, l / (nx * ny)};
  }
  bool operator==(const Dims&) const = default;
};

// Value-kind tags. Each carries the per-voxel validity rule of its grid type.
struct IntensityKind {
  static constexpr const char* name = "intensity";
  static bool valid(float v) { return std::isfinite(v); }
};
struct BinaryKind {
  static constexpr const char* name = "binary";
  static bool valid(std::uint8_t v) { return v <= 1; }
};
struct ProbabilityKind {
  static constexpr const char* name = "probability";
  static bool valid(float v) { return v >= 0.0f && v <= 1.0f; }
};
struct BinKind {
  static constexpr const char* name = "bin";
  static bool valid(std::int32_t v) { return v >= 0; }
};

// Dense voxel grid with physical geometry. Linear index = x + nx*(y + ny*z).
template <typename T, typename Kind>
class Grid {
 public:
  using value_type = T;
  using kind = Kind;

  Grid() = default;

  Grid(Dims dims, VoxelGeometry geometry, T fill = T{})
      : Grid(dims, geometry, std::vector<T>(checked_size(dims), fill)) {}

  Grid(Dims dims, VoxelGeometry geometry, std::vector<T> values)
      : dims_(dims), geometry_(geometry), values_(std::move(values)) {
    if (values_.size() != checked_size(dims_))
      throw DimensionMismatch("value count does not match grid dimensions");
    geometry_.validate();
    for (const T& v : values_)
      if (!Kind::valid(v)) throw InvalidArgument(std::string("invalid ") + Kind::name + " voxel value");
  }

  const Dims& dims() const { return dims_; }
  const VoxelGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const T> values() const { return values_; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  const T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) const { return values_[dims_.index(x, y, z)]; }

  void set(std::size_t i, T v) {
    if (!Kind::valid(v)) throw InvalidArgument(std::string("invalid ") + Kind::name + " voxel value");
    values_[i] = v;
  }
  void set(std::int64_t x, std::int64_t y, std::int64_t z, T v) { set(dims_.index(x, y, z), v); }

  bool same_grid(const auto& other) const {
    return dims_ == other.dims() && geometry_.approx_equal(other.geometry());
  }

  bool operator==(const Grid& other) const {
    return dims_ == other.dims_ && geometry_.approx_equal(other.geometry_, 0.0) && values_ == other.values_;
  }

 private:
  static std::size_t checked_size(const Dims& d) {
    if (d.nx < 0 || d.ny < 0 || d.nz < 0) throw InvalidArgument("negative grid dimension");
    return d.size();
  }

  Dims dims_{};
  VoxelGeometry geometry_{};
  std::vector<T> values_;
};

using Volume3D = Grid<float, IntensityKind>;
using LabelMask = Grid<std::uint8_t, BinaryKind>;
using ProbabilityMap = Grid<float, ProbabilityKind>;
using BinMap = Grid<std::int32_t, BinKind>;

template <typename A, typename B>
void require_same_grid(const A& a, const B& b, const char* what) {
  if (!a.same_grid(b)) throw DimensionMismatch(std::string(what) + ": grids differ in dimensions or geometry");
}

inline std::size_t count_foreground(const LabelMask& mask) {
  return static_cast<std::size_t>(std::count(mask.values().begin(), mask.values().end(), std::uint8_t{1}));
}

// Physical volume of the foreground in mm^3.
inline double foreground_volume(const LabelMask& mask) {
  return static_cast<double>(count_foreground(mask)) * mask.geometry().voxel_volume();
}

// Tight bounding box of the foreground: {lo, hi} inclusive per axis.
struct BoundingBox {
  std::array<std::int64_t, 3> lo{}, hi{};
};

inline BoundingBox foreground_bbox(const LabelMask& mask) {
  const Dims& d = mask.dims();
  BoundingBox box{{d.nx, d.ny, d.nz}, {-1, -1, -1}};
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!mask(x, y, z)) continue;
        const std::int64_t c[3] = {x, y, z};
        for (int a = 0; a < 3; ++a) {
          box.lo[a] = std::min(box.lo[a], c[a]);
          box.hi[a] = std::max(box.hi[a], c[a]);
        }
      }
  if (box.hi[0] < 0) throw EmptyRegion("mask has no foreground voxels");
  return box;
}

namespace detail {

template <typename G>
G crop_grid(const G& grid, const BoundingBox& box) {
  const Dims& d = grid.dims();
  Dims out{box.hi[0] - box.lo[0] + 1, box.hi[1] - box.lo[1] + 1, box.hi[2] - box.lo[2] + 1};
  std::vector<typename G::value_type> values;
  values.reserve(out.size());
  for (std::int64_t z = box.lo[2]; z <= box.hi[2]; ++z)
    for (std::int64_t y = box.lo[1]; y <= box.hi[1]; ++y)
      for (std::int64_t x = box.lo[0]; x <= box.hi[0]; ++x) values.push_back(grid[d.index(x, y, z)]);
  VoxelGeometry geom = grid.geometry();
  geom.origin = grid.geometry().physical(static_cast<double>(box.lo[0]), static_cast<double>(box.lo[1]),
                                         static_cast<double>(box.lo[2]));
  return G(out, geom, std::move(values));
}

}  // namespace detail

struct CroppedPair {
  Volume3D volume;
  LabelMask mask;
};

// Crops image and mask to the foreground bounding box grown by `margin`
// voxels and clamped to the grid. The origin moves so physical positions of
// retained voxels are unchanged.
inline CroppedPair crop_to_bbox(const Volume3D& vol, const LabelMask& mask, std::int64_t margin) {
  if (margin < 0) throw InvalidArgument("crop margin must be >= 0");
  require_same_grid(vol, mask, "crop_to_bbox");
  BoundingBox box = foreground_bbox(mask);
  const std::int64_t n[3] = {mask.dims().nx, mask.dims().ny, mask.dims().nz};
  for (int a = 0; a < 3; ++a) {
    box.lo[a] = std::max<std::int64_t>(0, box.lo[a] - margin);
    box.hi[a] = std::min<std::int64_t>(n[a] - 1, box.hi[a] + margin);
  }
  return {detail::crop_grid(vol, box), detail::crop_grid(mask, box)};
}

}  // namespace lesionkit
