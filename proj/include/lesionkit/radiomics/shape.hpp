#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/volgrid.hpp"

namespace lesionkit::radiomics {

// How SurfaceArea is estimated.
//  - crofton: stereological line-intersection estimate over the 13 lattice
//    directions; close to unbiased for curved surfaces.
//  - exposed_faces: sum of voxel faces that border background; exact for
//    axis-aligned boxes, about 1.5x the true area for a sphere.
enum class SurfaceMethod { crofton, exposed_faces };

namespace detail {

inline double exposed_face_area(const LabelMask& mask) {
  const Dims d = mask.dims();
  const Vec3& s = mask.geometry().spacing;
  const double face[3] = {s[1] * s[2], s[0] * s[2], s[0] * s[1]};
  auto fg = [&](std::int64_t x, std::int64_t y, std::int64_t z) { return d.contains(x, y, z) && mask(x, y, z); };
  double area = 0.0;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!mask(x, y, z)) continue;
        area += face[0] * ((!fg(x - 1, y, z)) + (!fg(x + 1, y, z)));
        area += face[1] * ((!fg(x, y - 1, z)) + (!fg(x, y + 1, z)));
        area += face[2] * ((!fg(x, y, z - 1)) + (!fg(x, y, z + 1)));
      }
  return area;
}

// Solid-angle share of each of the 26 neighbour directions (physical, after
// spacing) in the spherical Voronoi partition, by quasi-uniform quadrature on
// a Fibonacci sphere. Shares sum to 1.
inline std::array<double, 26> direction_weights(const Vec3& spacing) {
  std::array<Vec3, 26> dirs{};
  std::size_t k = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        Vec3 v{dx * spacing[0], dy * spacing[1], dz * spacing[2]};
        const double len = std::sqrt(dot(v, v));
        dirs[k++] = {v[0] / len, v[1] / len, v[2] / len};
      }
  constexpr int samples = 200000;
  const double golden = std::numbers::pi * (1.0 + std::sqrt(5.0));
  std::array<std::size_t, 26> hits{};
  for (int i = 0; i < samples; ++i) {
    const double t = (i + 0.5) / samples;
    const double polar = std::acos(1.0 - 2.0 * t);
    const double azimuth = golden * (i + 0.5);
    const Vec3 u{std::cos(azimuth) * std::sin(polar), std::sin(azimuth) * std::sin(polar), std::cos(polar)};
    std::size_t best = 0;
    double best_dot = -2.0;
    for (std::size_t j = 0; j < 26; ++j) {
      const double c = dot(u, dirs[j]);
      if (c > best_dot) {
        best_dot = c;
        best = j;
      }
    }
    ++hits[best];
  }
  std::array<double, 26> w{};
  for (std::size_t j = 0; j < 26; ++j) w[j] = static_cast<double>(hits[j]) / samples;
  return w;
}

// Crofton estimate: for lines of direction u, crossings integrated over the
// orthogonal plane equal the integral of |n.u| over the surface, whose mean
// over directions is half the area. Lattice lines through voxel centres are
// used in the 13 undirected neighbour directions.
inline double crofton_area(const LabelMask& mask) {
  const Dims d = mask.dims();
  const Vec3& s = mask.geometry().spacing;
  const auto w = direction_weights(s);
  auto fg = [&](std::int64_t x, std::int64_t y, std::int64_t z) { return d.contains(x, y, z) && mask(x, y, z); };
  double area = 0.0;
  std::size_t k = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const std::size_t slot = k++;
        // Each undirected direction once; its weight is the sum of both senses.
        if (dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx < 0)))) continue;
        std::size_t crossings = 0;
        for (std::int64_t z = 0; z < d.nz; ++z)
          for (std::int64_t y = 0; y < d.ny; ++y)
            for (std::int64_t x = 0; x < d.nx; ++x) {
              if (!mask(x, y, z)) continue;
              crossings += !fg(x + dx, y + dy, z + dz);
              crossings += !fg(x - dx, y - dy, z - dz);
            }
        const Vec3 v{dx * s[0], dy * s[1], dz * s[2]};
        const double area_per_line = mask.geometry().voxel_volume() / std::sqrt(dot(v, v));
        area += 2.0 * w[slot] * static_cast<double>(crossings) * area_per_line;
      }
  return 2.0 * area;
}

// Largest distance between foreground voxel centres. Only voxels at both ends
// of their x-, y- and z-rows can be convex hull vertices, so the search is
// restricted to them.
inline double maximum_diameter(const LabelMask& mask) {
  const Dims d = mask.dims();
  std::vector<std::uint8_t> extreme(mask.size(), 0);
  auto mark_rows = [&](int axis, std::uint8_t bit) {
    const std::int64_t n[3] = {d.nx, d.ny, d.nz};
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (std::int64_t u = 0; u < n[a1]; ++u)
      for (std::int64_t v = 0; v < n[a2]; ++v) {
        std::int64_t lo = -1, hi = -1;
        for (std::int64_t t = 0; t < n[axis]; ++t) {
          std::int64_t c[3];
          c[axis] = t;
          c[a1] = u;
          c[a2] = v;
          if (mask(c[0], c[1], c[2])) {
            if (lo < 0) lo = t;
            hi = t;
          }
        }
        if (lo < 0) continue;
        for (std::int64_t t : {lo, hi}) {
          std::int64_t c[3];
          c[axis] = t;
          c[a1] = u;
          c[a2] = v;
          extreme[d.index(c[0], c[1], c[2])] |= bit;
        }
      }
  };
  mark_rows(0, 1);
  mark_rows(1, 2);
  mark_rows(2, 4);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < extreme.size(); ++i) {
    if (extreme[i] != 7) continue;
    const auto c = d.coords(i);
    pts.push_back(mask.geometry().physical(static_cast<double>(c[0]), static_cast<double>(c[1]),
                                           static_cast<double>(c[2])));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Vec3 diff{pts[i][0] - pts[j][0], pts[i][1] - pts[j][1], pts[i][2] - pts[j][2]};
      best = std::max(best, dot(diff, diff));
    }
  return std::sqrt(best);
}

}  // namespace detail

inline ShapeValues shape_features(const LabelMask& mask, SurfaceMethod method = SurfaceMethod::crofton) {
  using namespace shape;
  const std::size_t n = count_foreground(mask);
  if (n == 0) throw EmptyRegion("shape features: mask is empty");
  ShapeValues f{};
  const double volume = static_cast<double>(n) * mask.geometry().voxel_volume();
  const double area =
      method == SurfaceMethod::crofton ? detail::crofton_area(mask) : detail::exposed_face_area(mask);
  f[VoxelVolume] = volume;
  f[SurfaceArea] = area;
  f[Sphericity] = area > 0.0 ? std::cbrt(36.0 * std::numbers::pi * volume * volume) / area : 0.0;
  f[SurfaceVolumeRatio] = area / volume;
  f[Maximum3DDiameter] = detail::maximum_diameter(mask);

  // Principal component analysis of physical voxel-centre coordinates.
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(n);
  const Dims d = mask.dims();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto c = d.coords(i);
    const Vec3 p = mask.geometry().physical(static_cast<double>(c[0]), static_cast<double>(c[1]),
                                            static_cast<double>(c[2]));
    pts.emplace_back(p[0], p[1], p[2]);
    mean += pts.back();
  }
  mean /= static_cast<double>(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov, Eigen::EigenvaluesOnly);
  // Ascending order from Eigen; clamp round-off below zero.
  const double l3 = std::max(0.0, solver.eigenvalues()[0]);
  const double l2 = std::max(0.0, solver.eigenvalues()[1]);
  const double l1 = std::max(0.0, solver.eigenvalues()[2]);
  f[MajorAxisLength] = 4.0 * std::sqrt(l1);
  f[MinorAxisLength] = 4.0 * std::sqrt(l2);
  f[LeastAxisLength] = 4.0 * std::sqrt(l3);
  f[Elongation] = l1 > 0.0 ? std::sqrt(l2 / l1) : 1.0;
  f[Flatness] = l1 > 0.0 ? std::sqrt(l3 / l1) : 1.0;
  return f;
}

}  // namespace lesionkit::radiomics
