#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "lesionkit/volgrid.hpp"

namespace lesionkit {

inline constexpr double kDefaultBinarizeThreshold = 0.5;
inline constexpr int kDefaultConnectivity = 26;

// Voxel-wise arithmetic mean of probability maps sharing one grid.
inline ProbabilityMap ensemble_average(std::span<const ProbabilityMap> maps) {
  if (maps.empty()) throw InvalidArgument("ensemble_average: no probability maps");
  for (const auto& m : maps.subspan(1)) require_same_grid(maps[0], m, "ensemble_average");
  const std::size_t n = maps[0].size();
  std::vector<float> out(n);
  const double k = static_cast<double>(maps.size());
  std::vector<float> column(maps.size());
  for (std::size_t i = 0; i < n; ++i) {
    // Summing in sorted order makes the mean independent of argument order.
    for (std::size_t m = 0; m < maps.size(); ++m) column[m] = maps[m][i];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (float v : column) s += v;
    out[i] = static_cast<float>(std::clamp(s / k, 0.0, 1.0));
  }
  return ProbabilityMap(maps[0].dims(), maps[0].geometry(), std::move(out));
}

// Foreground iff p > threshold (a voxel at exactly the threshold is background).
inline LabelMask binarize(const ProbabilityMap& prob, double threshold = kDefaultBinarizeThreshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("binarize: threshold must lie in [0,1]");
  std::vector<std::uint8_t> out(prob.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = prob[i] > threshold ? 1 : 0;
  return LabelMask(prob.dims(), prob.geometry(), std::move(out));
}

struct Component {
  std::int32_t id = 0;
  std::size_t voxel_count = 0;
  double volume = 0.0;  // mm^3
  std::size_t first_voxel = 0;  // smallest linear index in the component
};

// Labelled partition of a mask's foreground. Ids are dense 1..K and assigned
// in rank order: volume descending, ties by ascending first voxel.
struct ComponentSet {
  Dims dims;
  VoxelGeometry geometry;
  std::vector<std::int32_t> label_field;  // 0 = background
  std::vector<Component> components;
};

// All offsets of the 3x3x3 neighbourhood admitted by the connectivity rule.
inline std::vector<std::array<int, 3>> neighbour_offsets(int connectivity) {
  if (connectivity != 6 && connectivity != 18 && connectivity != 26)
    throw InvalidArgument("connectivity must be 6, 18 or 26");
  std::vector<std::array<int, 3>> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (order == 0) continue;
        if (connectivity == 6 && order > 1) continue;
        if (connectivity == 18 && order > 2) continue;
        out.push_back({dx, dy, dz});
      }
  return out;
}

namespace detail {

struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
  }
};

}  // namespace detail

// Two-pass union-find labelling of the foreground.
inline ComponentSet connected_components(const LabelMask& mask, int connectivity = kDefaultConnectivity) {
  const auto all = neighbour_offsets(connectivity);
  // Offsets that precede the current voxel in scan order.
  std::vector<std::array<int, 3>> back;
  for (const auto& o : all)
    if (o[2] < 0 || (o[2] == 0 && (o[1] < 0 || (o[1] == 0 && o[0] < 0)))) back.push_back(o);

  const Dims d = mask.dims();
  ComponentSet cs;
  cs.dims = d;
  cs.geometry = mask.geometry();
  std::vector<std::int32_t> provisional(mask.size(), -1);
  detail::DisjointSet sets;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const std::size_t i = d.index(x, y, z);
        if (!mask[i]) continue;
        std::int32_t label = -1;
        for (const auto& o : back) {
          const std::int64_t nx = x + o[0], ny = y + o[1], nz = z + o[2];
          if (!d.contains(nx, ny, nz)) continue;
          const std::int32_t other = provisional[d.index(nx, ny, nz)];
          if (other < 0) continue;
          if (label < 0) label = other;
          else sets.unite(label, other);
        }
        provisional[i] = label < 0 ? sets.make() : label;
      }

  // Resolve roots; collect counts and first voxels in scan order.
  std::vector<std::int32_t> root_slot(sets.parent.size(), -1);
  std::vector<Component> found;
  for (std::size_t i = 0; i < provisional.size(); ++i) {
    if (provisional[i] < 0) continue;
    const std::int32_t root = sets.find(provisional[i]);
    auto& slot = root_slot[static_cast<std::size_t>(root)];
    if (slot < 0) {
      slot = static_cast<std::int32_t>(found.size());
      found.push_back({0, 0, 0.0, i});
    }
    ++found[static_cast<std::size_t>(slot)].voxel_count;
    provisional[i] = slot;
  }
  const double vv = mask.geometry().voxel_volume();
  for (auto& c : found) c.volume = static_cast<double>(c.voxel_count) * vv;

  std::vector<std::int32_t> order(found.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const auto& ca = found[static_cast<std::size_t>(a)];
    const auto& cb = found[static_cast<std::size_t>(b)];
    if (ca.voxel_count != cb.voxel_count) return ca.voxel_count > cb.voxel_count;
    return ca.first_voxel < cb.first_voxel;
  });
  std::vector<std::int32_t> id_of_slot(found.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    Component c = found[static_cast<std::size_t>(order[r])];
    c.id = static_cast<std::int32_t>(r + 1);
    id_of_slot[static_cast<std::size_t>(order[r])] = c.id;
    cs.components.push_back(c);
  }
  cs.label_field.assign(mask.size(), 0);
  for (std::size_t i = 0; i < provisional.size(); ++i)
    if (provisional[i] >= 0) cs.label_field[i] = id_of_slot[static_cast<std::size_t>(provisional[i])];
  return cs;
}

inline LabelMask component_mask(const ComponentSet& cs, std::int32_t id) {
  std::vector<std::uint8_t> v(cs.label_field.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cs.label_field[i] == id ? 1 : 0;
  return LabelMask(cs.dims, cs.geometry, std::move(v));
}

// One mask per component, largest first.
inline std::vector<LabelMask> rank_by_volume(const ComponentSet& cs) {
  std::vector<LabelMask> out;
  out.reserve(cs.components.size());
  for (const auto& c : cs.components) out.push_back(component_mask(cs, c.id));
  return out;
}

inline LabelMask largest_component(const LabelMask& mask, int connectivity = kDefaultConnectivity) {
  const ComponentSet cs = connected_components(mask, connectivity);
  if (cs.components.empty()) return mask;
  return component_mask(cs, cs.components.front().id);
}

}  // namespace lesionkit
