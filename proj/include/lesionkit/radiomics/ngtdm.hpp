#pragma once

#include <cmath>
#include <vector>

#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/slice.hpp"

namespace lesionkit::radiomics {

inline constexpr double kCoarsenessCap = 1e6;

// Per gray level: n = pixels having at least one in-ROI neighbour within
// Chebyshev distance `delta`, s = Σ |i - mean neighbour level| over them.
struct NgtdmTable {
  std::vector<double> n;  // index level-1
  std::vector<double> s;
};

inline NgtdmTable ngtdm_table(const SliceBins& sl, int delta = 1) {
  if (delta < 1) throw InvalidArgument("ngtdm delta must be >= 1");
  NgtdmTable t{std::vector<double>(static_cast<std::size_t>(sl.num_levels), 0.0),
               std::vector<double>(static_cast<std::size_t>(sl.num_levels), 0.0)};
  for (int y = 0; y < sl.height; ++y)
    for (int x = 0; x < sl.width; ++x) {
      if (!sl.in_roi(x, y)) continue;
      double sum = 0.0;
      int count = 0;
      for (int oy = -delta; oy <= delta; ++oy)
        for (int ox = -delta; ox <= delta; ++ox)
          if ((ox || oy) && sl.in_roi(x + ox, y + oy)) {
            sum += sl.at(x + ox, y + oy);
            ++count;
          }
      if (count == 0) continue;
      const auto level = sl.at(x, y);
      t.n[static_cast<std::size_t>(level - 1)] += 1.0;
      t.s[static_cast<std::size_t>(level - 1)] += std::abs(level - sum / count);
    }
  return t;
}

inline NgtdmValues ngtdm_from_table(const NgtdmTable& t) {
  using namespace ngtdm;
  NgtdmValues f{};
  double total = 0.0;
  for (double v : t.n) total += v;
  const std::size_t ng = t.n.size();
  std::vector<double> p(ng, 0.0);
  int levels_present = 0;
  for (std::size_t i = 0; i < ng; ++i) {
    p[i] = total > 0.0 ? t.n[i] / total : 0.0;
    levels_present += p[i] > 0.0;
  }
  double ps = 0.0, s_total = 0.0;
  for (std::size_t i = 0; i < ng; ++i) {
    ps += p[i] * t.s[i];
    s_total += t.s[i];
  }
  f[Coarseness] = ps > 0.0 ? 1.0 / ps : kCoarsenessCap;
  double contrast = 0.0, busy_denominator = 0.0, complexity = 0.0, strength = 0.0;
  for (std::size_t i = 0; i < ng; ++i) {
    if (p[i] == 0.0) continue;
    const double li = static_cast<double>(i + 1);
    for (std::size_t j = 0; j < ng; ++j) {
      if (p[j] == 0.0) continue;
      const double lj = static_cast<double>(j + 1);
      contrast += p[i] * p[j] * (li - lj) * (li - lj);
      busy_denominator += std::abs(li * p[i] - lj * p[j]);
      complexity += std::abs(li - lj) * (p[i] * t.s[i] + p[j] * t.s[j]) / (p[i] + p[j]);
      strength += (p[i] + p[j]) * (li - lj) * (li - lj);
    }
  }
  f[Contrast] = levels_present > 1
                    ? contrast / (static_cast<double>(levels_present) * (levels_present - 1)) * (s_total / total)
                    : 0.0;
  f[Busyness] = busy_denominator > 0.0 ? ps / busy_denominator : 0.0;
  f[Complexity] = total > 0.0 ? complexity / total : 0.0;
  f[Strength] = s_total > 0.0 ? strength / s_total : 0.0;
  return f;
}

inline NgtdmValues ngtdm_features(const SliceBins& s, int delta = 1) {
  if (s.roi_pixels() == 0) throw EmptyRegion("ngtdm: slice ROI is empty");
  return ngtdm_from_table(ngtdm_table(s, delta));
}

}  // namespace lesionkit::radiomics
