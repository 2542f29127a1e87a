#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "lesionkit/core/error.hpp"
#include "lesionkit/core/parallel.hpp"
#include "lesionkit/discretize.hpp"
#include "lesionkit/radiomics/catalog.hpp"

namespace lesionkit::radiomics {

// Percentile of sorted data with linear interpolation between closest ranks
// (rank h = (n-1)q).
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw EmptyRegion("percentile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Intensity statistics over the ROI values `x` and their gray-level bins.
inline FirstOrderValues first_order_from(std::vector<double> x, const std::vector<std::int32_t>& bins) {
  using namespace first_order;
  if (x.empty()) throw EmptyRegion("first-order features: ROI is empty");
  FirstOrderValues f{};
  const auto n = static_cast<double>(x.size());
  std::sort(x.begin(), x.end());

  const double mean = pairwise_sum(x) / n;
  std::vector<double> d2(x.size()), d3(x.size()), d4(x.size()), ad(x.size()), sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
    ad[i] = std::abs(d);
    sq[i] = x[i] * x[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m3 = pairwise_sum(d3) / n;
  const double m4 = pairwise_sum(d4) / n;

  f[Mean] = mean;
  f[Median] = percentile_sorted(x, 0.5);
  f[Minimum] = x.front();
  f[Maximum] = x.back();
  f[Range] = x.back() - x.front();
  f[Percentile10] = percentile_sorted(x, 0.10);
  f[Percentile90] = percentile_sorted(x, 0.90);
  f[InterquartileRange] = percentile_sorted(x, 0.75) - percentile_sorted(x, 0.25);
  f[Variance] = m2;
  f[Skewness] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  f[Kurtosis] = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  f[Energy] = pairwise_sum(sq);
  f[RootMeanSquared] = std::sqrt(f[Energy] / n);
  f[MeanAbsoluteDeviation] = pairwise_sum(ad) / n;

  std::vector<double> robust;
  for (double v : x)
    if (v >= f[Percentile10] && v <= f[Percentile90]) robust.push_back(v);
  if (robust.empty()) robust = x;
  const double rmean = pairwise_sum(robust) / static_cast<double>(robust.size());
  for (double& v : robust) v = std::abs(v - rmean);
  f[RobustMeanAbsoluteDeviation] = pairwise_sum(robust) / static_cast<double>(robust.size());

  std::map<std::int32_t, std::size_t> hist;
  for (auto b : bins) ++hist[b];
  double entropy = 0.0, uniformity = 0.0;
  for (const auto& [bin, count] : hist) {
    const double p = static_cast<double>(count) / static_cast<double>(bins.size());
    entropy -= p * std::log2(p);
    uniformity += p * p;
  }
  f[Entropy] = entropy == 0.0 ? 0.0 : entropy;  // avoid -0
  f[Uniformity] = uniformity;
  return f;
}

// First-order features over every ROI voxel, with Entropy and Uniformity taken
// from the fixed-bin-width histogram.
inline FirstOrderValues first_order_features(const Volume3D& vol, const LabelMask& mask,
                                             double bin_width = kDefaultBinWidth) {
  const DiscretizedROI roi = discretize(vol, mask, bin_width);
  std::vector<double> x;
  std::vector<std::int32_t> bins;
  x.reserve(roi.voxels.size());
  for (const auto& v : roi.voxels) {
    x.push_back(vol[v.index]);
    bins.push_back(v.bin);
  }
  return first_order_from(std::move(x), bins);
}

}  // namespace lesionkit::radiomics
