#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lesionkit::radiomics {

enum class Family { first_order, shape, glcm, glrlm, glszm, ngtdm, gldm };

inline constexpr std::array<std::string_view, 7> kFamilyNames{"firstorder", "shape", "glcm", "glrlm",
                                                              "glszm",      "ngtdm", "gldm"};

namespace first_order {
enum Index : std::size_t {
  Mean, Median, Minimum, Maximum, Range, Percentile10, Percentile90, InterquartileRange, Variance, Skewness,
  Kurtosis, Energy, RootMeanSquared, MeanAbsoluteDeviation, RobustMeanAbsoluteDeviation, Entropy, Uniformity,
  kCount
};
inline constexpr std::array<std::string_view, kCount> kNames{
    "Mean",     "Median",   "Minimum", "Maximum", "Range",           "10Percentile",
    "90Percentile", "InterquartileRange", "Variance", "Skewness", "Kurtosis", "Energy",
    "RootMeanSquared", "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation", "Entropy", "Uniformity"};
}  // namespace first_order

namespace shape {
enum Index : std::size_t {
  VoxelVolume, SurfaceArea, Sphericity, SurfaceVolumeRatio, Maximum3DDiameter, MajorAxisLength, MinorAxisLength,
  LeastAxisLength, Elongation, Flatness, kCount
};
inline constexpr std::array<std::string_view, kCount> kNames{
    "VoxelVolume",     "SurfaceArea",     "Sphericity",      "SurfaceVolumeRatio", "Maximum3DDiameter",
    "MajorAxisLength", "MinorAxisLength", "LeastAxisLength", "Elongation",         "Flatness"};
}  // namespace shape

namespace glcm {
enum Index : std::size_t {
  JointEnergy, JointEntropy, Contrast, Correlation, Idm, Id, SumAverage, DifferenceEntropy, DifferenceVariance,
  Autocorrelation, kCount
};
inline constexpr std::array<std::string_view, kCount> kNames{
    "JointEnergy", "JointEntropy", "Contrast",          "Correlation",        "Idm",
    "Id",          "SumAverage",   "DifferenceEntropy", "DifferenceVariance", "Autocorrelation"};
}  // namespace glcm

namespace glrlm {
enum Index : std::size_t {
  ShortRunEmphasis, LongRunEmphasis, GrayLevelNonUniformity, GrayLevelNonUniformityNormalized,
  RunLengthNonUniformity, RunLengthNonUniformityNormalized, RunPercentage, GrayLevelVariance, RunVariance,
  RunEntropy, kCount
};
inline constexpr std::array<std::string_view, kCount> kNames{
    "ShortRunEmphasis",       "LongRunEmphasis",
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity", "RunLengthNonUniformityNormalized",
    "RunPercentage",          "GrayLevelVariance",
    "RunVariance",            "RunEntropy"};
}  // namespace glrlm

namespace glszm {
enum Index : std::size_t {
  SmallAreaEmphasis, LargeAreaEmphasis, GrayLevelNonUniformity, GrayLevelNonUniformityNormalized,
  SizeZoneNonUniformity, SizeZoneNonUniformityNormalized, ZonePercentage, GrayLevelVariance, ZoneVariance,
  ZoneEntropy, kCount
};
inline constexpr std::array<std::string_view, kCount> kNames{
    "SmallAreaEmphasis",      "LargeAreaEmphasis",
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",  "SizeZoneNonUniformityNormalized",
    "ZonePercentage",         "GrayLevelVariance",
    "ZoneVariance",           "ZoneEntropy"};
}  // namespace glszm

namespace ngtdm {
enum Index : std::size_t { Coarseness, Contrast, Busyness, Complexity, Strength, kCount };
inline constexpr std::array<std::string_view, kCount> kNames{"Coarseness", "Contrast", "Busyness", "Complexity",
                                                             "Strength"};
}  // namespace ngtdm

namespace gldm {
enum Index : std::size_t {
  SmallDependenceEmphasis, LargeDependenceEmphasis, GrayLevelNonUniformity, DependenceNonUniformity,
  DependenceNonUniformityNormalized, GrayLevelVariance, DependenceVariance, DependenceEntropy, kCount
};
inline constexpr std::array<std::string_view, kCount> kNames{
    "SmallDependenceEmphasis", "LargeDependenceEmphasis",           "GrayLevelNonUniformity",
    "DependenceNonUniformity", "DependenceNonUniformityNormalized", "GrayLevelVariance",
    "DependenceVariance",      "DependenceEntropy"};
}  // namespace gldm

template <std::size_t N>
using FamilyValues = std::array<double, N>;

using FirstOrderValues = FamilyValues<first_order::kCount>;
using ShapeValues = FamilyValues<shape::kCount>;
using GlcmValues = FamilyValues<glcm::kCount>;
using GlrlmValues = FamilyValues<glrlm::kCount>;
using GlszmValues = FamilyValues<glszm::kCount>;
using NgtdmValues = FamilyValues<ngtdm::kCount>;
using GldmValues = FamilyValues<gldm::kCount>;

struct CatalogEntry {
  std::string name;  // "<family>_<Feature>"
  Family family;
  std::string_view feature;
};

// The fixed 70-entry feature catalog in emission order.
inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> out;
    auto add = [&](Family f, const auto& names) {
      for (std::string_view n : names)
        out.push_back({std::string(kFamilyNames[static_cast<std::size_t>(f)]) + "_" + std::string(n), f, n});
    };
    add(Family::first_order, first_order::kNames);
    add(Family::shape, shape::kNames);
    add(Family::glcm, glcm::kNames);
    add(Family::glrlm, glrlm::kNames);
    add(Family::glszm, glszm::kNames);
    add(Family::ngtdm, ngtdm::kNames);
    add(Family::gldm, gldm::kNames);
    return out;
  }();
  return entries;
}

inline std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& e : catalog()) out.push_back(e.name);
  return out;
}

inline bool is_texture(Family f) { return f != Family::first_order && f != Family::shape; }

// True for features computed purely on the discretized gray levels.
inline bool is_discretized_domain(const CatalogEntry& e) {
  if (is_texture(e.family)) return true;
  return e.family == Family::first_order && (e.feature == "Entropy" || e.feature == "Uniformity");
}

// Catalog reference as CSV: name,family,formula_id.
inline std::string catalog_reference_csv() {
  std::string out = "name,family,formula_id\n";
  for (const auto& e : catalog())
    out += e.name + "," + std::string(kFamilyNames[static_cast<std::size_t>(e.family)]) + "," +
           std::string(kFamilyNames[static_cast<std::size_t>(e.family)]) + "." + std::string(e.feature) + "\n";
  return out;
}

}  // namespace lesionkit::radiomics
