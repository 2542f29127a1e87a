#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/extract.hpp"
#include "lesionkit/radiomics/first_order.hpp"
#include "lesionkit/radiomics/shape.hpp"
#include "oracles.hpp"

using namespace lesionkit;
using namespace lesionkit::radiomics;

namespace {

LabelMask box_mask(Dims grid, std::int64_t x0, std::int64_t y0, std::int64_t z0, std::int64_t sx, std::int64_t sy,
                   std::int64_t sz, VoxelGeometry g = {}) {
  LabelMask m(grid, g);
  for (std::int64_t z = z0; z < z0 + sz; ++z)
    for (std::int64_t y = y0; y < y0 + sy; ++y)
      for (std::int64_t x = x0; x < x0 + sx; ++x) m.set(x, y, z, 1);
  return m;
}

}  // namespace

TEST(Catalog, SeventyUniqueNamesInFamilyOrder) {
  const auto names = catalog_names();
  ASSERT_EQ(names.size(), 70u);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 70u);
  EXPECT_EQ(names.front(), "firstorder_Mean");
  EXPECT_EQ(names[17], "shape_VoxelVolume");
  EXPECT_EQ(names.back(), "gldm_DependenceEntropy");
  std::size_t discretized = 0;
  for (const auto& e : catalog()) discretized += is_discretized_domain(e);
  EXPECT_EQ(discretized, 2u + 10u + 10u + 10u + 5u + 8u);
  EXPECT_EQ(catalog_reference_csv().substr(0, 24), "name,family,formula_id\nf");
}

TEST(FirstOrder, ThreeValueExample) {
  using namespace first_order;
  const FirstOrderValues f = first_order_from({50.0, 0.0, 25.0}, {3, 1, 2});
  EXPECT_DOUBLE_EQ(f[Mean], 25.0);
  EXPECT_DOUBLE_EQ(f[Median], 25.0);
  EXPECT_DOUBLE_EQ(f[Range], 50.0);
  EXPECT_DOUBLE_EQ(f[Percentile10], 5.0);
  EXPECT_DOUBLE_EQ(f[Percentile90], 45.0);
  EXPECT_DOUBLE_EQ(f[InterquartileRange], 25.0);
  EXPECT_DOUBLE_EQ(f[Variance], 1250.0 / 3.0);
  EXPECT_DOUBLE_EQ(f[Skewness], 0.0);
  EXPECT_DOUBLE_EQ(f[Kurtosis], 1.5);
  EXPECT_DOUBLE_EQ(f[Energy], 3125.0);
  EXPECT_DOUBLE_EQ(f[RootMeanSquared], std::sqrt(3125.0 / 3.0));
  EXPECT_DOUBLE_EQ(f[MeanAbsoluteDeviation], 50.0 / 3.0);
  EXPECT_DOUBLE_EQ(f[RobustMeanAbsoluteDeviation], 0.0);
  EXPECT_DOUBLE_EQ(f[Entropy], std::log2(3.0));
  EXPECT_DOUBLE_EQ(f[Uniformity], 1.0 / 3.0);
}

TEST(FirstOrder, ConstantRoiIsDegenerateButFinite) {
  using namespace first_order;
  const FirstOrderValues f = first_order_from({7.0, 7.0, 7.0, 7.0}, {1, 1, 1, 1});
  EXPECT_EQ(f[Variance], 0.0);
  EXPECT_EQ(f[Skewness], 0.0);
  EXPECT_EQ(f[Kurtosis], 0.0);
  EXPECT_EQ(f[Entropy], 0.0);
  EXPECT_FALSE(std::signbit(f[Entropy]));
  EXPECT_EQ(f[Uniformity], 1.0);
  EXPECT_THROW(first_order_from({}, {}), EmptyRegion);
}

TEST(Shape, SingleVoxelFaces) {
  using namespace shape;
  const LabelMask m = box_mask(Dims{3, 3, 3}, 1, 1, 1, 1, 1, 1);
  const ShapeValues f = shape_features(m, SurfaceMethod::exposed_faces);
  EXPECT_DOUBLE_EQ(f[VoxelVolume], 1.0);
  EXPECT_DOUBLE_EQ(f[SurfaceArea], 6.0);
  EXPECT_NEAR(f[Sphericity], 0.806, 5e-4);
  EXPECT_DOUBLE_EQ(f[Maximum3DDiameter], 0.0);
  EXPECT_EQ(f[Elongation], 1.0);
}

TEST(Shape, CubeFacesAndAxes) {
  using namespace shape;
  const LabelMask m = box_mask(Dims{12, 12, 12}, 1, 1, 1, 10, 10, 10);
  const ShapeValues f = shape_features(m, SurfaceMethod::exposed_faces);
  EXPECT_DOUBLE_EQ(f[VoxelVolume], 1000.0);
  EXPECT_DOUBLE_EQ(f[SurfaceArea], 600.0);
  EXPECT_NEAR(f[Sphericity], 0.806, 5e-4);
  EXPECT_DOUBLE_EQ(f[SurfaceVolumeRatio], 0.6);
  EXPECT_NEAR(f[Maximum3DDiameter], 9.0 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(f[MajorAxisLength], 4.0 * std::sqrt(99.0 / 12.0), 1e-9);
  EXPECT_NEAR(f[Elongation], 1.0, 1e-9);
  EXPECT_NEAR(f[Flatness], 1.0, 1e-9);
}

TEST(Shape, AnisotropicSpacingScalesFacesAndDiameter) {
  using namespace shape;
  VoxelGeometry g;
  g.spacing = {1, 1, 2};
  const LabelMask m = box_mask(Dims{4, 4, 4}, 1, 1, 1, 2, 1, 1, g);
  const ShapeValues f = shape_features(m, SurfaceMethod::exposed_faces);
  EXPECT_DOUBLE_EQ(f[VoxelVolume], 4.0);
  EXPECT_DOUBLE_EQ(f[SurfaceArea], 2 * 2.0 + 2 * 4.0 + 2 * 2.0);
  EXPECT_DOUBLE_EQ(f[Maximum3DDiameter], 1.0);
}

TEST(Shape, ElongatedBoxHasSmallerElongation) {
  using namespace shape;
  const ShapeValues f = shape_features(box_mask(Dims{24, 8, 8}, 1, 1, 1, 20, 5, 5));
  EXPECT_LT(f[Elongation], 0.3);
  EXPECT_GT(f[MajorAxisLength], f[MinorAxisLength]);
}

TEST(Shape, SphereSurfaceEstimators) {
  using namespace shape;
  const LabelMask ball = oracle::sphere_mask(10.0);
  const double area = 4.0 * std::numbers::pi * 100.0;
  const ShapeValues crofton = shape_features(ball);
  EXPECT_NEAR(crofton[SurfaceArea], area, 0.05 * area);
  EXPECT_GE(crofton[Sphericity], 0.9);
  EXPECT_LE(crofton[Sphericity], 1.0);
  // Face counting overestimates a sphere's area by about 3/2.
  const ShapeValues faces = shape_features(ball, SurfaceMethod::exposed_faces);
  EXPECT_GT(faces[SurfaceArea], 1.4 * area);
  EXPECT_NEAR(crofton[Maximum3DDiameter], 20.0, 1.0);
  EXPECT_THROW(shape_features(LabelMask(Dims{2, 2, 2}, VoxelGeometry{})), EmptyRegion);
}

TEST(Extract, UniformSphere) {
  const LabelMask ball = oracle::sphere_mask(10.0);
  const Volume3D image(ball.dims(), ball.geometry(), 40.0f);
  const FeatureVector fv = extract_all(image, ball);
  ASSERT_EQ(fv.values.size(), 70u);
  EXPECT_EQ(fv["firstorder_Entropy"], 0.0);
  EXPECT_EQ(fv["firstorder_Uniformity"], 1.0);
  EXPECT_EQ(fv["firstorder_Variance"], 0.0);
  EXPECT_EQ(fv["glcm_Contrast"], 0.0);
  EXPECT_NEAR(fv["shape_VoxelVolume"], 4.0 / 3.0 * std::numbers::pi * 1000.0, 0.05 * 4188.8);
  EXPECT_FALSE(fv.texture_degenerate);
  EXPECT_GT(fv.n_slices_used, 15);
  EXPECT_EQ(fv.config_hash, ExtractionConfig{}.hash());
  EXPECT_THROW(fv["nope"], InvalidArgument);
}

TEST(Extract, ThinRoiIsTextureDegenerate) {
  LabelMask m(Dims{10, 10, 6}, VoxelGeometry{});
  for (std::int64_t z = 1; z < 5; ++z) m.set(4, 4, z, 1);
  Rng rng(1);
  std::vector<float> v(m.size());
  for (auto& x : v) x = static_cast<float>(std::round(rng.uniform(-50, 50)));
  const FeatureVector fv = extract_all(Volume3D(m.dims(), m.geometry(), v), m);
  EXPECT_TRUE(fv.texture_degenerate);
  EXPECT_EQ(fv.n_slices_used, 0);
  EXPECT_TRUE(std::isnan(fv["glcm_Contrast"]));
  EXPECT_TRUE(std::isnan(fv["gldm_DependenceEntropy"]));
  EXPECT_TRUE(std::isfinite(fv["firstorder_Mean"]));
  EXPECT_TRUE(std::isfinite(fv["shape_VoxelVolume"]));
}

TEST(Extract, ShiftInvarianceOfDiscretizedFeatures) {
  Rng rng(5);
  const LabelMask ball = oracle::sphere_mask(5.0);
  std::vector<float> v(ball.size());
  for (auto& x : v) x = static_cast<float>(std::round(rng.normal(30, 40)));
  const FeatureVector a = extract_all(Volume3D(ball.dims(), ball.geometry(), v), ball);
  std::vector<float> shifted = v;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (ball[i]) shifted[i] += 300.0f;
  const FeatureVector b = extract_all(Volume3D(ball.dims(), ball.geometry(), shifted), ball);
  const auto& cat = catalog();
  for (std::size_t k = 0; k < cat.size(); ++k)
    if (is_discretized_domain(cat[k])) EXPECT_EQ(a.values[k], b.values[k]) << cat[k].name;
  EXPECT_NEAR(b["firstorder_Mean"] - a["firstorder_Mean"], 300.0, 1e-9);
}

TEST(Extract, ConfigHashTracksSettings) {
  ExtractionConfig c;
  const std::string base = c.hash();
  c.bin_width = 10.0;
  EXPECT_NE(c.hash(), base);
  c = {};
  c.surface = SurfaceMethod::exposed_faces;
  EXPECT_NE(c.hash(), base);
  c = {};
  c.min_slice_pixels = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Extract, MismatchedGridsThrow) {
  const LabelMask m = box_mask(Dims{4, 4, 4}, 1, 1, 1, 2, 2, 2);
  EXPECT_THROW(extract_all(Volume3D(Dims{4, 4, 3}, VoxelGeometry{}), m), DimensionMismatch);
}
