#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lesionkit/maskio/feature_table.hpp"
#include "lesionkit/maskio/manifest.hpp"
#include "lesionkit/maskio/nrrd.hpp"
#include "oracles.hpp"

using namespace lesionkit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lesionkit_maskio_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

VoxelGeometry oblique() {
  VoxelGeometry g;
  g.spacing = {0.75, 1.25, 2.5};
  g.origin = {-12.5, 40.0, 3.25};
  g.axes = {{{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}}};
  return g;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

class NrrdRoundTrip : public ::testing::TestWithParam<std::tuple<maskio::SampleType, maskio::Encoding>> {};

TEST_P(NrrdRoundTrip, VolumeValuesAndGeometrySurvive) {
  const auto [type, enc] = GetParam();
  const fs::path dir = scratch("rt");
  Rng rng(17);
  const Dims d{7, 5, 3};
  std::vector<float> v(d.size());
  for (auto& x : v) {
    x = static_cast<float>(std::round(rng.uniform(0, 200)));
    if (type == maskio::SampleType::float32) x += 0.375f;
  }
  const Volume3D vol(d, oblique(), v);
  const fs::path p = dir / "v.nrrd";
  maskio::write_volume(vol, p, enc, type);
  const Volume3D back = maskio::read_volume(p);
  EXPECT_EQ(back.dims(), d);
  EXPECT_TRUE(back.geometry().approx_equal(vol.geometry(), 1e-12));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(back[i], v[i]);
}

INSTANTIATE_TEST_SUITE_P(
    AllTypes, NrrdRoundTrip,
    ::testing::Combine(::testing::Values(maskio::SampleType::uint8, maskio::SampleType::int16, maskio::SampleType::float32),
                       ::testing::Values(maskio::Encoding::raw, maskio::Encoding::gzip)));

TEST(Nrrd, MaskAndProbabilityRoundTrip) {
  const fs::path dir = scratch("mp");
  Rng rng(2);
  const LabelMask m = oracle::random_mask(Dims{6, 6, 4}, 0.4, rng, oblique());
  maskio::write_mask(m, dir / "m.nrrd", maskio::Encoding::gzip);
  EXPECT_EQ(maskio::read_mask(dir / "m.nrrd"), m);
  std::vector<float> p(m.size());
  for (auto& x : p) x = static_cast<float>(rng.uniform());
  const ProbabilityMap prob(m.dims(), m.geometry(), p);
  maskio::write_probability(prob, dir / "p.nrrd");
  EXPECT_EQ(maskio::read_probability(dir / "p.nrrd"), prob);
}

TEST(Nrrd, RejectsValuesOutsideKind) {
  const fs::path dir = scratch("kind");
  const Volume3D v(Dims{2, 1, 1}, VoxelGeometry{}, std::vector<float>{0.0f, 2.0f});
  maskio::write_volume(v, dir / "v.nrrd");
  EXPECT_THROW(maskio::read_mask(dir / "v.nrrd"), FormatError);
  EXPECT_THROW(maskio::read_probability(dir / "v.nrrd"), FormatError);
  const Volume3D frac(Dims{1, 1, 1}, VoxelGeometry{}, std::vector<float>{0.5f});
  EXPECT_THROW(maskio::write_volume(frac, dir / "f.nrrd", maskio::Encoding::raw, maskio::SampleType::int16),
               InvalidArgument);
}

TEST(Nrrd, HeaderErrors) {
  const fs::path dir = scratch("hdr");
  write_file(dir / "magic.nrrd", "PNG\n");
  EXPECT_THROW(maskio::read_nrrd(dir / "magic.nrrd"), FormatError);
  write_file(dir / "nosizes.nrrd", "NRRD0004\ntype: uint8\ndimension: 3\nencoding: raw\n\n");
  EXPECT_THROW(maskio::read_nrrd(dir / "nosizes.nrrd"), FormatError);
  write_file(dir / "short.nrrd",
             "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\n"
             "space directions: (1,0,0) (0,1,0) (0,0,1)\nencoding: raw\n\nabc");
  EXPECT_THROW(maskio::read_nrrd(dir / "short.nrrd"), FormatError);
  EXPECT_THROW(maskio::read_nrrd(dir / "missing.nrrd"), IoError);
}

TEST(Nrrd, UnknownFieldsBecomeWarnings) {
  const fs::path dir = scratch("warn");
  write_file(dir / "w.nrrd",
             "NRRD0004\n# comment\ntype: uint8\ndimension: 3\nsizes: 1 1 2\n"
             "space directions: (2,0,0) (0,3,0) (0,0,4)\nspace origin: (1,2,3)\n"
             "kinds: domain domain domain\nencoding: raw\nmystery field: 7\n\n" +
                 std::string("\x01\x00", 2));
  const maskio::NrrdImage img = maskio::read_nrrd(dir / "w.nrrd");
  EXPECT_EQ(img.warnings.size(), 1u);
  EXPECT_EQ(img.dims, (Dims{1, 1, 2}));
  EXPECT_DOUBLE_EQ(img.geometry.spacing[1], 3.0);
  EXPECT_DOUBLE_EQ(img.geometry.origin[2], 3.0);
  EXPECT_EQ(img.at(0), 1.0);
  EXPECT_EQ(img.at(1), 0.0);
}

TEST(Manifest, RoundTripAndResolve) {
  const fs::path dir = scratch("man");
  maskio::CohortManifest m;
  maskio::CaseEntry c;
  c.case_id = "a";
  c.image = "a_image.nrrd";
  c.ref_mask = "a_ref.nrrd";
  c.pred = {{"m0", maskio::PredKind::probability, "a_p0.nrrd"}, {"m1", maskio::PredKind::mask, "a_m1.nrrd"}};
  c.survival_months = 42.5;
  m.cases.push_back(c);
  c.case_id = "b";
  c.survival_months.reset();
  m.cases.push_back(c);
  maskio::write_manifest(m, dir / "manifest.json");
  const maskio::CohortManifest back = maskio::read_manifest(dir / "manifest.json");
  ASSERT_EQ(back.cases.size(), 2u);
  EXPECT_EQ(back.cases[0].pred[1].kind, maskio::PredKind::mask);
  EXPECT_EQ(*back.cases[0].survival_months, 42.5);
  EXPECT_FALSE(back.cases[1].survival_months.has_value());
  EXPECT_EQ(back.resolve(back.cases[0].image), dir / "a_image.nrrd");
  EXPECT_EQ(back.resolve("/abs/x.nrrd"), fs::path("/abs/x.nrrd"));
}

TEST(Manifest, RejectsMalformedEntries) {
  const fs::path dir = scratch("bad");
  write_file(dir / "dup.json",
             R"({"cases":[{"case_id":"a","image":"i","ref_mask":"r","pred":[]},)"
             R"({"case_id":"a","image":"i","ref_mask":"r","pred":[]}]})");
  EXPECT_THROW(maskio::read_manifest(dir / "dup.json"), FormatError);
  write_file(dir / "kind.json",
             R"({"cases":[{"case_id":"a","image":"i","ref_mask":"r","pred":[{"name":"x","kind":"soft","path":"p"}]}]})");
  EXPECT_THROW(maskio::read_manifest(dir / "kind.json"), FormatError);
  write_file(dir / "neg.json",
             R"({"cases":[{"case_id":"a","image":"i","ref_mask":"r","pred":[],"survival_months":-1}]})");
  EXPECT_THROW(maskio::read_manifest(dir / "neg.json"), FormatError);
  write_file(dir / "json.json", "{");
  EXPECT_THROW(maskio::read_manifest(dir / "json.json"), FormatError);
}

TEST(Manifest, ValidateChecksReferencedFiles) {
  const fs::path dir = scratch("val");
  write_file(dir / "m.json", R"({"cases":[{"case_id":"a","image":"i.nrrd","ref_mask":"r.nrrd","pred":[]}]})");
  EXPECT_NO_THROW(maskio::read_manifest(dir / "m.json"));
  EXPECT_THROW(maskio::read_manifest(dir / "m.json", true), Error);
}

TEST(FeatureTable, CsvRoundTripIsExact) {
  const fs::path dir = scratch("csv");
  maskio::FeatureTable t;
  t.columns = {"f1", "f2", "f3"};
  t.rows.push_back({"case_1", {0.1, -1e-300, 12345.678901234567}});
  t.rows.push_back({"case_2", {1.0 / 3.0, std::nan(""), 2.0}});
  maskio::write_feature_table(t, dir / "t.csv");
  const maskio::FeatureTable back = maskio::read_feature_table(dir / "t.csv");
  EXPECT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      const double a = t.rows[r].values[c], b = back.rows[r].values[c];
      if (std::isnan(a))
        EXPECT_TRUE(std::isnan(b));
      else
        EXPECT_EQ(a, b);
    }
  EXPECT_EQ(back.row("case_2").values[2], 2.0);
  EXPECT_EQ(back.column_index("f3"), 2u);
  EXPECT_THROW(back.column_index("nope"), InvalidArgument);
}

TEST(FeatureTable, ValidationErrors) {
  maskio::FeatureTable t;
  t.columns = {"a", "a"};
  EXPECT_THROW(t.validate(), FormatError);
  t.columns = {"a"};
  t.rows = {{"x", {1.0}}, {"x", {2.0}}};
  EXPECT_THROW(t.validate(), FormatError);
  t.rows = {{"x", {1.0, 2.0}}};
  EXPECT_THROW(t.validate(), FormatError);
}
