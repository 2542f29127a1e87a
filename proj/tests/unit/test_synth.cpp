#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lesionkit/segeval.hpp"
#include "lesionkit/segpost.hpp"
#include "lesionkit/synth.hpp"
#include "oracles.hpp"

using namespace lesionkit;
using namespace lesionkit::synth;

namespace {

PhantomSpec small_spec() {
  PhantomSpec s;
  s.dims = {64, 64, 32};
  s.volume_cm3 = {0.5, 20.0};
  return s;
}

LabelMask ensemble_mask(const PhantomCase& c) { return binarize(ensemble_average(c.preds)); }

}  // namespace

TEST(Synth, SameSeedSameCase) {
  const PhantomSpec spec = small_spec();
  const PhantomCase a = gen_case(spec, 42), b = gen_case(spec, 42);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.ref, b.ref);
  EXPECT_EQ(a.preds, b.preds);
  EXPECT_EQ(a.survival_months, b.survival_months);
  const PhantomCase c = gen_case(spec, 43);
  EXPECT_NE(a.ref, c.ref);
}

TEST(Synth, ReferenceIsOneLesionInsideVolumeRange) {
  const PhantomSpec spec = small_spec();
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const PhantomCase c = gen_case(spec, seed);
    const std::vector<int> labels = oracle::flood_fill_labels(c.ref, 26);
    EXPECT_EQ(*std::max_element(labels.begin(), labels.end()), 1);
    const double v = foreground_volume(c.ref) / 1000.0;
    EXPECT_NEAR(v, c.volume_cm3, 1e-9);
    EXPECT_GE(v, spec.volume_cm3.lo);
    EXPECT_LE(v, spec.volume_cm3.hi);
    EXPECT_GE(c.survival_months, 0.0);
  }
}

TEST(Synth, PerfectTargetReproducesReference) {
  const PhantomCase c = gen_case(small_spec(), 5, 1.0);
  EXPECT_EQ(ensemble_mask(c), c.ref);
  EXPECT_EQ(c.achieved_dice, 1.0);
}

TEST(Synth, AchievedDiceTracksTarget) {
  const PhantomSpec spec = small_spec();
  for (double target : {0.6, 0.75, 0.9, 0.1}) {
    const PhantomCase c = gen_case(spec, 7, target, false);
    const double d = dice(ensemble_mask(c), c.ref);
    EXPECT_DOUBLE_EQ(d, c.achieved_dice);
    EXPECT_NEAR(d, target, 0.05) << target;
  }
}

TEST(Synth, ImageIntensities) {
  PhantomSpec spec = small_spec();
  spec.texture = Texture::uniform;
  const PhantomCase c = gen_case(spec, 3);
  double bg = 0.0, n_bg = 0.0;
  for (std::size_t i = 0; i < c.image.size(); ++i) {
    EXPECT_EQ(c.image[i], std::round(c.image[i]));
    if (c.ref[i]) {
      EXPECT_EQ(c.image[i], 30.0f);
    } else {
      bg += c.image[i];
      n_bg += 1.0;
    }
  }
  EXPECT_NEAR(bg / n_bg, -800.0, 1.0);
}

TEST(Synth, ProbabilityMapsRespectBands) {
  PhantomSpec spec = small_spec();
  spec.n_models = 3;
  const PhantomCase c = gen_case(spec, 9, 0.8);
  ASSERT_EQ(c.preds.size(), 3u);
  const LabelMask m = ensemble_mask(c);
  for (const auto& p : c.preds)
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (m[i]) EXPECT_GE(p[i], 0.55f);
      else EXPECT_LE(p[i], 0.45f);
    }
}

TEST(Synth, CaseNames) {
  EXPECT_EQ(case_name(0, 30), "case_001");
  EXPECT_EQ(case_name(1233, 1500), "case_1234");
}

TEST(Synth, CohortHasExactLowFraction) {
  const auto dir = std::filesystem::temp_directory_path() / "lesionkit_synth_cohort";
  std::filesystem::remove_all(dir);
  PhantomSpec spec = small_spec();
  spec.fraction_below_03 = 0.1;
  const Cohort c = gen_cohort(30, spec, 11, dir, 2, maskio::Encoding::raw);
  ASSERT_EQ(c.truth.size(), 30u);
  int low = 0;
  for (const auto& t : c.truth) {
    if (t.constructed_low) {
      ++low;
      EXPECT_LT(t.achieved_dice, 0.3);
    } else {
      EXPECT_GE(t.achieved_dice, 0.3);
      EXPECT_NEAR(t.achieved_dice, t.target_dice, 0.05);
    }
  }
  EXPECT_EQ(low, 3);
  const maskio::CohortManifest m = maskio::read_manifest(dir / "manifest.json", true);
  EXPECT_EQ(m.cases.size(), 30u);
  EXPECT_EQ(m.cases[4].case_id, "case_005");
  EXPECT_EQ(maskio::read_mask(m.resolve(m.cases[4].ref_mask)).dims(), spec.dims);
}

TEST(Synth, SpecValidation) {
  PhantomSpec s;
  s.volume_cm3 = {2.0, 1.0};
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.n_models = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_THROW(parse_texture("marble"), InvalidArgument);
  EXPECT_EQ(parse_texture(texture_name(Texture::shelled)), Texture::shelled);
}
