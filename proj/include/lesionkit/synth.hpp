#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lesionkit/core/error.hpp"
#include "lesionkit/core/parallel.hpp"
#include "lesionkit/core/random.hpp"
#include "lesionkit/maskio/manifest.hpp"
#include "lesionkit/maskio/nrrd.hpp"
#include "lesionkit/segeval.hpp"
#include "lesionkit/segpost.hpp"
#include "lesionkit/volgrid.hpp"

namespace lesionkit::synth {

enum class Texture { uniform, noisy, shelled };

inline const char* texture_name(Texture t) {
  switch (t) {
    case Texture::uniform: return "uniform";
    case Texture::noisy: return "noisy";
    case Texture::shelled: return "shelled";
  }
  return "?";
}

inline Texture parse_texture(const std::string& s) {
  if (s == "uniform") return Texture::uniform;
  if (s == "noisy") return Texture::noisy;
  if (s == "shelled") return Texture::shelled;
  throw InvalidArgument("unknown texture mode '" + s + "'");
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct PhantomSpec {
  Dims dims{160, 160, 80};
  Vec3 spacing{1.0, 1.0, 2.0};      // mm
  Range volume_cm3{0.2, 511.9};      // sampled log-uniformly
  double background_hu = -800.0;
  double background_noise_hu = 15.0;
  double lesion_mean_hu = 30.0;
  double lesion_noise_hu = 20.0;     // noisy and shelled modes
  Texture texture = Texture::noisy;
  Range target_dice{0.6, 0.95};
  Range low_dice{0.05, 0.2};         // cases constructed to fail review
  double fraction_below_03 = 0.0;
  int n_models = 1;                  // probability maps per case
  double fp_blob_probability = 0.0; // chance of a separate false-positive blob
  double survival_slope = 15.0;      // months per ln(cm3)
  double survival_noise_sd = 6.0;    // months
  std::optional<double> survival_base;  // default centres the envelope on 60 months

  void validate() const {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) throw InvalidArgument("phantom grid must be nonempty");
    for (double s : spacing)
      if (!(s > 0.0)) throw InvalidArgument("phantom spacing must be > 0");
    if (!(volume_cm3.lo > 0.0) || !(volume_cm3.hi >= volume_cm3.lo))
      throw InvalidArgument("phantom volume range must be positive and ordered");
    for (const Range& r : {target_dice, low_dice})
      if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) throw InvalidArgument("dice range must lie in [0,1]");
    if (!(fraction_below_03 >= 0.0 && fraction_below_03 <= 1.0))
      throw InvalidArgument("fraction_below_03 must lie in [0,1]");
    if (n_models < 1) throw InvalidArgument("n_models must be >= 1");
    if (!(fp_blob_probability >= 0.0 && fp_blob_probability <= 1.0))
      throw InvalidArgument("fp_blob_probability must lie in [0,1]");
    if (!(survival_noise_sd >= 0.0)) throw InvalidArgument("survival noise must be >= 0");
  }

  double base_months() const {
    if (survival_base) return *survival_base;
    const double mid = 0.5 * (std::log(volume_cm3.lo) + std::log(volume_cm3.hi));
    return 60.0 + survival_slope * mid;
  }

  // Log-uniform draw from the volume envelope.
  double sample_volume(Rng& rng) const {
    return std::exp(rng.uniform(std::log(volume_cm3.lo), std::log(volume_cm3.hi)));
  }

  // Months for a lesion of `v_cm3`: base - slope * ln(v) + noise, floored at 0.
  double survival_for(double v_cm3, Rng& rng) const {
    return std::max(0.0, base_months() - survival_slope * std::log(v_cm3) + survival_noise_sd * rng.normal());
  }

  VoxelGeometry geometry() const {
    VoxelGeometry g;
    g.spacing = spacing;
    return g;
  }
};

struct PhantomCase {
  Volume3D image;
  LabelMask ref;
  std::vector<ProbabilityMap> preds;  // one per model
  double survival_months = 0.0;
  double volume_cm3 = 0.0;            // of the voxelized reference
  double target_dice = 1.0;
  double achieved_dice = 1.0;         // binarized ensemble vs reference
};

namespace detail {

struct Ellipsoid {
  Vec3 centre{};   // mm, in index-aligned physical frame (origin 0)
  Vec3 semi{};     // mm

  double level(const Vec3& p) const {
    double q = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double t = (p[a] - centre[a]) / semi[a];
      q += t * t;
    }
    return q;
  }
};

inline Vec3 voxel_position(const Dims& d, const Vec3& s, std::size_t i) {
  const auto c = d.coords(i);
  return {static_cast<double>(c[0]) * s[0], static_cast<double>(c[1]) * s[1], static_cast<double>(c[2]) * s[2]};
}

// Voxel indices inside the axis-aligned box [lo, hi] (mm), clipped to the grid.
inline std::vector<std::size_t> box_voxels(const Dims& d, const Vec3& s, const Vec3& lo, const Vec3& hi) {
  std::array<std::int64_t, 3> a{}, b{};
  const std::int64_t n[3] = {d.nx, d.ny, d.nz};
  for (int k = 0; k < 3; ++k) {
    a[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(lo[k] / s[k])), 0, n[k] - 1);
    b[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(hi[k] / s[k])), 0, n[k] - 1);
  }
  std::vector<std::size_t> out;
  for (std::int64_t z = a[2]; z <= b[2]; ++z)
    for (std::int64_t y = a[1]; y <= b[1]; ++y)
      for (std::int64_t x = a[0]; x <= b[0]; ++x) out.push_back(d.index(x, y, z));
  return out;
}

// The `m` candidates with the lowest level of `e` (ties by index).
inline LabelMask top_voxels(const Dims& d, const VoxelGeometry& g, const std::vector<std::size_t>& candidates,
                            const Ellipsoid& e, std::size_t m) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (auto i : candidates) scored.emplace_back(e.level(voxel_position(d, g.spacing, i)), i);
  m = std::min(m, scored.size());
  std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end());
  LabelMask out(d, g);
  for (std::size_t k = 0; k < m; ++k) out.set(scored[k].second, 1);
  return out;
}

struct Construction {
  LabelMask pred;
  double dice = 0.0;
};

// Shifts a copy of the lesion along `dir` and keeps the `m` voxels closest to
// its centre (in ellipsoid level); the shift is bisected until the overlap
// with the reference reaches `target`.
inline std::optional<Construction> construct_prediction(const LabelMask& ref, const Ellipsoid& lesion, const Vec3& dir,
                                                         double ratio, double target) {
  const Dims d = ref.dims();
  const VoxelGeometry& g = ref.geometry();
  const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(count_foreground(ref)) * ratio));
  const double reach = 2.0 * std::max({lesion.semi[0], lesion.semi[1], lesion.semi[2]}) + 2.0 * std::max({g.spacing[0], g.spacing[1], g.spacing[2]});
  auto attempt = [&](double shift) {
    Ellipsoid e = lesion;
    for (int a = 0; a < 3; ++a) e.centre[a] += shift * dir[a];
    Vec3 lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      const double half = 1.5 * e.semi[a] + 2.0 * g.spacing[a];
      lo[a] = e.centre[a] - half;
      hi[a] = e.centre[a] + half;
    }
    Construction c{top_voxels(d, g, box_voxels(d, g.spacing, lo, hi), e, m), 0.0};
    c.dice = dice(c.pred, ref);
    return c;
  };
  Construction best = attempt(0.0);
  if (std::abs(best.dice - target) <= 0.01) return best;
  if (best.dice < target) return std::abs(best.dice - target) <= 0.05 ? std::optional(best) : std::nullopt;
  double lo = 0.0, hi = reach;
  for (int it = 0; it < 48; ++it) {
    const double mid = 0.5 * (lo + hi);
    Construction c = attempt(mid);
    if (std::abs(c.dice - target) < std::abs(best.dice - target)) best = c;
    if (std::abs(c.dice - target) <= 0.01) break;
    if (c.dice > target) lo = mid;
    else hi = mid;
  }
  if (std::abs(best.dice - target) > 0.05 || count_foreground(best.pred) == 0) return std::nullopt;
  return best;
}

inline void add_blob(LabelMask& pred, const LabelMask& ref, Rng& rng) {
  const Dims d = pred.dims();
  const VoxelGeometry& g = pred.geometry();
  const double r = 2.0 * std::max({g.spacing[0], g.spacing[1], g.spacing[2]});
  for (int tries = 0; tries < 50; ++tries) {
    const Vec3 c{rng.uniform(r, static_cast<double>(d.nx - 1) * g.spacing[0] - r),
                 rng.uniform(r, static_cast<double>(d.ny - 1) * g.spacing[1] - r),
                 rng.uniform(r, static_cast<double>(d.nz - 1) * g.spacing[2] - r)};
    const Vec3 margin{r + 3.0 * g.spacing[0], r + 3.0 * g.spacing[1], r + 3.0 * g.spacing[2]};
    const auto region = box_voxels(d, g.spacing, {c[0] - margin[0], c[1] - margin[1], c[2] - margin[2]},
                                   {c[0] + margin[0], c[1] + margin[1], c[2] + margin[2]});
    // Keep at least three voxels of background between blob and anything else.
    const bool clear = std::none_of(region.begin(), region.end(), [&](std::size_t i) { return pred[i] || ref[i]; });
    if (!clear) continue;
    bool any = false;
    for (auto i : region) {
      const Vec3 p = voxel_position(d, g.spacing, i);
      double q = 0.0;
      for (int a = 0; a < 3; ++a) q += (p[a] - c[a]) * (p[a] - c[a]);
      if (q <= r * r) {
        pred.set(i, 1);
        any = true;
      }
    }
    if (any) return;
  }
}

}  // namespace detail

// One phantom with a prediction calibrated to `target_dice`.
inline PhantomCase gen_case(const PhantomSpec& spec, std::uint64_t seed, double target_dice, bool allow_blob = true) {
  spec.validate();
  if (!(target_dice >= 0.0 && target_dice <= 1.0)) throw InvalidArgument("target dice must lie in [0,1]");
  const Dims d = spec.dims;
  const VoxelGeometry g = spec.geometry();
  const Vec3 extent{static_cast<double>(d.nx - 1) * g.spacing[0], static_cast<double>(d.ny - 1) * g.spacing[1],
                    static_cast<double>(d.nz - 1) * g.spacing[2]};
  Rng rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double v_cm3 = spec.sample_volume(rng);
    const double r0 = std::cbrt(v_cm3 * 1000.0 * 3.0 / (4.0 * std::numbers::pi));
    Vec3 ratio{};
    for (double& q : ratio) q = std::exp(rng.uniform(std::log(0.75), std::log(4.0 / 3.0)));
    const double norm = std::cbrt(ratio[0] * ratio[1] * ratio[2]);
    detail::Ellipsoid lesion;
    bool fits = true;
    for (int a = 0; a < 3; ++a) {
      lesion.semi[a] = r0 * ratio[a] / norm;
      const double margin = 1.5 * lesion.semi[a] + 2.0 * g.spacing[a];
      if (2.0 * margin > extent[a]) {
        fits = false;
        lesion.centre[a] = 0.5 * extent[a];
      } else {
        lesion.centre[a] = rng.uniform(margin, extent[a] - margin);
      }
    }
    if (!fits) {
      if (r0 * 0.75 * 2.0 > std::min({extent[0], extent[1], extent[2]}))
        throw InvalidArgument("lesion volume range cannot fit in the phantom grid");
      continue;
    }

    // Reference mask.
    LabelMask ref(d, g);
    Vec3 lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = lesion.centre[a] - lesion.semi[a] - g.spacing[a];
      hi[a] = lesion.centre[a] + lesion.semi[a] + g.spacing[a];
    }
    for (auto i : detail::box_voxels(d, g.spacing, lo, hi))
      if (lesion.level(detail::voxel_position(d, g.spacing, i)) <= 1.0) ref.set(i, 1);
    const double measured = foreground_volume(ref) / 1000.0;
    if (measured < spec.volume_cm3.lo || measured > spec.volume_cm3.hi) continue;
    if (connected_components(ref, 26).components.size() != 1) continue;

    // Prediction.
    Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
    const double len = std::sqrt(dot(dir, dir));
    for (double& c : dir) c /= len;
    double vol_ratio = target_dice >= 1.0 ? 1.0 : rng.uniform(0.92, 1.1);
    if (2.0 * std::min(1.0, vol_ratio) / (1.0 + vol_ratio) < target_dice + 0.01) vol_ratio = 1.0;
    auto built = detail::construct_prediction(ref, lesion, dir, vol_ratio, target_dice);
    if (!built) continue;
    LabelMask pred = std::move(built->pred);
    if (allow_blob && spec.fp_blob_probability > 0.0 && rng.uniform() < spec.fp_blob_probability)
      detail::add_blob(pred, ref, rng);

    PhantomCase out;
    out.target_dice = target_dice;
    out.achieved_dice = dice(pred, ref);
    out.volume_cm3 = measured;

    // Image.
    std::vector<float> hu(d.size());
    for (std::size_t i = 0; i < hu.size(); ++i) {
      double v = spec.background_hu + spec.background_noise_hu * rng.normal();
      if (ref[i]) {
        const double q = lesion.level(detail::voxel_position(d, g.spacing, i));
        switch (spec.texture) {
          case Texture::uniform: v = spec.lesion_mean_hu; break;
          case Texture::noisy: v = spec.lesion_mean_hu + spec.lesion_noise_hu * rng.normal(); break;
          case Texture::shelled:
            v = spec.lesion_mean_hu + (q < 0.25 ? -60.0 : 0.0) + spec.lesion_noise_hu * rng.normal();
            break;
        }
      }
      hu[i] = static_cast<float>(std::round(v));
    }
    out.image = Volume3D(d, g, std::move(hu));
    out.ref = std::move(ref);

    // Probability maps: above 0.5 exactly on the constructed prediction, in
    // every model, so any average binarizes back to it.
    Vec3 plo{}, phi{};
    const BoundingBox bb = foreground_bbox(pred);
    for (int a = 0; a < 3; ++a) {
      plo[a] = (static_cast<double>(bb.lo[a]) - 3.0) * g.spacing[a];
      phi[a] = (static_cast<double>(bb.hi[a]) + 3.0) * g.spacing[a];
    }
    const auto halo = detail::box_voxels(d, g.spacing, plo, phi);
    for (int k = 0; k < spec.n_models; ++k) {
      std::vector<float> p(d.size(), 0.0f);
      for (auto i : halo) p[i] = static_cast<float>(rng.uniform(0.0, 0.45));
      for (std::size_t i = 0; i < p.size(); ++i)
        if (pred[i]) p[i] = static_cast<float>(rng.uniform(0.55, 1.0));
      out.preds.emplace_back(d, g, std::move(p));
    }

    out.survival_months = spec.survival_for(measured, rng);
    return out;
  }
  throw InvalidArgument("could not construct a phantom meeting the spec (target dice " +
                        std::to_string(target_dice) + ")");
}

// Target dice drawn from the spec's normal range.
inline PhantomCase gen_case(const PhantomSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x7a59e7ULL));
  return gen_case(spec, derive_seed(seed, 1), rng.uniform(spec.target_dice.lo, spec.target_dice.hi));
}

struct CohortTruth {
  std::string case_id;
  double target_dice = 0.0;
  double achieved_dice = 0.0;
  double volume_cm3 = 0.0;
  double survival_months = 0.0;
  bool constructed_low = false;
};

struct Cohort {
  maskio::CohortManifest manifest;
  std::vector<CohortTruth> truth;
};

inline nlohmann::json to_json(const CohortTruth& t) {
  return {{"case_id", t.case_id},
          {"target_dice", t.target_dice},
          {"achieved_dice", t.achieved_dice},
          {"volume_cm3", t.volume_cm3},
          {"survival_months", t.survival_months},
          {"constructed_low", t.constructed_low}};
}

inline std::string case_name(std::size_t i, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(n).size());
  std::string num = std::to_string(i + 1);
  return "case_" + std::string(width - num.size(), '0') + num;
}

// Writes n cases (image, reference, one probability map per model) and
// manifest.json into `dir`. Exactly round(n * fraction_below_03) cases get a
// prediction constructed with dice in the low range.
inline Cohort gen_cohort(std::size_t n, const PhantomSpec& spec, std::uint64_t seed, const std::filesystem::path& dir,
                         unsigned threads = 1, maskio::Encoding encoding = maskio::Encoding::gzip) {
  spec.validate();
  if (n < 1) throw InvalidArgument("cohort size must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const auto n_low = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.fraction_below_03));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng pick(derive_seed(seed, 0x10f0ULL));
  pick.shuffle(std::span<std::size_t>(order));
  std::vector<bool> low(n, false);
  for (std::size_t k = 0; k < n_low; ++k) low[order[k]] = true;

  Cohort cohort;
  cohort.manifest.base_dir = dir;
  cohort.manifest.cases.resize(n);
  cohort.truth.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const std::uint64_t s = derive_seed(seed, i + 1);
    Rng rng(derive_seed(s, 0x7a59e7ULL));
    const Range& r = low[i] ? spec.low_dice : spec.target_dice;
    const double target = rng.uniform(r.lo, r.hi);
    PhantomCase c = gen_case(spec, derive_seed(s, 1), target, !low[i]);

    const std::string id = case_name(i, n);
    maskio::CaseEntry e;
    e.case_id = id;
    e.image = id + "_image.nrrd";
    e.ref_mask = id + "_ref.nrrd";
    maskio::write_volume(c.image, dir / e.image, encoding, maskio::SampleType::int16);
    maskio::write_mask(c.ref, dir / e.ref_mask, encoding);
    for (std::size_t k = 0; k < c.preds.size(); ++k) {
      maskio::PredInput p;
      p.name = "model" + std::to_string(k);
      p.kind = maskio::PredKind::probability;
      p.path = id + "_prob" + std::to_string(k) + ".nrrd";
      maskio::write_probability(c.preds[k], dir / p.path, encoding);
      e.pred.push_back(std::move(p));
    }
    e.survival_months = c.survival_months;
    cohort.manifest.cases[i] = std::move(e);
    cohort.truth[i] = {id, target, c.achieved_dice, c.volume_cm3, c.survival_months, low[i]};
  });
  maskio::write_manifest(cohort.manifest, dir / "manifest.json");
  return cohort;
}

}  // namespace lesionkit::synth
