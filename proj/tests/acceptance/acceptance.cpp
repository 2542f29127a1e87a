// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runtime limits count toward the verdict.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lesionkit/lesionkit.hpp"
#include "oracles.hpp"

using namespace lesionkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure notes of a criterion.
struct Checker {
  Outcome out;
  int notes = 0;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    out.pass = false;
    if (notes++ < 3) out.detail += (out.detail.empty() ? "" : "; ") + what;
  }
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "lesionkit_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- 1 ---------------------------------------------------------------------

Outcome dice_oracle() {
  Checker c;
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const LabelMask a = oracle::random_mask(Dims{16, 16, 16}, rng.uniform(0.0, 0.8), rng);
    const LabelMask b = oracle::random_mask(Dims{16, 16, 16}, rng.uniform(0.0, 0.8), rng);
    worst = std::max(worst, std::abs(dice(a, b) - oracle::dice_by_counting(a, b)));
  }
  std::ostringstream d;
  d << worst;
  c.require(worst <= 1e-12, "max |dice - oracle| = " + d.str());
  if (c.out.pass) c.out.detail = "500 pairs, max deviation " + d.str();
  return c.out;
}

// ---- 2 ---------------------------------------------------------------------

Outcome components_oracle() {
  Checker c;
  Rng rng(1002);
  for (int t = 0; t < 200; ++t) {
    const LabelMask m = oracle::random_mask(Dims{12, 12, 12}, 0.3, rng);
    std::size_t count[2] = {0, 0};
    int k = 0;
    for (int conn : {6, 26}) {
      const ComponentSet cs = connected_components(m, conn);
      c.require(oracle::same_partition(cs.label_field, oracle::flood_fill_labels(m, conn)),
                "partition differs (instance " + std::to_string(t) + ", connectivity " + std::to_string(conn) + ")");
      count[k++] = cs.components.size();
    }
    c.require(count[0] >= count[1], "6-connectivity found fewer components than 26 on instance " + std::to_string(t));
  }
  if (c.out.pass) c.out.detail = "200 masks x {6, 26}";
  return c.out;
}

// ---- 3 ---------------------------------------------------------------------

void compare_matrix(Checker& c, const radiomics::CountMatrix& m, const oracle::Matrix& ref, const std::string& what) {
  for (std::int32_t i = 1; i <= m.rows; ++i)
    for (std::int32_t j = 1; j <= m.cols; ++j) {
      const auto it = ref.find({i, j});
      const double want = it == ref.end() ? 0.0 : it->second;
      c.require(m(i, j) == want, what + " matrix entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  for (const auto& [k, v] : ref)
    c.require(k.first <= m.rows && k.second <= m.cols, what + " oracle entry outside matrix");
}

template <std::size_t N, std::size_t M>
double max_deviation(const std::array<double, N>& got, const std::array<double, M>& want,
                     const std::vector<std::size_t>& map) {
  double worst = 0.0;
  for (std::size_t k = 0; k < N; ++k) worst = std::max(worst, std::abs(got[k] - want[map[k]]));
  return worst;
}

Outcome texture_oracle() {
  using namespace radiomics;
  Checker c;
  Rng rng(1003);
  const std::vector<std::size_t> id10{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, id5{0, 1, 2, 3, 4},
      gldm_map{0, 1, 2, 4, 5, 7, 8, 9};
  double worst = 0.0;
  int slices = 0;
  while (slices < 100) {
    const SliceBins s = oracle::random_slice(6, 6, 1 + static_cast<int>(rng.below(4)), rng.uniform(0.5, 1.0), rng);
    if (s.roi_pixels() == 0) continue;
    ++slices;
    const double np = static_cast<double>(s.roi_pixels());
    for (std::size_t a = 0; a < 4; ++a) {
      const auto ref_glcm = oracle::glcm(s, static_cast<int>(a), 1);
      const CountMatrix m = glcm_matrix(s, a, 1);
      compare_matrix(c, m, ref_glcm, "GLCM");
      if (oracle::total(ref_glcm) > 0)
        worst = std::max(worst, max_deviation(glcm_from_matrix(m), oracle::glcm_features(ref_glcm), id10));
      const auto ref_rl = oracle::glrlm(s, static_cast<int>(a));
      const CountMatrix rl = glrlm_matrix(s, a);
      compare_matrix(c, rl, ref_rl, "GLRLM");
      worst = std::max(worst, max_deviation(glrlm_from_matrix(rl, np), oracle::run_features(ref_rl, np), id10));
    }
    const auto ref_sz = oracle::glszm(s);
    compare_matrix(c, glszm_matrix(s), ref_sz, "GLSZM");
    worst = std::max(worst, max_deviation(glszm_features(s), oracle::run_features(ref_sz, np), id10));
    const auto ref_dm = oracle::gldm(s, 1, 0.0);
    compare_matrix(c, gldm_matrix(s), ref_dm, "GLDM");
    worst = std::max(worst, max_deviation(gldm_features(s), oracle::run_features(ref_dm, np), gldm_map));
    const oracle::Ngtdm ref_ng = oracle::ngtdm(s, 1);
    const NgtdmTable table = ngtdm_table(s);
    for (std::int32_t i = 1; i <= s.num_levels; ++i) {
      const auto idx = static_cast<std::size_t>(i - 1);
      c.require(table.n[idx] == (ref_ng.n.count(i) ? ref_ng.n.at(i) : 0.0), "NGTDM n entry");
      c.require(std::abs(table.s[idx] - (ref_ng.s.count(i) ? ref_ng.s.at(i) : 0.0)) <= 1e-12, "NGTDM s entry");
    }
    worst = std::max(worst, max_deviation(ngtdm_from_table(table), oracle::ngtdm_features(ref_ng), id5));
  }
  c.require(worst <= 1e-10, "feature deviation " + std::to_string(worst));
  if (c.out.pass) {
    std::ostringstream d;
    d << "100 slices, 5 families, max feature deviation " << worst;
    c.out.detail = d.str();
  }
  return c.out;
}

// ---- 4 ---------------------------------------------------------------------

Outcome uniform_sphere() {
  Checker c;
  const LabelMask ball = oracle::sphere_mask(10.0);
  const radiomics::FeatureVector f = radiomics::extract_all(Volume3D(ball.dims(), ball.geometry(), 40.0f), ball);
  const double v = 4.0 / 3.0 * std::numbers::pi * 1000.0;
  c.require(f["firstorder_Entropy"] == 0.0, "Entropy " + std::to_string(f["firstorder_Entropy"]));
  c.require(f["firstorder_Uniformity"] == 1.0, "Uniformity " + std::to_string(f["firstorder_Uniformity"]));
  c.require(f["glcm_Contrast"] == 0.0, "GLCM Contrast " + std::to_string(f["glcm_Contrast"]));
  c.require(f["firstorder_Variance"] == 0.0, "Variance " + std::to_string(f["firstorder_Variance"]));
  c.require(std::abs(f["shape_VoxelVolume"] - v) <= 0.05 * v, "VoxelVolume " + std::to_string(f["shape_VoxelVolume"]));
  const double sph = f["shape_Sphericity"];
  c.require(sph >= 0.9 && sph <= 1.0, "Sphericity " + std::to_string(sph));
  if (c.out.pass)
    c.out.detail = "volume " + fmt(f["shape_VoxelVolume"], 0) + " mm3 (ideal " + fmt(v, 0) + "), sphericity " + fmt(sph);
  return c.out;
}

// ---- 5 ---------------------------------------------------------------------

Outcome shift_invariance() {
  Checker c;
  synth::PhantomSpec spec;
  spec.dims = {64, 64, 32};
  spec.volume_cm3 = {0.5, 20.0};
  const auto& cat = radiomics::catalog();
  int compared = 0;
  for (std::uint64_t p = 0; p < 20; ++p) {
    const synth::PhantomCase pc = synth::gen_case(spec, 5000 + p);
    const radiomics::FeatureVector base = radiomics::extract_all(pc.image, pc.ref);
    for (float shift : {-100.0f, 50.0f, 300.0f}) {
      std::vector<float> v(pc.image.values().begin(), pc.image.values().end());
      for (std::size_t i = 0; i < v.size(); ++i)
        if (pc.ref[i]) v[i] += shift;
      const radiomics::FeatureVector moved =
          radiomics::extract_all(Volume3D(pc.image.dims(), pc.image.geometry(), std::move(v)), pc.ref);
      for (std::size_t k = 0; k < cat.size(); ++k) {
        if (!radiomics::is_discretized_domain(cat[k])) continue;
        ++compared;
        c.require(std::bit_cast<std::uint64_t>(base.values[k]) == std::bit_cast<std::uint64_t>(moved.values[k]),
                  cat[k].name + " changed under shift " + fmt(shift, 0) + " (phantom " + std::to_string(p) + ")");
      }
    }
  }
  if (c.out.pass) c.out.detail = "20 phantoms x 3 shifts, " + std::to_string(compared) + " values bitwise equal";
  return c.out;
}

// ---- 6 ---------------------------------------------------------------------

Outcome survival_harness() {
  Checker c;
  const synth::PhantomSpec spec;
  const std::size_t n = 200;
  learn::Matrix x(n, 3);
  std::vector<double> months(n);
  Rng rng(1006);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = spec.sample_volume(rng);
    months[i] = spec.survival_for(v, rng);
    x(i, 0) = v * 1000.0;  // mm3, as shape_VoxelVolume
    x(i, 1) = rng.normal();
    x(i, 2) = rng.normal(30.0, 20.0);
  }
  const std::vector<int> y = learn::dichotomize_survival(months);
  std::vector<int> permuted = y;
  Rng(1106).shuffle(std::span<int>(permuted));

  learn::ForestParams params;
  params.n_trees = 1000;
  params.ccp_alpha = 0.01;
  const learn::CVResult real = learn::cross_validate(x, y, params, 10, 1);
  const learn::CVResult shuffled = learn::cross_validate(x, permuted, params, 10, 1);
  const learn::CVResult reseeded = learn::cross_validate(x, y, params, 10, 2);
  const double p_signal = learn::welch_t_test(real.fold_accuracies, shuffled.fold_accuracies).p;
  const double p_null = learn::welch_t_test(real.fold_accuracies, reseeded.fold_accuracies).p;

  c.require(real.mean >= 0.85, "CV accuracy " + fmt(real.mean) + " < 0.85");
  c.require(shuffled.mean >= 0.4 && shuffled.mean <= 0.6, "permuted accuracy " + fmt(shuffled.mean) + " outside [0.4, 0.6]");
  c.require(p_signal < 0.01, "real vs permuted p = " + fmt(p_signal, 6));
  c.require(p_null > 0.05, "re-seeded p = " + fmt(p_null, 6));
  if (c.out.pass)
    c.out.detail = "accuracy " + fmt(real.mean) + ", permuted " + fmt(shuffled.mean) + ", p(real vs permuted) " +
                   fmt(p_signal, 6) + ", p(re-seeded) " + fmt(p_null);
  return c.out;
}

// ---- 7 ---------------------------------------------------------------------

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int rc = tools::run_cli(args, out, err);
  if (rc != 0) std::cerr << "lesionkit " << (args.empty() ? "" : args.back()) << " failed: " << err.str();
  return rc;
}

Outcome end_to_end() {
  Checker c;
  const fs::path dir = scratch("pipeline");
  const std::string out = dir.string(), manifest = (dir / "manifest.json").string();
  const std::vector<std::string> base{"--seed", "7", "--out", out};
  auto run = [&](std::vector<std::string> rest) {
    std::vector<std::string> a = base;
    a.insert(a.end(), rest.begin(), rest.end());
    return cli(a);
  };
  c.require(run({"phantom", "--n", "30", "--fraction-below-03", "0.1"}) == 0, "phantom failed");
  c.require(run({"evaluate", "--manifest", manifest}) == 0, "evaluate failed");
  c.require(run({"review", "--manifest", manifest}) == 0, "review failed");
  if (!c.out.pass) return c.out;

  const auto truth = tools::read_json(dir / "phantom_truth.json");
  const auto eval = tools::read_json(dir / "evaluation.json");
  const auto review = tools::read_json(dir / "review.json");

  // Independent per-case dice: oracle largest component of the binarized
  // ensemble, scored by voxel counting.
  const auto m = maskio::read_manifest(manifest);
  std::vector<double> hand(m.cases.size());
  double target_sum = 0.0;
  std::vector<std::string> low;
  for (std::size_t i = 0; i < m.cases.size(); ++i) {
    const auto& cs = m.cases[i];
    const LabelMask ref = maskio::read_mask(m.resolve(cs.ref_mask));
    const LabelMask bin = binarize(tools::case_probability(m, cs));
    const std::vector<int> labels = oracle::flood_fill_labels(bin, 26);
    std::vector<std::size_t> sizes;
    for (int l : labels)
      if (l) {
        if (sizes.size() < static_cast<std::size_t>(l)) sizes.resize(static_cast<std::size_t>(l), 0);
        ++sizes[static_cast<std::size_t>(l - 1)];
      }
    LabelMask largest(bin.dims(), bin.geometry());
    if (!sizes.empty()) {
      // First label in raster order among the largest is the one with the smallest first voxel.
      const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin()) + 1;
      for (std::size_t v = 0; v < labels.size(); ++v)
        if (labels[v] == keep) largest.set(v, 1);
    }
    hand[i] = oracle::dice_by_counting(largest, ref);
    const auto& t = truth["cases"][i];
    c.require(t["case_id"] == cs.case_id, "truth order differs from manifest");
    c.require(std::abs(eval["cases"][i]["dice"].get<double>() - hand[i]) <= 1e-12,
              cs.case_id + ": report dice differs from hand count");
    c.require(std::abs(hand[i] - t["target_dice"].get<double>()) <= 0.05, cs.case_id + ": dice off target");
    target_sum += t["target_dice"].get<double>();
    if (t["constructed_low"].get<bool>()) low.push_back(cs.case_id);
  }

  double detected_sum = 0.0;
  std::size_t gt0 = 0, gt05 = 0, gt08 = 0;
  for (double d : hand) {
    if (d > 0.0) {
      ++gt0;
      detected_sum += d;
    }
    gt05 += d > 0.5;
    gt08 += d > 0.8;
  }
  const double n = static_cast<double>(hand.size());
  const auto& cohort = eval["cohort"];
  const double mean_dice = cohort["mean_dice"].get<double>();
  const double mean_target = target_sum / n;
  c.require(low.size() == 3, "expected 3 constructed low cases, found " + std::to_string(low.size()));
  c.require(std::abs(mean_dice - mean_target) <= 0.05,
            "mean dice " + fmt(mean_dice) + " vs target mean " + fmt(mean_target));
  c.require(std::abs(mean_dice - detected_sum / static_cast<double>(gt0)) <= 1e-12, "mean dice differs from hand mean");
  c.require(cohort["frac_dice_gt0"].get<double>() == static_cast<double>(gt0) / n, "fraction > 0 differs");
  c.require(cohort["frac_dice_gt05"].get<double>() == static_cast<double>(gt05) / n, "fraction > 0.5 differs");
  c.require(cohort["frac_dice_gt08"].get<double>() == static_cast<double>(gt08) / n, "fraction > 0.8 differs");
  c.require(review["rejected"].get<std::vector<std::string>>() == low, "review rejected set differs from constructed set");
  if (c.out.pass)
    c.out.detail = "mean dice " + fmt(mean_dice) + " (targets " + fmt(mean_target) + "), rejected " +
                   std::to_string(low.size()) + "/30, fractions " + std::to_string(gt0) + "/" + std::to_string(gt05) +
                   "/" + std::to_string(gt08) + " of 30";
  return c.out;
}

// ---- 8 ---------------------------------------------------------------------

Outcome io_roundtrip() {
  Checker c;
  const fs::path dir = scratch("io");
  Rng rng(1008);
  const maskio::SampleType types[] = {maskio::SampleType::uint8, maskio::SampleType::int16, maskio::SampleType::float32};
  const maskio::Encoding encodings[] = {maskio::Encoding::raw, maskio::Encoding::gzip};
  for (int t = 0; t < 50; ++t) {
    const auto type = types[t % 3];
    const auto enc = encodings[(t / 3) % 2];
    maskio::NrrdImage img;
    img.dims = {static_cast<std::int64_t>(1 + rng.below(20)), static_cast<std::int64_t>(1 + rng.below(20)),
                static_cast<std::int64_t>(1 + rng.below(12))};
    // Random rotation from a unit quaternion.
    double q[4];
    double qn = 0.0;
    for (double& v : q) {
      v = rng.normal();
      qn += v * v;
    }
    for (double& v : q) v /= std::sqrt(qn);
    const double w = q[0], a = q[1], b = q[2], d = q[3];
    img.geometry.axes = {{{1 - 2 * (b * b + d * d), 2 * (a * b + w * d), 2 * (a * d - w * b)},
                          {2 * (a * b - w * d), 1 - 2 * (a * a + d * d), 2 * (b * d + w * a)},
                          {2 * (a * d + w * b), 2 * (b * d - w * a), 1 - 2 * (a * a + b * b)}}};
    for (int k = 0; k < 3; ++k) {
      img.geometry.spacing[static_cast<std::size_t>(k)] = rng.uniform(0.3, 5.0);
      img.geometry.origin[static_cast<std::size_t>(k)] = rng.uniform(-500.0, 500.0);
    }
    const std::size_t count = img.dims.size();
    switch (type) {
      case maskio::SampleType::uint8: {
        std::vector<std::uint8_t> v(count);
        for (auto& x : v) x = static_cast<std::uint8_t>(rng.below(256));
        img.samples = std::move(v);
        break;
      }
      case maskio::SampleType::int16: {
        std::vector<std::int16_t> v(count);
        for (auto& x : v) x = static_cast<std::int16_t>(static_cast<int>(rng.below(65536)) - 32768);
        img.samples = std::move(v);
        break;
      }
      case maskio::SampleType::float32: {
        std::vector<float> v(count);
        for (auto& x : v) x = static_cast<float>(rng.normal(0.0, 1000.0) * std::pow(10.0, rng.uniform(-6, 6)));
        img.samples = std::move(v);
        break;
      }
    }
    const fs::path p = dir / ("v" + std::to_string(t) + ".nrrd");
    maskio::write_nrrd(img, p, enc);
    const maskio::NrrdImage back = maskio::read_nrrd(p);
    const std::string tag = "volume " + std::to_string(t);
    c.require(back.dims == img.dims, tag + ": dims");
    c.require(back.samples == img.samples, tag + ": samples not bit-identical");
    double geo = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      geo = std::max(geo, std::abs(back.geometry.spacing[k] - img.geometry.spacing[k]));
      geo = std::max(geo, std::abs(back.geometry.origin[k] - img.geometry.origin[k]));
      for (std::size_t j = 0; j < 3; ++j)
        geo = std::max(geo, std::abs(back.geometry.axes[k][j] - img.geometry.axes[k][j]));
    }
    c.require(geo <= 1e-9, tag + ": geometry off by " + std::to_string(geo));
  }
  if (c.out.pass) c.out.detail = "50 volumes over 3 types x 2 encodings";
  return c.out;
}

// ---- 9 ---------------------------------------------------------------------

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Checker c;
  const fs::path root = scratch("determinism");
  {
    std::ofstream cfg(root / "run.toml");
    cfg << "[phantom]\ndims = [64, 64, 32]\nvolume_cm3 = [0.5, 20.0]\nn_models = 3\nfp_blob_probability = 0.3\n"
           "fraction_below_03 = 0.1\n\n[learn]\nn_trees = 100\nk = 5\nsearch_samples = 3\n"
           "search_n_trees = [20, 40]\n";
  }
  const std::string cfg = (root / "run.toml").string();
  for (const char* threads : {"1", "8"}) {
    const std::string out = (root / threads).string(), manifest = out + "/manifest.json";
    auto run = [&](std::vector<std::string> rest) {
      std::vector<std::string> a{"--config", cfg, "--seed", "99", "--threads", threads, "--out", out};
      a.insert(a.end(), rest.begin(), rest.end());
      return cli(a);
    };
    c.require(run({"phantom", "--n", "24"}) == 0, "phantom failed");
    c.require(run({"ensemble", "--manifest", manifest}) == 0, "ensemble failed");
    c.require(run({"postprocess", "--manifest", manifest}) == 0, "postprocess failed");
    c.require(run({"evaluate", "--manifest", manifest}) == 0, "evaluate failed");
    c.require(run({"review", "--manifest", manifest}) == 0, "review failed");
    c.require(run({"features", "--manifest", manifest, "--mask", "review"}) == 0, "features failed");
    c.require(run({"survive", "--manifest", manifest, "--features", out + "/features.csv"}) == 0, "survive cv failed");
    c.require(run({"survive", "--manifest", manifest, "--features", out + "/features.csv", "--mode", "search"}) == 0,
              "survive search failed");
    c.require(run({"report", "--inputs", out + "/evaluation.json", out + "/review.json", out + "/survive_cv.json",
                   out + "/search.json"}) == 0,
              "report failed");
  }
  if (!c.out.pass) return c.out;
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "1")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "1");
    const fs::path twin = root / "8" / rel;
    c.require(fs::exists(twin), rel.string() + " missing at 8 threads");
    if (fs::exists(twin)) c.require(slurp(e.path()) == slurp(twin), rel.string() + " differs");
    ++files;
  }
  std::size_t twins = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "8")) twins += e.is_regular_file();
  c.require(twins == files, "output file sets differ");
  for (const char* key : {"features.csv", "evaluation.json", "review.json", "predictions.csv", "model.json", "report.json"})
    c.require(fs::exists(root / "1" / key), std::string(key) + " not produced");
  if (c.out.pass) c.out.detail = std::to_string(files) + " output files byte-identical at 1 and 8 threads";
  return c.out;
}

// ---- 10 --------------------------------------------------------------------

Outcome welch_reference() {
  Checker c;
  const learn::TTestResult r = learn::welch_t_test({1, 2, 3, 4, 5}, {2, 3, 4, 5, 6});
  const learn::TTestResult same = learn::welch_t_test({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5});
  c.require(std::abs(r.t + 1.0) <= 1e-12, "t = " + std::to_string(r.t));
  c.require(std::abs(r.dof - 8.0) <= 1e-9, "dof = " + std::to_string(r.dof));
  c.require(std::abs(r.p - 0.3466) <= 1e-3, "p = " + std::to_string(r.p));
  c.require(same.p == 1.0, "identical samples p = " + std::to_string(same.p));
  if (c.out.pass) c.out.detail = "t " + fmt(r.t, 3) + ", dof " + fmt(r.dof, 3) + ", p " + fmt(r.p) + "; identical p 1";
  return c.out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "dice oracle equivalence", 1.0, dice_oracle},
      {2, "connected-components oracle", 2.0, components_oracle},
      {3, "texture-matrix oracle", 2.0, texture_oracle},
      {4, "uniform sphere feature sanity", 5.0, uniform_sphere},
      {5, "shift invariance", 0.0, shift_invariance},
      {6, "survival harness signal/noise", 60.0, survival_harness},
      {7, "end-to-end pipeline", 60.0, end_to_end},
      {8, "NRRD roundtrip", 2.0, io_roundtrip},
      {9, "determinism across thread counts", 0.0, determinism},
      {10, "Welch t-test reference", 0.0, welch_reference},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0.0 && secs >= cr.limit_s) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("over time limit ") + fmt(cr.limit_s, 0) + " s";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << cr.id << ": " << cr.name << " (" << fmt(secs, 2)
              << " s) " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
