#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lesionkit/config.hpp"
#include "lesionkit/learn/cv.hpp"
#include "lesionkit/learn/forest.hpp"
#include "lesionkit/learn/join.hpp"
#include "lesionkit/learn/labels.hpp"
#include "lesionkit/learn/search.hpp"
#include "lesionkit/learn/ttest.hpp"
#include "lesionkit/maskio/feature_table.hpp"
#include "lesionkit/maskio/manifest.hpp"
#include "lesionkit/maskio/nrrd.hpp"
#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/extract.hpp"
#include "lesionkit/segeval.hpp"
#include "lesionkit/segpost.hpp"
#include "lesionkit/synth.hpp"
#include "pipeline.hpp"

namespace lesionkit::tools {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out = ".";
};

struct Context {
  RunConfig cfg;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  fs::path out;
  std::ostream& stdout_;

  json header(const char* command) const {
    return {{"command", command}, {"config_hash", cfg.hash()}, {"seed", seed}};
  }
};

// ---- phantom ---------------------------------------------------------------

struct PhantomArgs {
  std::size_t n = 30;
  std::optional<double> fraction_below_03;
  std::optional<std::string> texture;
};

inline void cmd_phantom(const Context& ctx, const PhantomArgs& a) {
  synth::PhantomSpec spec = ctx.cfg.phantom;
  if (a.fraction_below_03) spec.fraction_below_03 = *a.fraction_below_03;
  if (a.texture) spec.texture = synth::parse_texture(*a.texture);
  const synth::Cohort cohort = synth::gen_cohort(a.n, spec, ctx.seed, ctx.out, ctx.threads);
  json j = ctx.header("phantom");
  j["n"] = a.n;
  j["texture"] = synth::texture_name(spec.texture);
  j["fraction_below_03"] = spec.fraction_below_03;
  j["cases"] = json::array();
  for (const auto& t : cohort.truth) j["cases"].push_back(synth::to_json(t));
  write_json(j, ctx.out / "phantom_truth.json");
  ctx.stdout_ << "wrote " << a.n << " cases to " << (ctx.out / "manifest.json").string() << '\n';
}

// ---- ensemble --------------------------------------------------------------

struct EnsembleArgs {
  std::string manifest;
  std::vector<std::string> inputs;
  std::string output;
};

inline void cmd_ensemble(const Context& ctx, const EnsembleArgs& a) {
  if (!a.inputs.empty()) {
    std::vector<ProbabilityMap> maps;
    for (const auto& p : a.inputs) maps.push_back(maskio::read_probability(p));
    const fs::path target = a.output.empty() ? ctx.out / "ensemble.nrrd" : fs::path(a.output);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    maskio::write_probability(ensemble_average(maps), target, maskio::Encoding::gzip);
    ctx.stdout_ << "wrote " << target.string() << '\n';
    return;
  }
  if (a.manifest.empty()) throw InvalidArgument("ensemble needs --manifest or --inputs");
  const auto m = maskio::read_manifest(a.manifest, true);
  maskio::CohortManifest out_m;
  out_m.base_dir = ctx.out;
  out_m.cases.resize(m.cases.size());
  fs::create_directories(ctx.out / "ensemble");
  // Paths relative to the new manifest keep the output tree relocatable.
  const fs::path out_abs = fs::absolute(ctx.out);
  parallel_for(m.cases.size(), ctx.threads, [&](std::size_t i) {
    const auto& c = m.cases[i];
    maskio::CaseEntry e = c;
    e.image = fs::proximate(fs::absolute(m.resolve(c.image)), out_abs);
    e.ref_mask = fs::proximate(fs::absolute(m.resolve(c.ref_mask)), out_abs);
    const fs::path rel = fs::path("ensemble") / (c.case_id + "_ensemble.nrrd");
    maskio::write_probability(case_probability(m, c), ctx.out / rel, maskio::Encoding::gzip);
    e.pred = {{"ensemble", maskio::PredKind::probability, rel}};
    out_m.cases[i] = std::move(e);
  });
  maskio::write_manifest(out_m, ctx.out / "ensemble_manifest.json");
  ctx.stdout_ << "wrote " << (ctx.out / "ensemble_manifest.json").string() << '\n';
}

// ---- postprocess -----------------------------------------------------------

struct PostprocessArgs {
  std::string manifest;
  bool write_masks = true;
};

inline void cmd_postprocess(const Context& ctx, const PostprocessArgs& a) {
  const auto m = maskio::read_manifest(a.manifest, true);
  std::vector<json> rows(m.cases.size());
  parallel_for(m.cases.size(), ctx.threads, [&](std::size_t i) {
    const auto& c = m.cases[i];
    const PostprocessedCase p = postprocess_case(m, c, ctx.cfg.postproc);
    json comps = json::array();
    for (std::size_t r = 0; r < p.ranked.size(); ++r) {
      const Component& comp = p.components.components[r];
      json jc = {{"rank", r + 1}, {"voxel_count", comp.voxel_count}, {"volume_mm3", comp.volume}};
      if (a.write_masks) {
        const fs::path rel = fs::path("components") / (c.case_id + "_rank" + std::to_string(r + 1) + ".nrrd");
        fs::create_directories(ctx.out / "components");
        maskio::write_mask(p.ranked[r], ctx.out / rel, maskio::Encoding::gzip);
        jc["path"] = rel.generic_string();
      }
      comps.push_back(std::move(jc));
    }
    rows[i] = {{"case_id", c.case_id}, {"n_components", p.ranked.size()}, {"components", std::move(comps)}};
  });
  json j = ctx.header("postprocess");
  j["connectivity"] = ctx.cfg.postproc.connectivity;
  j["threshold"] = ctx.cfg.postproc.threshold;
  j["cases"] = rows;
  write_json(j, ctx.out / "postprocess.json");
  ctx.stdout_ << "postprocessed " << m.cases.size() << " cases\n";
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string manifest;
  std::string report;
  std::string select = "largest";
};

inline json cmd_evaluate(const Context& ctx, const EvaluateArgs& a) {
  if (a.select != "largest" && a.select != "all") throw InvalidArgument("--select must be 'largest' or 'all'");
  const auto m = maskio::read_manifest(a.manifest, true);
  std::vector<CaseEvaluation> evals(m.cases.size());
  parallel_for(m.cases.size(), ctx.threads, [&](std::size_t i) {
    const auto& c = m.cases[i];
    const LabelMask ref = maskio::read_mask(m.resolve(c.ref_mask));
    const PostprocessedCase p = postprocess_case(m, c, ctx.cfg.postproc);
    evals[i] = evaluate_case(c.case_id, a.select == "all" ? p.binary : largest_or_empty(p), ref);
  });
  const CohortReport report = cohort_stats(evals);
  json j = ctx.header("evaluate");
  j["selection"] = a.select;
  j["cases"] = json::array();
  for (const auto& e : evals) j["cases"].push_back(to_json(e));
  j["cohort"] = to_json(report);
  write_json(j, a.report.empty() ? ctx.out / "evaluation.json" : fs::path(a.report));
  ctx.stdout_ << table_row(report) << '\n';
  return j;
}

// ---- review ----------------------------------------------------------------

struct ReviewArgs {
  std::string manifest;
  std::string report;
};

inline json cmd_review(const Context& ctx, const ReviewArgs& a) {
  const auto m = maskio::read_manifest(a.manifest, true);
  std::vector<ReviewOutcome> outcomes(m.cases.size());
  std::vector<CaseEvaluation> evals(m.cases.size());
  parallel_for(m.cases.size(), ctx.threads, [&](std::size_t i) {
    const auto& c = m.cases[i];
    const LabelMask ref = maskio::read_mask(m.resolve(c.ref_mask));
    const PostprocessedCase p = postprocess_case(m, c, ctx.cfg.postproc);
    outcomes[i] = simulate_review(p.ranked, ref, ctx.cfg.review.min_dice);
    if (outcomes[i].status == ReviewStatus::accepted)
      evals[i] = evaluate_case(c.case_id, p.ranked[*outcomes[i].selected_rank], ref);
  });
  json j = ctx.header("review");
  j["min_dice"] = ctx.cfg.review.min_dice;
  j["cases"] = json::array();
  std::vector<CaseEvaluation> accepted;
  json rejected = json::array();
  for (std::size_t i = 0; i < m.cases.size(); ++i) {
    json row = to_json(outcomes[i]);
    row["case_id"] = m.cases[i].case_id;
    j["cases"].push_back(std::move(row));
    if (outcomes[i].status == ReviewStatus::accepted) accepted.push_back(evals[i]);
    else rejected.push_back(m.cases[i].case_id);
  }
  j["n_accepted"] = accepted.size();
  j["n_rejected"] = rejected.size();
  j["rejected"] = rejected;
  if (!accepted.empty()) {
    const CohortReport report = cohort_stats(accepted);
    j["cohort"] = to_json(report);
    ctx.stdout_ << table_row(report) << '\n';
  } else {
    j["cohort"] = nullptr;
  }
  write_json(j, a.report.empty() ? ctx.out / "review.json" : fs::path(a.report));
  return j;
}

// ---- features --------------------------------------------------------------

struct FeaturesArgs {
  std::string manifest;
  std::string mask = "ref";
  std::string csv;
  std::string catalog;
};

inline void cmd_features(const Context& ctx, const FeaturesArgs& a) {
  if (!a.catalog.empty()) write_text(radiomics::catalog_reference_csv(), a.catalog);
  if (a.manifest.empty()) {
    if (a.catalog.empty()) throw InvalidArgument("features needs --manifest (or --catalog only)");
    return;
  }
  if (a.mask != "ref" && a.mask != "largest" && a.mask != "review")
    throw InvalidArgument("--mask must be ref, largest or review");
  const auto m = maskio::read_manifest(a.manifest, true);
  std::vector<std::optional<radiomics::FeatureVector>> fvs(m.cases.size());
  parallel_for(m.cases.size(), ctx.threads, [&](std::size_t i) {
    const auto& c = m.cases[i];
    const Volume3D image = maskio::read_volume(m.resolve(c.image));
    const LabelMask ref = maskio::read_mask(m.resolve(c.ref_mask));
    if (a.mask == "ref") {
      fvs[i] = radiomics::extract_all(image, ref, ctx.cfg.extract);
      return;
    }
    const PostprocessedCase p = postprocess_case(m, c, ctx.cfg.postproc);
    if (a.mask == "largest") {
      if (p.ranked.empty()) return;
      fvs[i] = radiomics::extract_all(image, p.ranked.front(), ctx.cfg.extract);
      return;
    }
    const ReviewOutcome o = simulate_review(p.ranked, ref, ctx.cfg.review.min_dice);
    if (o.status == ReviewStatus::accepted)
      fvs[i] = radiomics::extract_all(image, p.ranked[*o.selected_rank], ctx.cfg.extract);
  });
  maskio::FeatureTable table;
  table.columns = radiomics::catalog_names();
  json meta = ctx.header("features");
  meta["mask"] = a.mask;
  meta["cases"] = json::array();
  meta["excluded"] = json::array();
  for (std::size_t i = 0; i < m.cases.size(); ++i) {
    if (!fvs[i]) {
      meta["excluded"].push_back(m.cases[i].case_id);
      continue;
    }
    table.rows.push_back({m.cases[i].case_id, fvs[i]->values});
    meta["cases"].push_back({{"case_id", m.cases[i].case_id},
                             {"n_slices_used", fvs[i]->n_slices_used},
                             {"texture_degenerate", fvs[i]->texture_degenerate}});
  }
  const fs::path csv = a.csv.empty() ? ctx.out / "features.csv" : fs::path(a.csv);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  maskio::write_feature_table(table, csv);
  fs::path meta_path = csv;
  meta_path.replace_extension(".meta.json");
  write_json(meta, meta_path);
  ctx.stdout_ << "wrote " << table.rows.size() << " feature rows to " << csv.string() << '\n';
}

// ---- survive ---------------------------------------------------------------

struct SurviveArgs {
  std::string manifest;
  std::vector<std::string> features;
  std::string mode = "cv";
};

struct LearningSet {
  learn::Matrix x;
  std::vector<int> y;
  std::vector<std::string> case_ids;
  std::vector<std::string> feature_names;
  std::vector<std::string> dropped;  // columns with non-finite values
};

inline LearningSet learning_set(const maskio::FeatureTable& table, const maskio::CohortManifest& m,
                                double threshold_months) {
  std::map<std::string, double> months;
  for (const auto& c : m.cases)
    if (c.survival_months) months[c.case_id] = *c.survival_months;
  LearningSet s;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    bool finite = true;
    for (const auto& r : table.rows) finite = finite && std::isfinite(r.values[j]);
    if (finite) keep.push_back(j);
    else s.dropped.push_back(table.columns[j]);
  }
  if (keep.empty()) throw InvalidArgument("no feature column is finite for every case");
  std::vector<double> surv;
  s.x = learn::Matrix(table.rows.size(), keep.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const auto it = months.find(r.case_id);
    if (it == months.end()) throw InvalidArgument("no survival months for case '" + r.case_id + "'");
    surv.push_back(it->second);
    s.case_ids.push_back(r.case_id);
    for (std::size_t k = 0; k < keep.size(); ++k) s.x(i, k) = r.values[keep[k]];
  }
  for (auto j : keep) s.feature_names.push_back(table.columns[j]);
  s.y = learn::dichotomize_survival(surv, threshold_months);
  return s;
}

inline json cv_json(const learn::CVResult& cv) {
  return {{"fold_accuracies", cv.fold_accuracies},
          {"mean_accuracy", cv.mean},
          {"params", learn::params_to_json(cv.params)},
          {"seed", cv.seed}};
}

inline void cmd_survive(const Context& ctx, const SurviveArgs& a) {
  if (a.features.empty()) throw InvalidArgument("survive needs at least one --features table");
  const auto m = maskio::read_manifest(a.manifest);
  const auto& lc = ctx.cfg.learn;
  std::vector<maskio::FeatureTable> tables;
  for (const auto& f : a.features) tables.push_back(maskio::read_feature_table(f));

  if (a.mode == "compare") {
    std::vector<learn::CVResult> results;
    std::vector<std::string> names;
    json j = ctx.header("survive-compare");
    j["test"] = lc.test == learn::TTestKind::welch ? "welch" : "paired";
    j["inputs"] = json::array();
    for (std::size_t t = 0; t < tables.size(); ++t) {
      const LearningSet s = learning_set(tables[t], m, lc.threshold_months);
      results.push_back(learn::cross_validate(s.x, s.y, lc.forest, lc.k, ctx.seed, ctx.threads));
      names.push_back(fs::path(a.features[t]).stem().string());
      json row = cv_json(results.back());
      row["name"] = names.back();
      row["dropped_features"] = s.dropped;
      j["inputs"].push_back(std::move(row));
    }
    json p = json::array();
    std::string csv = "name";
    for (const auto& n : names) csv += "," + n;
    csv += '\n';
    for (std::size_t r = 0; r < results.size(); ++r) {
      json prow = json::array();
      csv += names[r];
      for (std::size_t c = 0; c < results.size(); ++c) {
        const double pv = learn::t_test(results[r].fold_accuracies, results[c].fold_accuracies, lc.test).p;
        prow.push_back(pv);
        csv += "," + format_double(pv);
      }
      csv += '\n';
      p.push_back(std::move(prow));
    }
    j["names"] = names;
    j["p_values"] = std::move(p);
    write_json(j, ctx.out / "compare.json");
    write_text(csv, ctx.out / "compare_pvalues.csv");
    for (std::size_t r = 0; r < results.size(); ++r)
      ctx.stdout_ << names[r] << ": mean accuracy " << format_double(results[r].mean) << '\n';
    return;
  }

  const maskio::FeatureTable joined = learn::join_feature_tables(tables);
  const LearningSet s = learning_set(joined, m, lc.threshold_months);
  if (a.mode == "cv") {
    const learn::CVResult cv = learn::cross_validate(s.x, s.y, lc.forest, lc.k, ctx.seed, ctx.threads);
    json j = ctx.header("survive-cv");
    j["cv"] = cv_json(cv);
    j["n_cases"] = s.case_ids.size();
    j["n_features"] = s.feature_names.size();
    j["dropped_features"] = s.dropped;
    write_json(j, ctx.out / "survive_cv.json");

    learn::ForestParams fp = lc.forest;
    fp.seed = derive_seed(ctx.seed, 0xf17aULL);
    const learn::ForestModel model = learn::fit_forest(s.x, s.y, fp, ctx.threads, s.feature_names);
    json mj = learn::to_json(model);
    mj["config_hash"] = ctx.cfg.hash();
    write_json(mj, ctx.out / "model.json");
    const learn::Prediction pred = learn::predict(model, s.x);
    std::string csv = "case_id,label,predicted";
    for (int c : model.classes) csv += ",vote_" + std::to_string(c);
    csv += '\n';
    for (std::size_t i = 0; i < s.case_ids.size(); ++i) {
      csv += s.case_ids[i] + "," + std::to_string(s.y[i]) + "," + std::to_string(pred.labels[i]);
      for (double v : pred.vote_fractions[i]) csv += "," + format_double(v);
      csv += '\n';
    }
    write_text(csv, ctx.out / "predictions.csv");
    ctx.stdout_ << "mean accuracy " << format_double(cv.mean) << '\n';
    return;
  }
  if (a.mode == "search") {
    const auto ranked = learn::random_search(s.x, s.y, lc.search, lc.k, ctx.seed, ctx.threads);
    json j = ctx.header("survive-search");
    j["ranking"] = json::array();
    for (const auto& e : ranked) {
      json row = cv_json(e.cv);
      row["sample_index"] = e.sample_index;
      j["ranking"].push_back(std::move(row));
    }
    write_json(j, ctx.out / "search.json");
    ctx.stdout_ << "best mean accuracy " << format_double(ranked.front().cv.mean) << '\n';
    return;
  }
  throw InvalidArgument("--mode must be cv, search or compare");
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string output;
};

inline void cmd_report(const Context& ctx, const ReportArgs& a) {
  json j = ctx.header("report");
  j["reports"] = json::object();
  std::vector<std::string> hashes;
  for (const auto& in : a.inputs) {
    json doc = read_json(in);
    std::string key = fs::path(in).stem().string();
    while (j["reports"].contains(key)) key += "_";
    if (doc.is_object() && doc.contains("config_hash") && doc["config_hash"].is_string())
      hashes.push_back(doc["config_hash"].get<std::string>());
    j["reports"][key] = std::move(doc);
  }
  std::sort(hashes.begin(), hashes.end());
  hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
  j["input_config_hashes"] = hashes;
  const fs::path target = a.output.empty() ? ctx.out / "report.json" : fs::path(a.output);
  write_json(j, target);
  ctx.stdout_ << "merged " << a.inputs.size() << " reports into " << target.string() << '\n';
}

// ---- entry point -----------------------------------------------------------

// Exit codes: 0 success, 1 runtime or data error, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"lesionkit: lesion segmentation post-processing, evaluation, radiomics and survival modelling"};
  app.name("lesionkit");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", g.out, "Output directory");

  PhantomArgs pa;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic phantom cohort");
  phantom->add_option("--n", pa.n, "Number of cases")->check(CLI::PositiveNumber);
  phantom->add_option("--fraction-below-03", pa.fraction_below_03, "Share of cases built to fail review");
  phantom->add_option("--texture", pa.texture, "uniform, noisy or shelled");

  EnsembleArgs ea;
  auto* ensemble = app.add_subcommand("ensemble", "Average probability maps");
  ensemble->add_option("--manifest", ea.manifest, "Cohort manifest");
  ensemble->add_option("--inputs", ea.inputs, "Probability maps of one case");
  ensemble->add_option("--output", ea.output, "Output map (with --inputs)");

  PostprocessArgs ppa;
  auto* postprocess = app.add_subcommand("postprocess", "Binarize and split predictions into ranked components");
  postprocess->add_option("--manifest", ppa.manifest, "Cohort manifest")->required();
  postprocess->add_flag("!--no-masks", ppa.write_masks, "Skip writing component masks");

  EvaluateArgs eva;
  auto* evaluate = app.add_subcommand("evaluate", "Dice per case and cohort summary");
  evaluate->add_option("--manifest", eva.manifest, "Cohort manifest")->required();
  evaluate->add_option("--report", eva.report, "Report path (default <out>/evaluation.json)");
  evaluate->add_option("--select", eva.select, "largest (default) or all components");

  ReviewArgs ra;
  auto* review = app.add_subcommand("review", "Simulated reader review of ranked components");
  review->add_option("--manifest", ra.manifest, "Cohort manifest")->required();
  review->add_option("--report", ra.report, "Report path (default <out>/review.json)");

  FeaturesArgs fa;
  auto* features = app.add_subcommand("features", "Extract the radiomic feature catalog");
  features->add_option("--manifest", fa.manifest, "Cohort manifest");
  features->add_option("--mask", fa.mask, "ref, largest or review");
  features->add_option("--csv", fa.csv, "Feature table path (default <out>/features.csv)");
  features->add_option("--catalog", fa.catalog, "Write the feature catalog reference CSV here");

  SurviveArgs sa;
  auto* survive = app.add_subcommand("survive", "Survival classification: cv, search or compare");
  survive->add_option("--manifest", sa.manifest, "Cohort manifest with survival months")->required();
  survive->add_option("--features", sa.features, "Feature table(s)")->required();
  survive->add_option("--mode", sa.mode, "cv (default), search or compare");

  ReportArgs rpa;
  auto* report = app.add_subcommand("report", "Merge JSON reports");
  report->add_option("--inputs", rpa.inputs, "Report files")->required();
  report->add_option("--output", rpa.output, "Merged report (default <out>/report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    Context ctx{g.config_path.empty() ? RunConfig{} : load_config(g.config_path), g.seed, g.threads, g.out, out};
    fs::create_directories(ctx.out);
    if (*phantom) cmd_phantom(ctx, pa);
    else if (*ensemble) cmd_ensemble(ctx, ea);
    else if (*postprocess) cmd_postprocess(ctx, ppa);
    else if (*evaluate) cmd_evaluate(ctx, eva);
    else if (*review) cmd_review(ctx, ra);
    else if (*features) cmd_features(ctx, fa);
    else if (*survive) cmd_survive(ctx, sa);
    else if (*report) cmd_report(ctx, rpa);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"lesionkit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lesionkit::tools
