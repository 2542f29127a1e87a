#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lesionkit/core/parallel.hpp"
#include "lesionkit/volgrid.hpp"

namespace lesionkit {

inline constexpr double kDefaultMinReviewDice = 0.3;

// 2|A∩B| / (|A|+|B|); two empty masks agree perfectly (1.0).
inline double dice(const LabelMask& pred, const LabelMask& ref) {
  require_same_grid(pred, ref, "dice");
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    a += pred[i];
    b += ref[i];
    both += pred[i] & ref[i];
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

inline double volume_ratio(const LabelMask& pred, const LabelMask& ref) {
  require_same_grid(pred, ref, "volume_ratio");
  const double ref_volume = foreground_volume(ref);
  if (ref_volume <= 0.0) throw EmptyRegion("volume_ratio: reference mask is empty");
  return foreground_volume(pred) / ref_volume;
}

struct CaseEvaluation {
  std::string case_id;
  double dice = 0.0;
  double volume_ratio = 0.0;
  double pred_volume = 0.0;  // mm^3
  double ref_volume = 0.0;   // mm^3
};

inline CaseEvaluation evaluate_case(std::string case_id, const LabelMask& pred, const LabelMask& ref) {
  CaseEvaluation e;
  e.case_id = std::move(case_id);
  e.dice = dice(pred, ref);
  e.pred_volume = foreground_volume(pred);
  e.ref_volume = foreground_volume(ref);
  e.volume_ratio = volume_ratio(pred, ref);
  return e;
}

enum class ReviewStatus { accepted, rejected };
enum class ReviewReason { none, all_below_threshold, no_components };

struct ReviewOutcome {
  ReviewStatus status = ReviewStatus::rejected;
  std::optional<std::size_t> selected_rank;  // index into the candidate list
  std::optional<double> selected_dice;       // best dice, also set when rejected below threshold
  ReviewReason reason = ReviewReason::no_components;
};

inline const char* to_string(ReviewStatus s) { return s == ReviewStatus::accepted ? "accepted" : "rejected"; }
inline const char* to_string(ReviewReason r) {
  switch (r) {
    case ReviewReason::none: return "none";
    case ReviewReason::all_below_threshold: return "all_below_threshold";
    case ReviewReason::no_components: return "no_components";
  }
  return "?";
}

// Emulates a reader picking the best-overlapping candidate and rejecting the
// case when even that one overlaps less than `min_dice`.
inline ReviewOutcome simulate_review(std::span<const LabelMask> candidates, const LabelMask& ref,
                                     double min_dice = kDefaultMinReviewDice) {
  if (!(min_dice >= 0.0 && min_dice <= 1.0)) throw InvalidArgument("simulate_review: min_dice must lie in [0,1]");
  if (count_foreground(ref) == 0) throw EmptyRegion("simulate_review: reference mask is empty");
  ReviewOutcome out;
  if (candidates.empty()) return out;
  std::size_t best = 0;
  double best_dice = -1.0;
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    const double d = dice(candidates[r], ref);
    if (d > best_dice) {
      best_dice = d;
      best = r;
    }
  }
  out.selected_dice = best_dice;
  if (best_dice >= min_dice) {
    out.status = ReviewStatus::accepted;
    out.selected_rank = best;
    out.reason = ReviewReason::none;
  } else {
    out.reason = ReviewReason::all_below_threshold;
  }
  return out;
}

// Cohort summary laid out like a segmentation results table: mean ± std over
// detected cases (dice > 0) and the share of all cases above 0, 0.5, 0.8.
struct CohortReport {
  std::size_t n_total = 0;
  std::size_t n_detected = 0;
  double mean_dice = 0.0;
  double std_dice = 0.0;
  double frac_dice_gt0 = 0.0;
  double frac_gt_05 = 0.0;
  double frac_gt_08 = 0.0;
  double mean_volume_ratio = 0.0;  // over cases with a nonempty reference
};

inline CohortReport cohort_stats(std::span<const CaseEvaluation> evals) {
  if (evals.empty()) throw InvalidArgument("cohort_stats: no cases");
  CohortReport r;
  r.n_total = evals.size();
  std::vector<double> detected, ratios;
  std::size_t gt05 = 0, gt08 = 0;
  for (const auto& e : evals) {
    if (e.dice > 0.0) detected.push_back(e.dice);
    if (e.dice > 0.5) ++gt05;
    if (e.dice > 0.8) ++gt08;
    if (e.ref_volume > 0.0) ratios.push_back(e.volume_ratio);
  }
  r.n_detected = detected.size();
  const auto n = static_cast<double>(r.n_total);
  r.frac_dice_gt0 = static_cast<double>(r.n_detected) / n;
  r.frac_gt_05 = static_cast<double>(gt05) / n;
  r.frac_gt_08 = static_cast<double>(gt08) / n;
  if (!detected.empty()) {
    r.mean_dice = pairwise_sum(detected) / static_cast<double>(detected.size());
    if (detected.size() > 1) {
      std::vector<double> sq(detected.size());
      for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (detected[i] - r.mean_dice) * (detected[i] - r.mean_dice);
      r.std_dice = std::sqrt(pairwise_sum(sq) / static_cast<double>(detected.size() - 1));
    }
  }
  if (!ratios.empty()) r.mean_volume_ratio = pairwise_sum(ratios) / static_cast<double>(ratios.size());
  return r;
}

// "0.72 ± 0.29 | 91 % | 78 % | 45 %"
inline std::string table_row(const CohortReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f | %.0f %% | %.0f %% | %.0f %%", r.mean_dice, r.std_dice,
                100.0 * r.frac_dice_gt0, 100.0 * r.frac_gt_05, 100.0 * r.frac_gt_08);
  return buf;
}

inline nlohmann::json to_json(const CaseEvaluation& e) {
  return {{"case_id", e.case_id},
          {"dice", e.dice},
          {"volume_ratio", e.volume_ratio},
          {"pred_volume_mm3", e.pred_volume},
          {"ref_volume_mm3", e.ref_volume}};
}

inline nlohmann::json to_json(const CohortReport& r) {
  return {{"n_total", r.n_total},
          {"n_detected", r.n_detected},
          {"mean_dice", r.mean_dice},
          {"std_dice", r.std_dice},
          {"frac_dice_gt0", r.frac_dice_gt0},
          {"frac_dice_gt05", r.frac_gt_05},
          {"frac_dice_gt08", r.frac_gt_08},
          {"mean_volume_ratio", r.mean_volume_ratio},
          {"table_row", table_row(r)}};
}

inline nlohmann::json to_json(const ReviewOutcome& o) {
  nlohmann::json j = {{"status", to_string(o.status)}, {"reason", to_string(o.reason)}};
  j["selected_rank"] = o.selected_rank ? nlohmann::json(*o.selected_rank) : nlohmann::json(nullptr);
  j["best_dice"] = o.selected_dice ? nlohmann::json(*o.selected_dice) : nlohmann::json(nullptr);
  return j;
}

}  // namespace lesionkit
