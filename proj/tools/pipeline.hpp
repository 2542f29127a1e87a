#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lesionkit/config.hpp"
#include "lesionkit/maskio/manifest.hpp"
#include "lesionkit/maskio/nrrd.hpp"
#include "lesionkit/segeval.hpp"
#include "lesionkit/segpost.hpp"

namespace lesionkit::tools {

// Averages every prediction of a case; binary masks enter as 0/1 maps.
inline ProbabilityMap case_probability(const maskio::CohortManifest& m, const maskio::CaseEntry& c) {
  if (c.pred.empty()) throw InvalidArgument("case '" + c.case_id + "' has no predictions");
  std::vector<ProbabilityMap> maps;
  for (const auto& p : c.pred) {
    if (p.kind == maskio::PredKind::probability) {
      maps.push_back(maskio::read_probability(m.resolve(p.path)));
    } else {
      const LabelMask mask = maskio::read_mask(m.resolve(p.path));
      std::vector<float> v(mask.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask[i] ? 1.0f : 0.0f;
      maps.emplace_back(mask.dims(), mask.geometry(), std::move(v));
    }
  }
  return ensemble_average(maps);
}

struct PostprocessedCase {
  LabelMask binary;
  ComponentSet components;
  std::vector<LabelMask> ranked;  // by volume, largest first
};

inline PostprocessedCase postprocess_case(const maskio::CohortManifest& m, const maskio::CaseEntry& c,
                                          const PostprocConfig& cfg) {
  PostprocessedCase out;
  out.binary = binarize(case_probability(m, c), cfg.threshold);
  out.components = connected_components(out.binary, cfg.connectivity);
  out.ranked = rank_by_volume(out.components);
  return out;
}

// The largest component, or an empty mask when nothing was segmented.
inline LabelMask largest_or_empty(const PostprocessedCase& p) {
  return p.ranked.empty() ? LabelMask(p.binary.dims(), p.binary.geometry()) : p.ranked.front();
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lesionkit::tools
