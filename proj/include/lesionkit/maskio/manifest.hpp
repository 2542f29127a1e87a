#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lesionkit/core/error.hpp"

namespace lesionkit::maskio {

enum class PredKind { mask, probability };

struct PredInput {
  std::string name;
  PredKind kind = PredKind::probability;
  std::filesystem::path path;
};

struct CaseEntry {
  std::string case_id;
  std::filesystem::path image;
  std::filesystem::path ref_mask;
  std::vector<PredInput> pred;
  std::optional<double> survival_months;
};

struct CohortManifest {
  std::vector<CaseEntry> cases;
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
};

inline const char* pred_kind_name(PredKind k) { return k == PredKind::mask ? "mask" : "prob"; }

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_string())
    throw FormatError(where + ": field '" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

}  // namespace detail

inline CohortManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object() || !doc.contains("cases") || !doc.at("cases").is_array())
    throw FormatError("manifest: top-level object with a 'cases' array expected");
  CohortManifest m;
  m.base_dir = base_dir;
  std::set<std::string> seen;
  for (const auto& c : doc.at("cases")) {
    if (!c.is_object()) throw FormatError("manifest: each case must be an object");
    CaseEntry e;
    e.case_id = detail::require_string(c, "case_id", "manifest case");
    if (e.case_id.empty()) throw FormatError("manifest: empty case_id");
    if (!seen.insert(e.case_id).second) throw FormatError("manifest: duplicate case_id '" + e.case_id + "'");
    const std::string where = "manifest case '" + e.case_id + "'";
    e.image = detail::require_string(c, "image", where);
    e.ref_mask = detail::require_string(c, "ref_mask", where);
    if (c.contains("pred")) {
      if (!c.at("pred").is_array()) throw FormatError(where + ": 'pred' must be an array");
      for (const auto& p : c.at("pred")) {
        PredInput in;
        in.name = detail::require_string(p, "name", where + " pred");
        const std::string kind = detail::require_string(p, "kind", where + " pred");
        if (kind == "mask") in.kind = PredKind::mask;
        else if (kind == "prob") in.kind = PredKind::probability;
        else throw FormatError(where + ": pred kind must be 'mask' or 'prob'");
        in.path = detail::require_string(p, "path", where + " pred");
        e.pred.push_back(std::move(in));
      }
    }
    if (c.contains("survival_months") && !c.at("survival_months").is_null()) {
      if (!c.at("survival_months").is_number()) throw FormatError(where + ": survival_months must be a number");
      const double months = c.at("survival_months").get<double>();
      if (!(months >= 0.0)) throw FormatError(where + ": survival_months must be >= 0");
      e.survival_months = months;
    }
    m.cases.push_back(std::move(e));
  }
  if (m.cases.empty()) throw FormatError("manifest: at least one case required");
  return m;
}

// Reads a cohort manifest. With `validate`, every referenced file must exist.
inline CohortManifest read_manifest(const std::filesystem::path& path, bool validate = false) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  CohortManifest m = parse_manifest(doc, path.parent_path());
  if (validate) {
    auto check = [&](const std::filesystem::path& p) {
      if (!std::filesystem::exists(m.resolve(p))) throw IoError("manifest references missing file " + m.resolve(p).string());
    };
    for (const auto& c : m.cases) {
      check(c.image);
      check(c.ref_mask);
      for (const auto& p : c.pred) check(p.path);
    }
  }
  return m;
}

inline nlohmann::json manifest_to_json(const CohortManifest& m) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : m.cases) {
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& p : c.pred)
      preds.push_back({{"name", p.name}, {"kind", pred_kind_name(p.kind)}, {"path", p.path.generic_string()}});
    nlohmann::json entry = {{"case_id", c.case_id},
                            {"image", c.image.generic_string()},
                            {"ref_mask", c.ref_mask.generic_string()},
                            {"pred", preds}};
    entry["survival_months"] = c.survival_months ? nlohmann::json(*c.survival_months) : nlohmann::json(nullptr);
    cases.push_back(std::move(entry));
  }
  return {{"cases", cases}};
}

inline void write_manifest(const CohortManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_to_json(m).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lesionkit::maskio
