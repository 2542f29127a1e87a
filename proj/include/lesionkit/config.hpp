#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lesionkit/core/error.hpp"
#include "lesionkit/core/format.hpp"
#include "lesionkit/learn/search.hpp"
#include "lesionkit/learn/ttest.hpp"
#include "lesionkit/radiomics/extract.hpp"
#include "lesionkit/segeval.hpp"
#include "lesionkit/segpost.hpp"
#include "lesionkit/synth.hpp"

namespace lesionkit {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PostprocConfig {
  int connectivity = kDefaultConnectivity;
  double threshold = kDefaultBinarizeThreshold;
};

struct ReviewConfig {
  double min_dice = kDefaultMinReviewDice;
};

struct LearnConfig {
  learn::ForestParams forest;
  int k = learn::kDefaultFolds;
  double threshold_months = learn::kFiveYearsMonths;
  learn::TTestKind test = learn::TTestKind::welch;
  learn::SearchSpace search;
};

// Everything a run reads from the configuration file. Seed, thread count and
// output directory come from the command line only.
struct RunConfig {
  radiomics::ExtractionConfig extract;
  PostprocConfig postproc;
  ReviewConfig review;
  LearnConfig learn;
  synth::PhantomSpec phantom;

  void validate() const;
  std::string canonical() const;
  std::string hash() const { return hex64(fnv1a64(canonical())); }
};

namespace config_detail {

using Scalar = std::variant<double, std::string, bool>;

struct Value {
  std::string text;  // as written, for messages
  std::vector<Scalar> items;
  bool is_array = false;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline Scalar parse_scalar(const std::string& raw, const std::string& where) {
  const std::string t = trim(raw);
  if (t.empty()) throw ConfigError(where + ": missing value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') throw ConfigError(where + ": unterminated string");
    return t.substr(1, t.size() - 2);
  }
  if (t == "true") return true;
  if (t == "false") return false;
  double v = 0.0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError(where + ": cannot parse value '" + t + "'");
  return v;
}

// Strips a trailing comment that is not inside a string.
inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline Value parse_value(const std::string& raw, const std::string& where) {
  Value v;
  v.text = trim(raw);
  if (!v.text.empty() && v.text.front() == '[') {
    if (v.text.back() != ']') throw ConfigError(where + ": unterminated array");
    v.is_array = true;
    const std::string body = v.text.substr(1, v.text.size() - 2);
    if (!trim(body).empty()) {
      std::stringstream ss(body);
      std::string part;
      while (std::getline(ss, part, ',')) v.items.push_back(parse_scalar(part, where));
    }
  } else {
    v.items.push_back(parse_scalar(v.text, where));
  }
  return v;
}

inline double as_number(const Scalar& s, const std::string& where) {
  if (const double* d = std::get_if<double>(&s)) return *d;
  throw ConfigError(where + ": expected a number");
}

inline const Scalar& single(const Value& v, const std::string& where) {
  if (v.is_array || v.items.size() != 1) throw ConfigError(where + ": expected a single value, got '" + v.text + "'");
  return v.items[0];
}

inline double number(const Value& v, const std::string& where) { return as_number(single(v, where), where); }

inline int integer(const Value& v, const std::string& where) {
  const double d = number(v, where);
  if (d != std::floor(d) || std::abs(d) > 2e9) throw ConfigError(where + ": expected an integer");
  return static_cast<int>(d);
}

inline std::string string(const Value& v, const std::string& where) {
  const Scalar& s = single(v, where);
  if (const std::string* t = std::get_if<std::string>(&s)) return *t;
  throw ConfigError(where + ": expected a string");
}

inline std::vector<double> numbers(const Value& v, const std::string& where, std::size_t n = 0) {
  if (!v.is_array) throw ConfigError(where + ": expected an array");
  if (n && v.items.size() != n) throw ConfigError(where + ": expected " + std::to_string(n) + " values");
  std::vector<double> out;
  for (const auto& s : v.items) out.push_back(as_number(s, where));
  return out;
}

inline std::vector<int> integers(const Value& v, const std::string& where, std::size_t n = 0) {
  std::vector<int> out;
  for (double d : numbers(v, where, n)) {
    if (d != std::floor(d) || std::abs(d) > 2e9) throw ConfigError(where + ": expected integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const Value&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  using synth::Range;
  static const std::map<std::string, Setter> table = {
      {"extract.bin_width", [](RunConfig& c, const Value& v, const std::string& w) { c.extract.bin_width = number(v, w); }},
      {"extract.target_spacing_xy",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const auto xy = numbers(v, w, 2);
         c.extract.target_spacing = {xy[0], xy[1]};
       }},
      {"extract.min_slice_pixels",
       [](RunConfig& c, const Value& v, const std::string& w) { c.extract.min_slice_pixels = integer(v, w); }},
      {"extract.glcm_distance",
       [](RunConfig& c, const Value& v, const std::string& w) { c.extract.glcm_distance = integer(v, w); }},
      {"extract.delta", [](RunConfig& c, const Value& v, const std::string& w) { c.extract.delta = integer(v, w); }},
      {"extract.alpha", [](RunConfig& c, const Value& v, const std::string& w) { c.extract.alpha = number(v, w); }},
      {"extract.surface",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const std::string s = string(v, w);
         if (s == "crofton") c.extract.surface = radiomics::SurfaceMethod::crofton;
         else if (s == "faces") c.extract.surface = radiomics::SurfaceMethod::exposed_faces;
         else throw ConfigError(w + ": expected \"crofton\" or \"faces\"");
       }},
      {"postproc.connectivity",
       [](RunConfig& c, const Value& v, const std::string& w) { c.postproc.connectivity = integer(v, w); }},
      {"postproc.threshold", [](RunConfig& c, const Value& v, const std::string& w) { c.postproc.threshold = number(v, w); }},
      {"review.min_dice", [](RunConfig& c, const Value& v, const std::string& w) { c.review.min_dice = number(v, w); }},
      {"learn.n_trees", [](RunConfig& c, const Value& v, const std::string& w) { c.learn.forest.n_trees = integer(v, w); }},
      {"learn.ccp_alpha", [](RunConfig& c, const Value& v, const std::string& w) { c.learn.forest.ccp_alpha = number(v, w); }},
      {"learn.max_features",
       [](RunConfig& c, const Value& v, const std::string& w) { c.learn.forest.max_features = integer(v, w); }},
      {"learn.min_samples_split",
       [](RunConfig& c, const Value& v, const std::string& w) { c.learn.forest.min_samples_split = integer(v, w); }},
      {"learn.k", [](RunConfig& c, const Value& v, const std::string& w) { c.learn.k = integer(v, w); }},
      {"learn.threshold_months",
       [](RunConfig& c, const Value& v, const std::string& w) { c.learn.threshold_months = number(v, w); }},
      {"learn.test",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const std::string s = string(v, w);
         if (s == "welch") c.learn.test = learn::TTestKind::welch;
         else if (s == "paired") c.learn.test = learn::TTestKind::paired;
         else throw ConfigError(w + ": expected \"welch\" or \"paired\"");
       }},
      {"learn.search_samples",
       [](RunConfig& c, const Value& v, const std::string& w) { c.learn.search.n_samples = integer(v, w); }},
      {"learn.search_n_trees",
       [](RunConfig& c, const Value& v, const std::string& w) { c.learn.search.n_trees = integers(v, w); }},
      {"learn.search_ccp_alpha",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const auto r = numbers(v, w, 2);
         c.learn.search.ccp_alpha_min = r[0];
         c.learn.search.ccp_alpha_max = r[1];
       }},
      {"learn.search_max_features",
       [](RunConfig& c, const Value& v, const std::string& w) { c.learn.search.max_features = integers(v, w); }},
      {"phantom.dims",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const auto d = integers(v, w, 3);
         c.phantom.dims = {d[0], d[1], d[2]};
       }},
      {"phantom.spacing",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const auto s = numbers(v, w, 3);
         c.phantom.spacing = {s[0], s[1], s[2]};
       }},
      {"phantom.volume_cm3",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const auto r = numbers(v, w, 2);
         c.phantom.volume_cm3 = Range{r[0], r[1]};
       }},
      {"phantom.background_hu",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.background_hu = number(v, w); }},
      {"phantom.background_noise_hu",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.background_noise_hu = number(v, w); }},
      {"phantom.lesion_mean_hu",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.lesion_mean_hu = number(v, w); }},
      {"phantom.lesion_noise_hu",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.lesion_noise_hu = number(v, w); }},
      {"phantom.texture",
       [](RunConfig& c, const Value& v, const std::string& w) {
         try {
           c.phantom.texture = synth::parse_texture(string(v, w));
         } catch (const InvalidArgument& e) {
           throw ConfigError(w + ": " + e.what());
         }
       }},
      {"phantom.target_dice",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const auto r = numbers(v, w, 2);
         c.phantom.target_dice = Range{r[0], r[1]};
       }},
      {"phantom.low_dice",
       [](RunConfig& c, const Value& v, const std::string& w) {
         const auto r = numbers(v, w, 2);
         c.phantom.low_dice = Range{r[0], r[1]};
       }},
      {"phantom.fraction_below_03",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.fraction_below_03 = number(v, w); }},
      {"phantom.n_models", [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.n_models = integer(v, w); }},
      {"phantom.fp_blob_probability",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.fp_blob_probability = number(v, w); }},
      {"phantom.survival_slope",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.survival_slope = number(v, w); }},
      {"phantom.survival_noise_sd",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.survival_noise_sd = number(v, w); }},
      {"phantom.survival_base",
       [](RunConfig& c, const Value& v, const std::string& w) { c.phantom.survival_base = number(v, w); }},
  };
  return table;
}

}  // namespace config_detail

inline void RunConfig::validate() const {
  try {
    extract.validate();
    learn.forest.validate();
    learn.search.validate();
    phantom.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (postproc.connectivity != 6 && postproc.connectivity != 18 && postproc.connectivity != 26)
    throw ConfigError("postproc.connectivity must be 6, 18 or 26");
  if (!(postproc.threshold >= 0.0 && postproc.threshold < 1.0)) throw ConfigError("postproc.threshold must lie in [0,1)");
  if (!(review.min_dice >= 0.0 && review.min_dice <= 1.0)) throw ConfigError("review.min_dice must lie in [0,1]");
  if (learn.k < 2) throw ConfigError("learn.k must be >= 2");
  if (!(learn.threshold_months > 0.0)) throw ConfigError("learn.threshold_months must be > 0");
}

inline std::string RunConfig::canonical() const {
  std::string s = extract.canonical();
  auto add = [&](const std::string& key, const std::string& value) { s += ";" + key + "=" + value; };
  auto ints = [](const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
  };
  add("connectivity", std::to_string(postproc.connectivity));
  add("threshold", format_double(postproc.threshold));
  add("min_dice", format_double(review.min_dice));
  add("n_trees", std::to_string(learn.forest.n_trees));
  add("ccp_alpha", format_double(learn.forest.ccp_alpha));
  add("max_features", std::to_string(learn.forest.max_features));
  add("min_samples_split", std::to_string(learn.forest.min_samples_split));
  add("k", std::to_string(learn.k));
  add("threshold_months", format_double(learn.threshold_months));
  add("test", learn.test == learn::TTestKind::welch ? "welch" : "paired");
  add("search_samples", std::to_string(learn.search.n_samples));
  add("search_n_trees", ints(learn.search.n_trees));
  add("search_ccp_alpha", format_double(learn.search.ccp_alpha_min) + "," + format_double(learn.search.ccp_alpha_max));
  add("search_max_features", ints(learn.search.max_features));
  const auto& p = phantom;
  add("phantom_dims", std::to_string(p.dims.nx) + "," + std::to_string(p.dims.ny) + "," + std::to_string(p.dims.nz));
  add("phantom_spacing",
      format_double(p.spacing[0]) + "," + format_double(p.spacing[1]) + "," + format_double(p.spacing[2]));
  add("volume_cm3", format_double(p.volume_cm3.lo) + "," + format_double(p.volume_cm3.hi));
  add("background_hu", format_double(p.background_hu) + "," + format_double(p.background_noise_hu));
  add("lesion_hu", format_double(p.lesion_mean_hu) + "," + format_double(p.lesion_noise_hu));
  add("texture", synth::texture_name(p.texture));
  add("target_dice", format_double(p.target_dice.lo) + "," + format_double(p.target_dice.hi));
  add("low_dice", format_double(p.low_dice.lo) + "," + format_double(p.low_dice.hi));
  add("fraction_below_03", format_double(p.fraction_below_03));
  add("n_models", std::to_string(p.n_models));
  add("fp_blob_probability", format_double(p.fp_blob_probability));
  add("survival", format_double(p.survival_slope) + "," + format_double(p.survival_noise_sd) + "," +
                      (p.survival_base ? format_double(*p.survival_base) : "auto"));
  return s;
}

// TOML-style subset: [section] headers, `key = value` lines, numbers, quoted
// strings, booleans and one-line arrays; `#` starts a comment. Unknown
// sections or keys are errors.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  RunConfig cfg;
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    line = config_detail::trim(config_detail::strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = config_detail::trim(line.substr(1, line.size() - 2));
      if (section != "extract" && section != "postproc" && section != "review" && section != "learn" &&
          section != "phantom")
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = config_detail::trim(line.substr(0, eq));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside a section");
    const std::string full = section + "." + key;
    const auto& table = config_detail::setters();
    const auto it = table.find(full);
    if (it == table.end()) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(full).second) throw ConfigError(where + ": duplicate key '" + full + "'");
    it->second(cfg, config_detail::parse_value(line.substr(eq + 1), where + " (" + full + ")"),
               where + " (" + full + ")");
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace lesionkit
