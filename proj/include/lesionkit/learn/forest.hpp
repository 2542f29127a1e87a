#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lesionkit/core/error.hpp"
#include "lesionkit/core/parallel.hpp"
#include "lesionkit/core/random.hpp"
#include "lesionkit/learn/labels.hpp"

namespace lesionkit::learn {

struct ForestParams {
  int n_trees = 1000;
  double ccp_alpha = 0.01;
  int max_features = 0;  // 0 selects ceil(sqrt(p))
  int min_samples_split = 2;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
    if (!(ccp_alpha >= 0.0) || !std::isfinite(ccp_alpha)) throw InvalidArgument("ccp_alpha must be >= 0");
    if (max_features < 0) throw InvalidArgument("max_features must be >= 0");
    if (min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
  }

  std::size_t features_per_split(std::size_t p) const {
    if (max_features > 0) return std::min<std::size_t>(static_cast<std::size_t>(max_features), p);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p)))));
  }

  bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // samples with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  std::vector<double> counts;  // class counts of the (bootstrap) samples reaching the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Majority class of a count vector; ties go to the lower class index.
inline std::size_t majority(const std::vector<double>& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = c;
  return best;
}

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const double* row) const {
    const TreeNode* n = &nodes[0];
    while (!n->is_leaf()) n = &nodes[static_cast<std::size_t>(row[n->feature] <= n->threshold ? n->left : n->right)];
    return *n;
  }
  std::size_t predict_class(const double* row) const { return majority(leaf_for(row).counts); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }
  bool operator==(const Tree&) const = default;
};

struct ForestModel {
  ForestParams params;
  std::vector<int> classes;  // ascending
  std::vector<std::string> feature_names;
  std::size_t n_features = 0;
  std::vector<Tree> trees;

  bool operator==(const ForestModel&) const = default;
};

struct Prediction {
  std::vector<int> labels;
  std::vector<std::vector<double>> vote_fractions;  // per sample, aligned with ForestModel::classes
};

inline double gini(const std::vector<double>& counts, double n) {
  if (!(n > 0.0)) return 0.0;
  double s = 0.0;
  for (double c : counts) s += (c / n) * (c / n);
  return 1.0 - s;
}

namespace detail {

struct TreeBuilder {
  const Matrix& x;
  const std::vector<std::size_t>& y;  // class indices
  std::size_t n_classes;
  std::size_t per_split;
  int min_samples_split;
  Rng& rng;
  std::vector<std::size_t> idx;
  Tree tree;

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  std::vector<double> count(std::size_t b, std::size_t e) const {
    std::vector<double> c(n_classes, 0.0);
    for (std::size_t i = b; i < e; ++i) c[y[idx[i]]] += 1.0;
    return c;
  }

  // Best threshold on one feature; false when the feature is constant here.
  bool best_on_feature(std::size_t f, std::size_t b, std::size_t e, const std::vector<double>& total, Split& best) {
    std::vector<std::pair<double, std::size_t>> v;
    v.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) v.emplace_back(x(idx[i], f), y[idx[i]]);
    std::sort(v.begin(), v.end());
    if (v.front().first == v.back().first) return false;
    const double n = static_cast<double>(v.size());
    std::vector<double> left(n_classes, 0.0);
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      left[v[k].second] += 1.0;
      if (v[k].first == v[k + 1].first) continue;
      const double nl = static_cast<double>(k + 1), nr = n - nl;
      double sl = 0.0, sr = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        sl += left[c] * left[c];
        const double r = total[c] - left[c];
        sr += r * r;
      }
      // Weighted child Gini: (nl*(1 - sl/nl²) + nr*(1 - sr/nr²)) / n
      const double impurity = (n - sl / nl - sr / nr) / n;
      if (best.feature < 0 || impurity < best.impurity) {
        double t = v[k].first + (v[k + 1].first - v[k].first) / 2.0;
        if (!(t < v[k + 1].first)) t = v[k].first;
        best = {static_cast<int>(f), t, impurity};
      }
    }
    return true;
  }

  int build(std::size_t b, std::size_t e, std::vector<std::size_t>& order) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    std::vector<double> counts = count(b, e);
    const auto nonzero = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; });
    Split best;
    if (nonzero > 1 && e - b >= static_cast<std::size_t>(min_samples_split)) {
      // Features are drawn without replacement; constant ones do not count
      // toward the per-split budget.
      std::size_t evaluated = 0;
      for (std::size_t i = 0; i < order.size() && evaluated < per_split; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
        std::swap(order[i], order[j]);
        if (best_on_feature(order[i], b, e, counts, best)) ++evaluated;
      }
    }
    if (best.feature < 0) {
      tree.nodes[static_cast<std::size_t>(id)].counts = std::move(counts);
      return id;
    }
    const auto f = static_cast<std::size_t>(best.feature);
    const auto mid = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(b),
                                           idx.begin() + static_cast<std::ptrdiff_t>(e),
                                           [&](std::size_t s) { return x(s, f) <= best.threshold; });
    const auto m = static_cast<std::size_t>(mid - idx.begin());
    const int l = build(b, m, order);
    const int r = build(m, e, order);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    node.counts = std::move(counts);
    return id;
  }
};

// Cost R(t) = (n_t / N) * Gini(t). Returns the minimal R(T_t) + alpha*|leaves|
// over subtrees of t and collapses nodes where the leaf is no worse.
inline double prune(Tree& tree, int id, double n_total, double alpha) {
  TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
  double n = 0.0;
  for (double c : node.counts) n += c;
  const double as_leaf = n / n_total * gini(node.counts, n) + alpha;
  if (node.is_leaf()) return as_leaf;
  const double l = prune(tree, node.left, n_total, alpha);
  const double r = prune(tree, tree.nodes[static_cast<std::size_t>(id)].right, n_total, alpha);
  TreeNode& again = tree.nodes[static_cast<std::size_t>(id)];
  if (as_leaf <= l + r + 1e-12) {
    again.feature = -1;
    again.threshold = 0.0;
    again.left = again.right = -1;
    return as_leaf;
  }
  return l + r;
}

// Drops nodes no longer reachable from the root; preorder numbering.
inline Tree compact(const Tree& in) {
  Tree out;
  auto copy = [&](auto&& self, int id) -> int {
    const TreeNode& src = in.nodes[static_cast<std::size_t>(id)];
    const int nid = static_cast<int>(out.nodes.size());
    out.nodes.push_back(src);
    if (!src.is_leaf()) {
      const int l = self(self, src.left);
      const int r = self(self, src.right);
      out.nodes[static_cast<std::size_t>(nid)].left = l;
      out.nodes[static_cast<std::size_t>(nid)].right = r;
    }
    return nid;
  };
  copy(copy, 0);
  return out;
}

inline void check_matrix(const Matrix& x) {
  for (double v : x.data)
    if (!std::isfinite(v)) throw InvalidArgument("feature matrix contains non-finite values");
}

}  // namespace detail

// One CART tree on the samples `rows` (duplicates allowed, as in a bootstrap).
inline Tree fit_tree(const Matrix& x, const std::vector<std::size_t>& class_index, std::size_t n_classes,
                     std::vector<std::size_t> rows, const ForestParams& params, Rng& rng) {
  detail::TreeBuilder b{x, class_index, n_classes, params.features_per_split(x.cols), params.min_samples_split,
                        rng, std::move(rows), {}};
  std::vector<std::size_t> order(x.cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  b.build(0, b.idx.size(), order);
  if (params.ccp_alpha > 0.0) {
    detail::prune(b.tree, 0, static_cast<double>(b.idx.size()), params.ccp_alpha);
    return detail::compact(b.tree);
  }
  return std::move(b.tree);
}

inline ForestModel fit_forest(const Matrix& x, const std::vector<int>& y, const ForestParams& params,
                              unsigned threads = 1, std::vector<std::string> feature_names = {}) {
  params.validate();
  if (x.rows < 2) throw InvalidArgument("fit_forest needs at least 2 samples");
  if (y.size() != x.rows) throw DimensionMismatch("label count does not match sample count");
  if (x.cols == 0) throw InvalidArgument("fit_forest needs at least one feature");
  detail::check_matrix(x);
  if (!feature_names.empty() && feature_names.size() != x.cols)
    throw DimensionMismatch("feature name count does not match feature count");

  ForestModel model;
  model.params = params;
  model.classes = y;
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  model.feature_names = std::move(feature_names);
  model.n_features = x.cols;
  std::vector<std::size_t> ci(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    ci[i] = static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), y[i]) -
                                     model.classes.begin());

  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  parallel_for(model.trees.size(), threads, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<std::size_t> rows(x.rows);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(x.rows));
    model.trees[t] = fit_tree(x, ci, model.classes.size(), std::move(rows), params, rng);
  });
  return model;
}

// Majority vote over trees; ties go to the smaller class label.
inline Prediction predict(const ForestModel& model, const Matrix& x) {
  if (x.cols != model.n_features) throw DimensionMismatch("feature count does not match the trained model");
  Prediction out;
  out.labels.resize(x.rows);
  out.vote_fractions.assign(x.rows, std::vector<double>(model.classes.size(), 0.0));
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::vector<double>& votes = out.vote_fractions[i];
    for (const Tree& t : model.trees) votes[t.predict_class(&x.data[i * x.cols])] += 1.0;
    out.labels[i] = model.classes[majority(votes)];
    for (double& v : votes) v /= static_cast<double>(model.trees.size());
  }
  return out;
}

inline constexpr const char* kForestFormat = "lesionkit-forest";
inline constexpr int kForestVersion = 1;

inline nlohmann::json params_to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"ccp_alpha", p.ccp_alpha},
          {"max_features", p.max_features},
          {"min_samples_split", p.min_samples_split},
          {"seed", p.seed}};
}

inline ForestParams params_from_json(const nlohmann::json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.ccp_alpha = j.at("ccp_alpha").get<double>();
  p.max_features = j.at("max_features").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.validate();
  return p;
}

// Trees are stored as arrays of nodes [feature, threshold, left, right, counts].
inline nlohmann::json to_json(const ForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : m.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts});
    trees.push_back(std::move(nodes));
  }
  return {{"format", kForestFormat}, {"version", kForestVersion}, {"params", params_to_json(m.params)},
          {"classes", m.classes},    {"feature_names", m.feature_names}, {"n_features", m.n_features},
          {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kForestFormat) throw FormatError("not a forest model document");
    if (j.at("version") != kForestVersion) throw FormatError("unsupported forest model version");
    ForestModel m;
    m.params = params_from_json(j.at("params"));
    m.classes = j.at("classes").get<std::vector<int>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& jt : j.at("trees")) {
      Tree t;
      for (const auto& jn : jt) {
        TreeNode n;
        n.feature = jn.at(0).get<int>();
        n.threshold = jn.at(1).get<double>();
        n.left = jn.at(2).get<int>();
        n.right = jn.at(3).get<int>();
        n.counts = jn.at(4).get<std::vector<double>>();
        t.nodes.push_back(std::move(n));
      }
      const int size = static_cast<int>(t.nodes.size());
      if (size == 0) throw FormatError("forest model: empty tree");
      for (int k = 0; k < size; ++k) {
        const TreeNode& n = t.nodes[static_cast<std::size_t>(k)];
        if (n.counts.size() != m.classes.size()) throw FormatError("forest model: class count mismatch");
        // Children always follow their parent, which rules out cycles.
        if (!n.is_leaf() && (n.left <= k || n.right <= k || n.left >= size || n.right >= size ||
                             n.feature >= static_cast<int>(m.n_features)))
          throw FormatError("forest model: bad node reference");
      }
      m.trees.push_back(std::move(t));
    }
    if (m.trees.size() != static_cast<std::size_t>(m.params.n_trees))
      throw FormatError("forest model: tree count does not match n_trees");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("forest model: ") + e.what());
  }
}

}  // namespace lesionkit::learn
