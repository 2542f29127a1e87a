#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lesionkit/core/random.hpp"
#include "lesionkit/learn/cv.hpp"

namespace lesionkit::learn {

struct SearchSpace {
  std::vector<int> n_trees{100, 250, 500, 1000};
  double ccp_alpha_min = 1e-4;  // log-uniform range
  double ccp_alpha_max = 5e-2;
  std::vector<int> max_features{0};  // 0 selects ceil(sqrt(p))
  std::vector<int> min_samples_split{2};
  int n_samples = 50;

  void validate() const {
    if (n_trees.empty() || max_features.empty() || min_samples_split.empty())
      throw InvalidArgument("search space has an empty choice list");
    if (!(ccp_alpha_min >= 0.0) || !(ccp_alpha_max >= ccp_alpha_min))
      throw InvalidArgument("search space ccp_alpha range is invalid");
    if (ccp_alpha_min == 0.0 && ccp_alpha_max > 0.0)
      throw InvalidArgument("log-uniform ccp_alpha range needs a positive lower bound");
    if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  }

  ForestParams sample(Rng& rng) const {
    ForestParams p;
    p.n_trees = n_trees[rng.below(n_trees.size())];
    p.ccp_alpha = ccp_alpha_min == ccp_alpha_max
                      ? ccp_alpha_min
                      : std::exp(rng.uniform(std::log(ccp_alpha_min), std::log(ccp_alpha_max)));
    p.max_features = max_features[rng.below(max_features.size())];
    p.min_samples_split = min_samples_split[rng.below(min_samples_split.size())];
    return p;
  }
};

struct SearchEntry {
  std::size_t sample_index = 0;  // position in the de-duplicated draw order
  CVResult cv;
};

// Draws `space.n_samples` combinations with replacement, drops repeats, cross-
// validates each on the same folds and ranks by mean accuracy (ties keep the
// earlier draw first).
inline std::vector<SearchEntry> random_search(const Matrix& x, const std::vector<int>& y, const SearchSpace& space,
                                              int k = kDefaultFolds, std::uint64_t seed = 0, unsigned threads = 1) {
  space.validate();
  Rng rng(derive_seed(seed, 0x5ea4c4ULL));
  std::vector<ForestParams> combos;
  for (int i = 0; i < space.n_samples; ++i) {
    ForestParams p = space.sample(rng);
    if (std::find(combos.begin(), combos.end(), p) == combos.end()) combos.push_back(p);
  }
  std::vector<SearchEntry> out;
  for (std::size_t i = 0; i < combos.size(); ++i) out.push_back({i, cross_validate(x, y, combos[i], k, seed, threads)});
  std::stable_sort(out.begin(), out.end(), [](const SearchEntry& a, const SearchEntry& b) { return a.cv.mean > b.cv.mean; });
  return out;
}

}  // namespace lesionkit::learn
