#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lesionkit/core/parallel.hpp"
#include "lesionkit/core/random.hpp"
#include "lesionkit/learn/forest.hpp"

namespace lesionkit::learn {

inline constexpr int kDefaultFolds = 10;

struct CVResult {
  std::vector<double> fold_accuracies;
  double mean = 0.0;
  ForestParams params;
  std::uint64_t seed = 0;
};

// Each class is shuffled with its own seeded stream, then dealt round-robin
// into the folds; the dealing position carries over from one class to the
// next so fold sizes stay within one of each other. Indices in a fold are
// ascending.
inline std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& y, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k must be >= 2");
  if (static_cast<std::size_t>(k) > y.size()) throw InvalidArgument("k must not exceed the number of samples");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  std::size_t position = 0;
  std::uint64_t stream = 0;
  for (auto& [label, members] : by_class) {
    Rng rng(derive_seed(seed, stream++));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t m : members) folds[position++ % folds.size()].push_back(m);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

inline double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size() || truth.empty()) throw DimensionMismatch("accuracy: size mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

// Fold f trains a forest seeded with derive_seed(seed, f); params.seed is not
// used. Folds run in parallel, trees inside a fold serially, so the result
// does not depend on `threads`.
inline CVResult cross_validate(const Matrix& x, const std::vector<int>& y, const ForestParams& params,
                               int k = kDefaultFolds, std::uint64_t seed = 0, unsigned threads = 1) {
  params.validate();
  if (y.size() != x.rows) throw DimensionMismatch("label count does not match sample count");
  const auto folds = stratified_kfold(y, k, derive_seed(seed, 0xf01dULL));
  CVResult out;
  out.params = params;
  out.seed = seed;
  out.fold_accuracies.resize(folds.size());
  parallel_for(folds.size(), threads, [&](std::size_t f) {
    std::vector<bool> held(x.rows, false);
    for (auto i : folds[f]) held[i] = true;
    std::vector<std::size_t> train;
    std::vector<int> y_train, y_test;
    for (std::size_t i = 0; i < x.rows; ++i) {
      if (held[i]) y_test.push_back(y[i]);
      else {
        train.push_back(i);
        y_train.push_back(y[i]);
      }
    }
    ForestParams p = params;
    p.seed = derive_seed(seed, f);
    const ForestModel model = fit_forest(x.take_rows(train), y_train, p, 1);
    out.fold_accuracies[f] = accuracy(y_test, predict(model, x.take_rows(folds[f])).labels);
  });
  out.mean = pairwise_sum(out.fold_accuracies) / static_cast<double>(out.fold_accuracies.size());
  return out;
}

}  // namespace lesionkit::learn
