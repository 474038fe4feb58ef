#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "urlspam/bagging.hpp"
#include "urlspam/decision_tree.hpp"
#include "urlspam/parallel.hpp"
#include "urlspam/random.hpp"

namespace urlspam {

struct RandomForestParams {
  int n_estimators = 20;
  Criterion criterion = Criterion::gini;
  std::optional<int> max_depth = 23;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  std::optional<std::size_t> features_per_split;  // nullopt: ceil(sqrt(d))
  bool bootstrap = true;
};

inline std::size_t default_features_per_split(std::size_t d) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
}

struct RandomForestModel {
  std::vector<DecisionTree> trees;

  double predict_score(std::span<const double> x) const { return mean_tree_score(trees, x); }
  void save(io::Writer& w) const { save_trees(w, trees); }
  static RandomForestModel load(io::Reader& r) { return {load_trees(r)}; }
};

/// Tree `index` of the forest: a bootstrap resample of n rows plus a fresh
/// random feature subset at every node, both seeded from (seed, index).
inline DecisionTree random_forest_fit_member(const Matrix& x, std::span<const int> y,
                                             const RandomForestParams& params, std::uint64_t seed,
                                             std::size_t index, const ColumnOrder* presorted = nullptr) {
  const std::uint64_t member_seed = derive_seed(seed, index);
  Rng rng(member_seed);
  const std::size_t n = x.rows();
  std::vector<std::size_t> rows;
  if (params.bootstrap) {
    rows.resize(n);
    for (auto& r : rows) r = static_cast<std::size_t>(uniform_below(rng, n));
    std::sort(rows.begin(), rows.end());
  } else {
    rows = iota_indices(n);
  }
  TreeGrowOptions options;
  options.seed = derive_seed(member_seed, 1);
  options.presorted = presorted;
  options.features_per_split = params.features_per_split.value_or(default_features_per_split(x.cols()));
  const DecisionTreeParams tree{params.criterion, params.max_depth, params.min_samples_split, params.min_samples_leaf};
  const auto target = labels_as_targets(y);
  return grow_tree(x, target, {}, std::move(rows), tree, options);
}

inline RandomForestModel random_forest_fit(const Matrix& x, std::span<const int> y,
                                           const RandomForestParams& params, std::uint64_t seed) {
  require_fit_inputs(x, y);
  if (params.n_estimators < 1) throw Error(ErrorCode::InvalidParameter, "n_estimators must be >= 1");
  if (params.features_per_split && *params.features_per_split < 1) {
    throw Error(ErrorCode::InvalidParameter, "features_per_split must be >= 1");
  }
  if (params.criterion == Criterion::squared_error) {
    throw Error(ErrorCode::InvalidParameter, "forest needs gini or entropy");
  }
  RandomForestModel model;
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));
  const ColumnOrder presorted = presort_columns(x);
  parallel_for(model.trees.size(),
               [&](std::size_t i) { model.trees[i] = random_forest_fit_member(x, y, params, seed, i, &presorted); });
  return model;
}

}  // namespace urlspam
