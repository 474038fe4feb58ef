#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "urlspam/decision_tree.hpp"
#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/parallel.hpp"
#include "urlspam/random.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

/// Mean of member leaf probabilities.
inline double mean_tree_score(const std::vector<DecisionTree>& trees, std::span<const double> x) {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict_value(x);
  return s / static_cast<double>(trees.size());
}

inline void save_trees(io::Writer& w, const std::vector<DecisionTree>& trees) {
  w.line("trees", trees.size());
  for (const auto& t : trees) t.save(w);
}

inline std::vector<DecisionTree> load_trees(io::Reader& r) {
  const auto n = r.integer("trees");
  if (n < 1) throw Error(ErrorCode::ModelFormat, "ensemble without members");
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) trees.push_back(DecisionTree::load(r));
  return trees;
}

struct BaggingParams {
  int n_estimators = 140;
  bool bootstrap = true;
  double max_samples = 1.0;   // fraction of rows per member
  double max_features = 1.0;  // fraction of columns per member
  DecisionTreeParams base{Criterion::gini, std::nullopt, 2, 1};
};

struct BaggingModel {
  std::vector<DecisionTree> trees;

  double predict_score(std::span<const double> x) const { return mean_tree_score(trees, x); }
  void save(io::Writer& w) const { save_trees(w, trees); }
  static BaggingModel load(io::Reader& r) { return {load_trees(r)}; }
};

inline void validate(const BaggingParams& p) {
  if (p.n_estimators < 1) throw Error(ErrorCode::InvalidParameter, "n_estimators must be >= 1");
  if (!(p.max_samples > 0.0 && p.max_samples <= 1.0)) throw Error(ErrorCode::InvalidParameter, "max_samples must lie in (0,1]");
  if (!(p.max_features > 0.0 && p.max_features <= 1.0)) throw Error(ErrorCode::InvalidParameter, "max_features must lie in (0,1]");
}

/// Member `index` of a bagging ensemble. Its rows and columns depend only on
/// (seed, index): ceil(max_samples * n) rows drawn with replacement when
/// bootstrapping (without otherwise), ceil(max_features * d) distinct columns.
inline DecisionTree bagging_fit_member(const Matrix& x, std::span<const int> y, const BaggingParams& params,
                                       std::uint64_t seed, std::size_t index,
                                       const ColumnOrder* presorted = nullptr) {
  const std::uint64_t member_seed = derive_seed(seed, index);
  Rng rng(member_seed);
  const std::size_t n = x.rows();
  const auto n_rows = static_cast<std::size_t>(std::ceil(params.max_samples * static_cast<double>(n)));
  std::vector<std::size_t> rows;
  if (params.bootstrap) {
    rows.resize(n_rows);
    for (auto& r : rows) r = static_cast<std::size_t>(uniform_below(rng, n));
    std::sort(rows.begin(), rows.end());
  } else if (n_rows < n) {
    rows = iota_indices(n);
    shuffle(rows, rng);
    rows.resize(n_rows);
    std::sort(rows.begin(), rows.end());
  } else {
    rows = iota_indices(n);
  }

  TreeGrowOptions options;
  options.seed = derive_seed(member_seed, 1);
  options.presorted = presorted;
  const auto n_cols = static_cast<std::size_t>(std::ceil(params.max_features * static_cast<double>(x.cols())));
  if (n_cols < x.cols()) {
    auto cols = iota_indices(x.cols());
    shuffle(cols, rng);
    cols.resize(n_cols);
    std::sort(cols.begin(), cols.end());
    options.allowed_features = std::move(cols);
  }
  const auto target = labels_as_targets(y);
  return grow_tree(x, target, {}, std::move(rows), params.base, options);
}

inline BaggingModel bagging_fit(const Matrix& x, std::span<const int> y, const BaggingParams& params,
                                std::uint64_t seed) {
  require_fit_inputs(x, y);
  validate(params);
  BaggingModel model;
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));
  const ColumnOrder presorted = presort_columns(x);
  parallel_for(model.trees.size(),
               [&](std::size_t i) { model.trees[i] = bagging_fit_member(x, y, params, seed, i, &presorted); });
  return model;
}

}  // namespace urlspam
