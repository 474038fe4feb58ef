#pragma once

// Gradient boosting on the binomial deviance.
//
// F_0 = ln(p / (1 - p)) for the training base rate p. Each round fits a
// squared-error regression tree to the residuals y - sigmoid(F), resets every
// leaf to the one-step Newton value sum(y - p) / max(sum p(1 - p), 1e-12) over
// its in-bag rows, and adds learning_rate times the tree to F.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "urlspam/adaboost.hpp"
#include "urlspam/decision_tree.hpp"
#include "urlspam/error.hpp"
#include "urlspam/logistic_regression.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/random.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

struct GradientBoostingParams {
  int n_estimators = 110;
  double learning_rate = 0.3;
  int max_depth = 9;
  double subsample = 1.0;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
};

struct GradientBoostingModel {
  double init_score = 0.0;
  double learning_rate = 0.1;
  std::vector<DecisionTree> trees;

  double decision(std::span<const double> x) const {
    double f = init_score;
    for (const auto& t : trees) f += learning_rate * t.predict_value(x);
    return f;
  }

  double predict_score(std::span<const double> x) const { return sigmoid(decision(x)); }

  void save(io::Writer& w) const {
    w.line("init_score", init_score);
    w.line("learning_rate", learning_rate);
    w.line("rounds", trees.size());
    for (const auto& t : trees) t.save(w);
  }

  static GradientBoostingModel load(io::Reader& r) {
    GradientBoostingModel m;
    m.init_score = r.real("init_score");
    m.learning_rate = r.real("learning_rate");
    const auto n = r.integer("rounds");
    if (n < 0) throw Error(ErrorCode::ModelFormat, "negative round count");
    for (std::int64_t i = 0; i < n; ++i) m.trees.push_back(DecisionTree::load(r));
    return m;
  }
};

/// Mean binomial deviance -2/n sum [y ln p + (1 - y) ln(1 - p)] at log-odds f.
inline double binomial_deviance(std::span<const double> f, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += softplus(f[i]) - static_cast<double>(y[i]) * f[i];
  return 2.0 * s / static_cast<double>(f.size());
}

inline GradientBoostingModel gradient_boost_fit(const Matrix& x, std::span<const int> y,
                                                const GradientBoostingParams& params, std::uint64_t seed,
                                                std::vector<double>* deviance_history = nullptr) {
  require_fit_inputs(x, y);
  if (params.n_estimators < 0) throw Error(ErrorCode::InvalidParameter, "n_estimators must be >= 0");
  if (!(params.learning_rate > 0.0)) throw Error(ErrorCode::InvalidParameter, "learning_rate must be positive");
  if (!(params.subsample > 0.0 && params.subsample <= 1.0)) throw Error(ErrorCode::InvalidParameter, "subsample must lie in (0,1]");
  if (params.max_depth < 1) throw Error(ErrorCode::InvalidParameter, "max_depth must be >= 1");

  const std::size_t n = x.rows();
  const double base_rate = clip_probability(static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(n));

  GradientBoostingModel model;
  model.init_score = std::log(base_rate / (1.0 - base_rate));
  model.learning_rate = params.learning_rate;

  std::vector<double> f(n, model.init_score);
  std::vector<double> residual(n), prob(n);
  if (deviance_history) deviance_history->assign(1, binomial_deviance(f, y));
  const DecisionTreeParams tree_params{Criterion::squared_error, params.max_depth, params.min_samples_split,
                                       params.min_samples_leaf};
  const auto in_bag_count = std::max<std::size_t>(1, static_cast<std::size_t>(params.subsample * static_cast<double>(n)));

  const ColumnOrder presorted = presort_columns(x);
  for (int round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(f[i]);
      residual[i] = static_cast<double>(y[i]) - prob[i];
    }
    std::vector<std::size_t> rows = iota_indices(n);
    const std::uint64_t round_seed = derive_seed(seed, static_cast<std::uint64_t>(round));
    if (in_bag_count < n) {
      Rng rng(round_seed);
      shuffle(rows, rng);
      rows.resize(in_bag_count);
      std::sort(rows.begin(), rows.end());
    }
    TreeGrowOptions options;
    options.seed = derive_seed(round_seed, 1);
    options.presorted = &presorted;
    DecisionTree tree = grow_tree(x, residual, {}, rows, tree_params, options);

    std::vector<double> num(tree.nodes().size(), 0.0), den(tree.nodes().size(), 0.0);
    for (auto i : rows) {
      const auto leaf = tree.leaf_index(x.row(i));
      num[leaf] += residual[i];
      den[leaf] += prob[i] * (1.0 - prob[i]);
    }
    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
      if (tree.nodes()[id].is_leaf()) tree.set_leaf_value(id, num[id] / std::max(den[id], 1e-12));
    }
    for (std::size_t i = 0; i < n; ++i) f[i] += params.learning_rate * tree.predict_value(x.row(i));
    model.trees.push_back(std::move(tree));
    if (deviance_history) deviance_history->push_back(binomial_deviance(f, y));
  }
  return model;
}

}  // namespace urlspam
