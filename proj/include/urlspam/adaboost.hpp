#pragma once

// Real-valued (SAMME.R-style) AdaBoost over depth-1 stumps.
//
// Round t fits a stump to the current example weights; a leaf whose weighted
// positive fraction is p contributes h = 1/2 ln(p / (1 - p)), with p clipped
// to [1e-12, 1 - 1e-12]. Weights update as w_i <- w_i exp(-lr z_i h(x_i)) with
// z_i = +1 for spam and -1 otherwise, then renormalise to sum 1. The score is
// sigmoid(lr * sum_t h_t(x)).

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "urlspam/decision_tree.hpp"
#include "urlspam/error.hpp"
#include "urlspam/logistic_regression.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

inline constexpr double kProbabilityFloor = 1e-12;

inline double clip_probability(double p) { return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor); }

/// Half log-odds of a clipped probability.
inline double half_log_odds(double p) {
  p = clip_probability(p);
  return 0.5 * std::log(p / (1.0 - p));
}

struct AdaBoostParams {
  int n_estimators = 90;
  double learning_rate = 1.5;
  Criterion criterion = Criterion::gini;
};

struct AdaBoostModel {
  double learning_rate = 1.0;
  std::vector<DecisionTree> stumps;  // leaves hold weighted positive fractions

  double decision(std::span<const double> x) const {
    double f = 0.0;
    for (const auto& s : stumps) f += learning_rate * half_log_odds(s.predict_value(x));
    return f;
  }

  double predict_score(std::span<const double> x) const { return sigmoid(decision(x)); }

  void save(io::Writer& w) const {
    w.line("learning_rate", learning_rate);
    w.line("stumps", stumps.size());
    for (const auto& s : stumps) s.save(w);
  }

  static AdaBoostModel load(io::Reader& r) {
    AdaBoostModel m;
    m.learning_rate = r.real("learning_rate");
    const auto n = r.integer("stumps");
    if (n < 0) throw Error(ErrorCode::ModelFormat, "negative stump count");
    for (std::int64_t i = 0; i < n; ++i) m.stumps.push_back(DecisionTree::load(r));
    return m;
  }
};

/// Called after every round with the renormalised example weights.
using AdaBoostObserver = std::function<void(int round, std::span<const double> weights)>;

inline AdaBoostModel adaboost_fit(const Matrix& x, std::span<const int> y, const AdaBoostParams& params,
                                  std::uint64_t seed, const AdaBoostObserver& observer = {}) {
  require_fit_inputs(x, y);
  if (params.n_estimators < 0) throw Error(ErrorCode::InvalidParameter, "n_estimators must be >= 0");
  if (!(params.learning_rate > 0.0)) throw Error(ErrorCode::InvalidParameter, "learning_rate must be positive");
  if (params.criterion == Criterion::squared_error) throw Error(ErrorCode::InvalidParameter, "stumps need gini or entropy");

  const std::size_t n = x.rows();
  const auto target = labels_as_targets(y);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  const DecisionTreeParams stump{params.criterion, 1, 2, 1};

  AdaBoostModel model;
  model.learning_rate = params.learning_rate;
  const ColumnOrder presorted = presort_columns(x);
  for (int round = 0; round < params.n_estimators; ++round) {
    TreeGrowOptions options;
    options.seed = derive_seed(seed, static_cast<std::uint64_t>(round));
    options.presorted = &presorted;
    DecisionTree tree = grow_tree(x, target, weights, iota_indices(n), stump, options);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = half_log_odds(tree.predict_value(x.row(i)));
      const double z = y[i] == 1 ? 1.0 : -1.0;
      weights[i] *= std::exp(-params.learning_rate * z * h);
      total += weights[i];
    }
    for (auto& w : weights) w /= total;
    model.stumps.push_back(std::move(tree));
    if (observer) observer(round, weights);
  }
  return model;
}

}  // namespace urlspam
