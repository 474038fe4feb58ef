#pragma once

// Uniform classifier surface over every model family.
//
// Scaling policy: logistic regression, k-NN and the MLP see z-scored features
// (a Standardizer fit on the training rows travels with the model); the tree
// families and naive Bayes see raw features.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "urlspam/adaboost.hpp"
#include "urlspam/bagging.hpp"
#include "urlspam/dataset.hpp"
#include "urlspam/decision_tree.hpp"
#include "urlspam/error.hpp"
#include "urlspam/gradient_boosting.hpp"
#include "urlspam/knn.hpp"
#include "urlspam/logistic_regression.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/mlp.hpp"
#include "urlspam/naive_bayes.hpp"
#include "urlspam/parallel.hpp"
#include "urlspam/random.hpp"
#include "urlspam/random_forest.hpp"
#include "urlspam/stacking.hpp"
#include "urlspam/standardizer.hpp"

namespace urlspam {

enum class ModelFamily { logreg, knn, dtree, bnb, mnb, mlp, bagging, forest, adaboost, gboost, stacking };

struct FamilyInfo {
  ModelFamily family;
  std::string_view tag;           // CLI and file-format name
  std::string_view display_name;  // comparison-table row label
};

/// Listed in comparison-table order.
inline constexpr std::array<FamilyInfo, 11> kFamilies = {{
    {ModelFamily::logreg, "logreg", "LogisticRegression"},
    {ModelFamily::knn, "knn", "KNeighborsClassifier"},
    {ModelFamily::adaboost, "adaboost", "AdaBoostClassifier"},
    {ModelFamily::mnb, "mnb", "MultinomialNB"},
    {ModelFamily::bnb, "bnb", "BernoulliNB"},
    {ModelFamily::forest, "forest", "RandomForestClassifier"},
    {ModelFamily::gboost, "gboost", "GradientBoostingClassifier"},
    {ModelFamily::mlp, "mlp", "MLPClassifier"},
    {ModelFamily::bagging, "bagging", "BaggingClassifier"},
    {ModelFamily::stacking, "stacking", "StackingClassifier"},
    {ModelFamily::dtree, "dtree", "DecisionTreeClassifier"},
}};

inline const FamilyInfo& family_info(ModelFamily f) {
  for (const auto& info : kFamilies) {
    if (info.family == f) return info;
  }
  return kFamilies.front();
}

inline std::string_view family_tag(ModelFamily f) { return family_info(f).tag; }
inline std::string_view display_name(ModelFamily f) { return family_info(f).display_name; }

inline ModelFamily parse_family(std::string_view tag) {
  for (const auto& info : kFamilies) {
    if (info.tag == tag) return info.family;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown model family '" + std::string(tag) + "'");
}

inline bool uses_standardizer(ModelFamily f) {
  return f == ModelFamily::logreg || f == ModelFamily::knn || f == ModelFamily::mlp;
}

// ---------------------------------------------------------------------------
// Specs

struct ModelSpec {
  using Params = std::variant<LogisticRegressionParams, KnnParams, DecisionTreeParams, NaiveBayesParams, MlpParams,
                              BaggingParams, RandomForestParams, AdaBoostParams, GradientBoostingParams,
                              StackingParams>;
  Params params;

  ModelFamily family() const {
    switch (params.index()) {
      case 0: return ModelFamily::logreg;
      case 1: return ModelFamily::knn;
      case 2: return ModelFamily::dtree;
      case 3:
        return std::get<NaiveBayesParams>(params).variant == NaiveBayesVariant::bernoulli ? ModelFamily::bnb
                                                                                          : ModelFamily::mnb;
      case 4: return ModelFamily::mlp;
      case 5: return ModelFamily::bagging;
      case 6: return ModelFamily::forest;
      case 7: return ModelFamily::adaboost;
      case 8: return ModelFamily::gboost;
      default: return ModelFamily::stacking;
    }
  }

  /// Defaults: the tuned hyperparameters reported for each family.
  static ModelSpec defaults(ModelFamily f);
};

inline StackingParams default_stacking_params() {
  StackingParams p;
  p.base_models = {ModelSpec::defaults(ModelFamily::bagging), ModelSpec::defaults(ModelFamily::forest),
                   ModelSpec::defaults(ModelFamily::dtree), ModelSpec::defaults(ModelFamily::gboost)};
  return p;
}

inline ModelSpec ModelSpec::defaults(ModelFamily f) {
  switch (f) {
    case ModelFamily::logreg: return {LogisticRegressionParams{}};
    case ModelFamily::knn: return {KnnParams{}};
    case ModelFamily::dtree: return {DecisionTreeParams{}};
    case ModelFamily::bnb: return {NaiveBayesParams::bernoulli()};
    case ModelFamily::mnb: return {NaiveBayesParams::multinomial()};
    case ModelFamily::mlp: return {MlpParams{}};
    case ModelFamily::bagging: return {BaggingParams{}};
    case ModelFamily::forest: return {RandomForestParams{}};
    case ModelFamily::adaboost: return {AdaBoostParams{}};
    case ModelFamily::gboost: return {GradientBoostingParams{}};
    case ModelFamily::stacking: return {default_stacking_params()};
  }
  throw Error(ErrorCode::InvalidParameter, "unknown family");
}

// ---------------------------------------------------------------------------
// Trained models

class Model {
 public:
  using Impl = std::variant<LogisticRegressionModel, KnnModel, DecisionTree, NaiveBayesModel, MlpModel, BaggingModel,
                            RandomForestModel, AdaBoostModel, GradientBoostingModel, StackingModel>;

  Model() = default;
  Model(ModelFamily family, std::optional<Standardizer> scaler, Impl impl)
      : family_(family), scaler_(std::move(scaler)), impl_(std::move(impl)) {}

  ModelFamily family() const noexcept { return family_; }
  const std::optional<Standardizer>& scaler() const noexcept { return scaler_; }
  const Impl& impl() const noexcept { return impl_; }

  /// Scores are monotone in spam confidence and lie in [0, 1].
  double predict_score(std::span<const double> raw) const {
    if (scaler_) {
      const auto scaled = scaler_->transform_row(raw);
      return score_scaled(scaled);
    }
    return score_scaled(raw);
  }

  /// Label 1 exactly when the score reaches threshold().
  double threshold() const {
    if (const auto* knn = std::get_if<KnnModel>(&impl_)) return knn->threshold();
    return 0.5;
  }

  int predict_label(std::span<const double> raw) const { return predict_score(raw) >= threshold() ? 1 : 0; }

  std::vector<double> predict_scores(const Matrix& x) const {
    std::vector<double> out(x.rows());
    parallel_for(x.rows(), [&](std::size_t i) { out[i] = predict_score(x.row(i)); });
    return out;
  }

  std::vector<int> predict_labels(const Matrix& x) const {
    const auto scores = predict_scores(x);
    const double t = threshold();
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= t ? 1 : 0;
    return out;
  }

 private:
  double score_scaled(std::span<const double> x) const;

  ModelFamily family_ = ModelFamily::logreg;
  std::optional<Standardizer> scaler_;
  Impl impl_;
};

inline double stacking_score(const StackingModel& m, std::span<const double> raw) {
  std::vector<double> meta_row(m.bases.size());
  for (std::size_t b = 0; b < m.bases.size(); ++b) meta_row[b] = m.bases[b].predict_score(raw);
  return m.meta.predict_score(meta_row);
}

inline double Model::score_scaled(std::span<const double> x) const {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, StackingModel>) {
          return stacking_score(m, x);
        } else {
          return m.predict_score(x);
        }
      },
      impl_);
}

// ---------------------------------------------------------------------------
// Fitting

inline Model fit_model(const ModelSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed);

namespace detail {

template <class>
inline constexpr bool always_false = false;

inline StackingModel stacking_fit_impl(const Matrix& x, std::span<const int> y, const StackingParams& params,
                                       std::uint64_t seed) {
  if (params.base_models.empty()) throw Error(ErrorCode::InvalidParameter, "stacking needs base models");
  const std::size_t n = x.rows();
  const std::size_t bases = params.base_models.size();
  const auto k = static_cast<std::size_t>(params.internal_cv_k);
  const FoldPlan plan = stratified_kfold(y, params.internal_cv_k, derive_seed(seed, {0x57ac, 0}));

  Matrix oof(n, bases);
  parallel_for(bases * k, [&](std::size_t job) {
    const std::size_t b = job / k;
    const int fold = static_cast<int>(job % k);
    const auto train = plan.train_indices(fold);
    const auto test = plan.test_indices(fold);
    const Model m = fit_model(params.base_models[b], x.select_rows(train), select(y, std::span<const std::size_t>(train)),
                              derive_seed(seed, {b, static_cast<std::uint64_t>(fold) + 1}));
    for (auto i : test) oof(i, b) = m.predict_score(x.row(i));
  });

  std::vector<std::size_t> kept;
  for (std::size_t b = 0; b < bases; ++b) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](std::size_t c) {
      for (std::size_t i = 0; i < n; ++i) {
        if (oof(i, b) != oof(i, c)) return false;
      }
      return true;
    });
    if (!duplicate) kept.push_back(b);
  }

  Matrix meta_x(n, kept.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < kept.size(); ++c) meta_x(i, c) = oof(i, kept[c]);
  }
  StackingModel model;
  model.meta = logreg_fit(meta_x, y, params.final_model);
  model.bases.resize(kept.size());
  parallel_for(kept.size(), [&](std::size_t c) {
    model.bases[c] = fit_model(params.base_models[kept[c]], x, y, derive_seed(seed, {kept[c], 0}));
  });
  return model;
}

}  // namespace detail

inline StackingModel stacking_fit(const Matrix& x, std::span<const int> y, const StackingParams& params,
                                  std::uint64_t seed) {
  require_fit_inputs(x, y);
  return detail::stacking_fit_impl(x, y, params, seed);
}

/// Fits one model. Deterministic in (spec, data, seed).
inline Model fit_model(const ModelSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed) {
  require_fit_inputs(x, y);
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == y.size()) {
    throw Error(ErrorCode::SingleClassTruth, "training data must contain both classes");
  }
  const ModelFamily family = spec.family();
  std::optional<Standardizer> scaler;
  Matrix scaled;
  if (uses_standardizer(family)) {
    scaler = Standardizer::fit(x);
    scaled = scaler->transform(x);
  }
  const Matrix& input = scaler ? scaled : x;

  Model::Impl impl = std::visit(
      [&](const auto& p) -> Model::Impl {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogisticRegressionParams>) {
          return logreg_fit(input, y, p, seed);
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          return knn_fit(input, y, p);
        } else if constexpr (std::is_same_v<P, DecisionTreeParams>) {
          return dtree_fit(input, y, p, seed);
        } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          return naive_bayes_fit(input, y, p);
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          return mlp_fit(input, y, p, seed);
        } else if constexpr (std::is_same_v<P, BaggingParams>) {
          return bagging_fit(input, y, p, seed);
        } else if constexpr (std::is_same_v<P, RandomForestParams>) {
          return random_forest_fit(input, y, p, seed);
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          return adaboost_fit(input, y, p, seed);
        } else if constexpr (std::is_same_v<P, GradientBoostingParams>) {
          return gradient_boost_fit(input, y, p, seed);
        } else if constexpr (std::is_same_v<P, StackingParams>) {
          return detail::stacking_fit_impl(input, y, p, seed);
        } else {
          static_assert(detail::always_false<P>);
        }
      },
      spec.params);
  return Model(family, std::move(scaler), std::move(impl));
}

inline Model fit_model(const ModelSpec& spec, const Dataset& data, std::uint64_t seed) {
  return fit_model(spec, data.features(), data.labels(), seed);
}

}  // namespace urlspam
