#pragma once

// Random-search tuning. A search space is an ordered list of named
// distributions; trial t draws every parameter from its own generator seeded
// by (seed, t), so adding trials never changes earlier ones.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "urlspam/csv.hpp"
#include "urlspam/dataset.hpp"
#include "urlspam/error.hpp"
#include "urlspam/evaluation.hpp"
#include "urlspam/model.hpp"
#include "urlspam/parallel.hpp"
#include "urlspam/random.hpp"

namespace urlspam {

using ParamValue = std::variant<std::int64_t, double, std::string>;
using ParamSet = std::vector<std::pair<std::string, ParamValue>>;

inline std::string to_string(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) return csv::format_double(*d);
  return std::get<std::string>(v);
}

/// "k1=v1;k2=v2" in space order.
inline std::string to_string(const ParamSet& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ';';
    out += k + "=" + to_string(v);
  }
  return out;
}

/// Integer if the text is one, else a real, else the text itself.
inline ParamValue parse_param_value(std::string_view text) {
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (ec == std::errc() && p == text.data() + text.size()) return i;
  double d = 0.0;
  auto [q, ec2] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec2 == std::errc() && q == text.data() + text.size()) return d;
  return std::string(text);
}

// ---------------------------------------------------------------------------
// Distributions

struct Choice {
  std::vector<ParamValue> options;
};

/// lo, lo + step, ..., up to hi inclusive.
struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t step = 1;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// exp(U(ln lo, ln hi)).
struct LogUniform {
  double lo = 1.0;
  double hi = 1.0;
};

using Distribution = std::variant<Choice, IntRange, Uniform, LogUniform>;

struct ParamDistribution {
  std::string name;
  Distribution distribution;
};

struct SearchSpace {
  std::vector<ParamDistribution> params;
};

inline void validate(const SearchSpace& space) {
  if (space.params.empty()) throw Error(ErrorCode::EmptySpace, "search space has no parameters");
  for (const auto& p : space.params) {
    const bool ok = std::visit(
        [](const auto& d) {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, Choice>) return !d.options.empty();
          if constexpr (std::is_same_v<D, IntRange>) return d.step >= 1 && d.lo <= d.hi;
          if constexpr (std::is_same_v<D, Uniform>) return d.lo <= d.hi;
          if constexpr (std::is_same_v<D, LogUniform>) return d.lo > 0.0 && d.lo <= d.hi;
        },
        p.distribution);
    if (!ok) throw Error(ErrorCode::EmptySpace, "parameter '" + p.name + "' has an empty range");
  }
}

inline ParamValue draw(const Distribution& dist, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> ParamValue {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Choice>) {
          return d.options[uniform_below(rng, d.options.size())];
        } else if constexpr (std::is_same_v<D, IntRange>) {
          const auto count = static_cast<std::uint64_t>((d.hi - d.lo) / d.step) + 1;
          return d.lo + static_cast<std::int64_t>(uniform_below(rng, count)) * d.step;
        } else if constexpr (std::is_same_v<D, Uniform>) {
          return d.lo + (d.hi - d.lo) * uniform01(rng);
        } else {
          return std::exp(std::log(d.lo) + (std::log(d.hi) - std::log(d.lo)) * uniform01(rng));
        }
      },
      dist);
}

inline ParamSet sample_params(const SearchSpace& space, std::uint64_t seed, std::uint64_t trial_index) {
  validate(space);
  ParamSet out;
  out.reserve(space.params.size());
  for (std::size_t j = 0; j < space.params.size(); ++j) {
    Rng rng(derive_seed(seed, {0x7e, trial_index, j}));
    out.emplace_back(space.params[j].name, draw(space.params[j].distribution, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Applying parameters to specs

namespace detail {

inline std::int64_t as_int(const std::string& name, const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
  throw Error(ErrorCode::InvalidParameter, name + " expects an integer, got '" + to_string(v) + "'");
}

inline double as_real(const std::string& name, const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw Error(ErrorCode::InvalidParameter, name + " expects a number, got '" + to_string(v) + "'");
}

inline int as_small_int(const std::string& name, const ParamValue& v) {
  const auto i = as_int(name, v);
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    throw Error(ErrorCode::InvalidParameter, name + " is out of range");
  }
  return static_cast<int>(i);
}

inline bool as_bool(const std::string& name, const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    if (*s == "true") return true;
    if (*s == "false") return false;
  }
  const auto i = as_int(name, v);
  if (i != 0 && i != 1) throw Error(ErrorCode::InvalidParameter, name + " expects 0/1 or true/false");
  return i == 1;
}

inline Criterion as_criterion(const std::string& name, const ParamValue& v) {
  const auto* s = std::get_if<std::string>(&v);
  if (!s) throw Error(ErrorCode::InvalidParameter, name + " expects gini or entropy");
  return parse_criterion(*s);
}

/// 0 or "none" means unlimited.
inline std::optional<int> as_depth(const std::string& name, const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v); s && *s == "none") return std::nullopt;
  const int d = as_small_int(name, v);
  if (d == 0) return std::nullopt;
  if (d < 0) throw Error(ErrorCode::InvalidParameter, name + " must be >= 1");
  return d;
}

/// "14,9" or "14x9".
inline std::vector<int> as_layers(const std::string& name, const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return {static_cast<int>(*i)};
  const auto* s = std::get_if<std::string>(&v);
  if (!s) throw Error(ErrorCode::InvalidParameter, name + " expects a layer list such as 14,9");
  std::vector<int> out;
  std::string_view rest = *s;
  while (!rest.empty()) {
    const auto cut = rest.find_first_of(",x");
    const auto part = rest.substr(0, cut);
    int width = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), width);
    if (ec != std::errc() || p != part.data() + part.size() || width < 1) {
      throw Error(ErrorCode::InvalidParameter, name + " has a bad layer width in '" + *s + "'");
    }
    out.push_back(width);
    rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidParameter, name + " is empty");
  return out;
}

[[noreturn]] inline void unknown_param(ModelFamily f, const std::string& name) {
  throw Error(ErrorCode::InvalidParameter,
              "unknown parameter '" + name + "' for " + std::string(family_tag(f)));
}

inline void apply_one(ModelFamily family, ModelSpec::Params& params, const std::string& k, const ParamValue& v) {
  std::visit(
      [&](auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogisticRegressionParams>) {
          if (k == "C") p.C = as_real(k, v);
          else if (k == "max_iter") p.max_iter = as_small_int(k, v);
          else if (k == "tol") p.tol = as_real(k, v);
          else if (k == "fit_intercept") p.fit_intercept = as_bool(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          if (k == "n_neighbors") p.n_neighbors = as_small_int(k, v);
          else if (k == "p") p.minkowski_p = as_real(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, DecisionTreeParams>) {
          if (k == "criterion") p.criterion = as_criterion(k, v);
          else if (k == "max_depth") p.max_depth = as_depth(k, v);
          else if (k == "min_samples_split") p.min_samples_split = as_small_int(k, v);
          else if (k == "min_samples_leaf") p.min_samples_leaf = as_small_int(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          if (k == "alpha") p.alpha = as_real(k, v);
          else if (k == "binarize" && p.variant == NaiveBayesVariant::bernoulli) p.binarize_threshold = as_real(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          if (k == "hidden_layer_sizes") p.hidden_layer_sizes = as_layers(k, v);
          else if (k == "alpha") p.l2_alpha = as_real(k, v);
          else if (k == "learning_rate_init") p.learning_rate_init = as_real(k, v);
          else if (k == "adaptive") p.adaptive_rate = as_bool(k, v);
          else if (k == "max_iter") p.max_iter = as_small_int(k, v);
          else if (k == "tol") p.tol = as_real(k, v);
          else if (k == "n_iter_no_change") p.n_iter_no_change = as_small_int(k, v);
          else if (k == "batch_size") p.batch_size = as_small_int(k, v);
          else if (k == "beta_1") p.beta_1 = as_real(k, v);
          else if (k == "beta_2") p.beta_2 = as_real(k, v);
          else if (k == "epsilon") p.epsilon = as_real(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, BaggingParams>) {
          if (k == "n_estimators") p.n_estimators = as_small_int(k, v);
          else if (k == "bootstrap") p.bootstrap = as_bool(k, v);
          else if (k == "max_samples") p.max_samples = as_real(k, v);
          else if (k == "max_features") p.max_features = as_real(k, v);
          else if (k == "criterion") p.base.criterion = as_criterion(k, v);
          else if (k == "max_depth") p.base.max_depth = as_depth(k, v);
          else if (k == "min_samples_split") p.base.min_samples_split = as_small_int(k, v);
          else if (k == "min_samples_leaf") p.base.min_samples_leaf = as_small_int(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, RandomForestParams>) {
          if (k == "n_estimators") p.n_estimators = as_small_int(k, v);
          else if (k == "criterion") p.criterion = as_criterion(k, v);
          else if (k == "max_depth") p.max_depth = as_depth(k, v);
          else if (k == "min_samples_split") p.min_samples_split = as_small_int(k, v);
          else if (k == "min_samples_leaf") p.min_samples_leaf = as_small_int(k, v);
          else if (k == "bootstrap") p.bootstrap = as_bool(k, v);
          else if (k == "max_features") {
            const auto n = as_int(k, v);
            if (n < 1) throw Error(ErrorCode::InvalidParameter, "max_features must be >= 1");
            p.features_per_split = static_cast<std::size_t>(n);
          } else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          if (k == "n_estimators") p.n_estimators = as_small_int(k, v);
          else if (k == "learning_rate") p.learning_rate = as_real(k, v);
          else if (k == "criterion") p.criterion = as_criterion(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, GradientBoostingParams>) {
          if (k == "n_estimators") p.n_estimators = as_small_int(k, v);
          else if (k == "learning_rate") p.learning_rate = as_real(k, v);
          else if (k == "max_depth") p.max_depth = as_small_int(k, v);
          else if (k == "subsample") p.subsample = as_real(k, v);
          else if (k == "min_samples_split") p.min_samples_split = as_small_int(k, v);
          else if (k == "min_samples_leaf") p.min_samples_leaf = as_small_int(k, v);
          else unknown_param(family, k);
        } else if constexpr (std::is_same_v<P, StackingParams>) {
          if (k == "internal_cv_k") p.internal_cv_k = as_small_int(k, v);
          else if (k == "C") p.final_model.C = as_real(k, v);
          else unknown_param(family, k);
        }
      },
      params);
}

}  // namespace detail

inline ModelSpec apply_params(ModelSpec spec, const ParamSet& params) {
  const ModelFamily family = spec.family();
  for (const auto& [k, v] : params) detail::apply_one(family, spec.params, k, v);
  return spec;
}

/// Centered on the tuned values each family ships with.
inline SearchSpace default_search_space(ModelFamily f) {
  using V = ParamValue;
  const auto ints = [](std::initializer_list<std::int64_t> xs) {
    Choice c;
    for (auto x : xs) c.options.emplace_back(x);
    return c;
  };
  const Choice criteria{{V(std::string("gini")), V(std::string("entropy"))}};
  switch (f) {
    case ModelFamily::logreg:
      return {{{"C", LogUniform{1e-2, 1e3}}, {"max_iter", ints({100, 140, 200})}}};
    case ModelFamily::knn:
      return {{{"n_neighbors", ints({1, 3, 5, 7, 9})}, {"p", Choice{{V(1.0), V(2.0)}}}}};
    case ModelFamily::dtree:
      return {{{"criterion", criteria}, {"max_depth", IntRange{4, 30, 1}}, {"min_samples_leaf", IntRange{1, 5, 1}}}};
    case ModelFamily::bnb:
      return {{{"alpha", LogUniform{0.1, 100.0}}}};
    case ModelFamily::mnb:
      return {{{"alpha", LogUniform{0.01, 10.0}}}};
    case ModelFamily::mlp:
      return {{{"hidden_layer_sizes", Choice{{V(std::string("14,9")), V(std::string("16,8")), V(std::string("32,16")),
                                                V(std::string("10"))}}},
               {"alpha", LogUniform{1e-4, 1.0}},
               {"learning_rate_init", LogUniform{1e-4, 1e-2}}}};
    case ModelFamily::bagging:
      return {{{"n_estimators", IntRange{20, 200, 20}},
               {"max_samples", Uniform{0.5, 1.0}},
               {"max_features", Uniform{0.5, 1.0}}}};
    case ModelFamily::forest:
      return {{{"n_estimators", IntRange{10, 100, 10}}, {"max_depth", IntRange{10, 30, 1}}, {"criterion", criteria}}};
    case ModelFamily::adaboost:
      return {{{"n_estimators", IntRange{30, 150, 10}}, {"learning_rate", LogUniform{0.1, 2.0}}}};
    case ModelFamily::gboost:
      return {{{"n_estimators", IntRange{50, 150, 10}},
               {"learning_rate", LogUniform{0.05, 0.5}},
               {"max_depth", IntRange{3, 10, 1}}}};
    case ModelFamily::stacking:
      return {{{"internal_cv_k", ints({3, 5})}, {"C", LogUniform{0.1, 10.0}}}};
  }
  throw Error(ErrorCode::InvalidParameter, "unknown family");
}

// ---------------------------------------------------------------------------
// Search

struct TrialResult {
  std::size_t trial_index = 0;
  ParamSet params;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  std::optional<std::string> error;  // set when the trial failed to fit

  bool ok() const noexcept { return !error.has_value(); }
};

struct SearchResult {
  std::vector<TrialResult> trials;  // ordered by trial index
  std::optional<std::size_t> best;  // index into trials; empty if every trial failed

  const TrialResult& best_trial() const {
    if (!best) throw Error(ErrorCode::InvalidParameter, "every trial failed");
    return trials[*best];
  }
};

/// Every trial is scored on the same fold plan. Best is the highest mean
/// accuracy; the lowest trial index wins ties.
inline SearchResult random_search(const Matrix& x, std::span<const int> y, const ModelSpec& base,
                                  const SearchSpace& space, std::size_t n_trials, int k, std::uint64_t seed) {
  if (n_trials < 1) throw Error(ErrorCode::InvalidParameter, "n_trials must be >= 1");
  validate(space);
  const FoldPlan plan = cv_fold_plan(y, k, seed);
  SearchResult result;
  result.trials.resize(n_trials);
  parallel_for(n_trials, [&](std::size_t t) {
    TrialResult& trial = result.trials[t];
    trial.trial_index = t;
    trial.params = sample_params(space, seed, t);
    try {
      const ModelSpec spec = apply_params(base, trial.params);
      const auto cv = cross_validate(x, y, spec, plan, derive_seed(seed, {0x71, t}));
      trial.fold_accuracy = cv.fold_accuracy;
      trial.mean_accuracy = cv.mean_accuracy;
    } catch (const std::exception& e) {
      trial.error = e.what();
    }
  });
  for (std::size_t t = 0; t < n_trials; ++t) {
    if (!result.trials[t].ok()) continue;
    if (!result.best || result.trials[t].mean_accuracy > result.trials[*result.best].mean_accuracy) result.best = t;
  }
  return result;
}

inline SearchResult random_search(const Dataset& data, ModelFamily family, const SearchSpace& space,
                                  std::size_t n_trials, int k, std::uint64_t seed) {
  return random_search(data.features(), data.labels(), ModelSpec::defaults(family), space, n_trials, k, seed);
}

/// trial_index, params, fold_1..fold_k, mean, error
inline void write_trial_log(std::ostream& out, const SearchResult& result, int k) {
  csv::Row header{"trial_index", "params"};
  for (int f = 1; f <= k; ++f) header.push_back("fold_" + std::to_string(f));
  header.push_back("mean");
  header.push_back("error");
  csv::write_row(out, header);
  for (const auto& t : result.trials) {
    csv::Row row{std::to_string(t.trial_index), to_string(t.params)};
    for (int f = 0; f < k; ++f) {
      row.push_back(t.ok() && static_cast<std::size_t>(f) < t.fold_accuracy.size()
                        ? csv::format_double(t.fold_accuracy[static_cast<std::size_t>(f)])
                        : "");
    }
    row.push_back(t.ok() ? csv::format_double(t.mean_accuracy) : "");
    row.push_back(t.error.value_or(""));
    csv::write_row(out, row);
  }
}

}  // namespace urlspam
