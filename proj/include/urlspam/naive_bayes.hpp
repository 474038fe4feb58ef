#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

enum class NaiveBayesVariant { bernoulli, multinomial };

struct NaiveBayesParams {
  NaiveBayesVariant variant = NaiveBayesVariant::bernoulli;
  double alpha = 10.0;
  double binarize_threshold = 0.0;  // bernoulli only: x > threshold counts as present

  static NaiveBayesParams bernoulli() { return {NaiveBayesVariant::bernoulli, 10.0, 0.0}; }
  static NaiveBayesParams multinomial() { return {NaiveBayesVariant::multinomial, 1.0, 0.0}; }
};

/// Two-class naive Bayes with Laplace smoothing, scored in log space.
///
/// Bernoulli: P(x_j present | c) = (n_cj + alpha) / (n_c + 2 alpha); both the
/// presence and the absence of every feature contribute.
/// Multinomial: theta_cj = (S_cj + alpha) / (S_c + alpha d) where S_cj sums
/// feature j over class c; a row contributes sum_j x_j log theta_cj.
/// Class priors are the empirical class frequencies.
struct NaiveBayesModel {
  NaiveBayesParams params;
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_prob;      // log P(present) or log theta
  std::array<std::vector<double>, 2> log_absent;    // bernoulli: log(1 - P(present))

  std::array<double, 2> joint_log_likelihood(std::span<const double> x) const {
    std::array<double, 2> jll = log_prior;
    for (int c = 0; c < 2; ++c) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (params.variant == NaiveBayesVariant::bernoulli) {
          jll[c] += x[j] > params.binarize_threshold ? log_prob[c][j] : log_absent[c][j];
        } else {
          jll[c] += x[j] * log_prob[c][j];
        }
      }
    }
    return jll;
  }

  /// Posterior P(spam | x) via log-sum-exp.
  double predict_score(std::span<const double> x) const {
    const auto jll = joint_log_likelihood(x);
    const double top = std::max(jll[0], jll[1]);
    const double e0 = std::exp(jll[0] - top), e1 = std::exp(jll[1] - top);
    return e1 / (e0 + e1);
  }

  void save(io::Writer& w) const {
    w.line("variant", params.variant == NaiveBayesVariant::bernoulli ? "bernoulli" : "multinomial");
    w.line("alpha", params.alpha);
    w.line("binarize", params.binarize_threshold);
    w.line("log_prior", log_prior[0], log_prior[1]);
    for (int c = 0; c < 2; ++c) {
      w.doubles("log_prob", log_prob[c]);
      w.doubles("log_absent", log_absent[c]);
    }
  }

  static NaiveBayesModel load(io::Reader& r) {
    NaiveBayesModel m;
    const auto variant = r.word("variant");
    if (variant == "bernoulli") {
      m.params.variant = NaiveBayesVariant::bernoulli;
    } else if (variant == "multinomial") {
      m.params.variant = NaiveBayesVariant::multinomial;
    } else {
      throw Error(ErrorCode::ModelFormat, "unknown naive Bayes variant " + variant);
    }
    m.params.alpha = r.real("alpha");
    m.params.binarize_threshold = r.real("binarize");
    const auto prior = r.expect("log_prior", 2);
    m.log_prior = {io::parse_double(prior[0]), io::parse_double(prior[1])};
    for (int c = 0; c < 2; ++c) {
      m.log_prob[c] = r.doubles("log_prob");
      m.log_absent[c] = r.doubles("log_absent");
    }
    return m;
  }
};

inline NaiveBayesModel naive_bayes_fit(const Matrix& x, std::span<const int> y, const NaiveBayesParams& params) {
  require_fit_inputs(x, y);
  if (!(params.alpha > 0.0)) throw Error(ErrorCode::InvalidParameter, "alpha must be positive");
  const std::size_t d = x.cols();
  const bool bernoulli = params.variant == NaiveBayesVariant::bernoulli;
  if (!bernoulli) {
    for (double v : x.data()) {
      if (v < 0.0) throw Error(ErrorCode::NegativeFeature, "multinomial naive Bayes needs non-negative features");
    }
  }

  std::array<double, 2> class_count{};
  std::array<std::vector<double>, 2> feature_sum;
  for (auto& s : feature_sum) s.assign(d, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int c = y[i];
    class_count[c] += 1.0;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      feature_sum[c][j] += bernoulli ? (row[j] > params.binarize_threshold ? 1.0 : 0.0) : row[j];
    }
  }

  NaiveBayesModel m;
  m.params = params;
  const double n = static_cast<double>(x.rows());
  for (int c = 0; c < 2; ++c) {
    // An absent class gets -inf prior and never wins.
    m.log_prior[c] = std::log(class_count[c] / n);
    m.log_prob[c].assign(d, 0.0);
    m.log_absent[c].assign(d, 0.0);
    if (bernoulli) {
      for (std::size_t j = 0; j < d; ++j) {
        const double p = (feature_sum[c][j] + params.alpha) / (class_count[c] + 2.0 * params.alpha);
        m.log_prob[c][j] = std::log(p);
        m.log_absent[c][j] = std::log1p(-p);
      }
    } else {
      double total = 0.0;
      for (double s : feature_sum[c]) total += s;
      const double denom = total + params.alpha * static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) m.log_prob[c][j] = std::log((feature_sum[c][j] + params.alpha) / denom);
    }
  }
  return m;
}

}  // namespace urlspam
