#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

struct LogisticRegressionParams {
  double C = 100.0;  // inverse L2 strength
  int max_iter = 140;
  double tol = 1e-4;
  bool fit_intercept = true;
};

struct LogisticRegressionModel {
  std::vector<double> weights;
  double intercept = 0.0;
  int iterations = 0;

  double decision(std::span<const double> x) const {
    double f = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) f += weights[j] * x[j];
    return f;
  }

  double predict_score(std::span<const double> x) const { return sigmoid(decision(x)); }

  void save(io::Writer& w) const {
    w.doubles("weights", weights);
    w.line("intercept", intercept);
    w.line("iterations", iterations);
  }

  static LogisticRegressionModel load(io::Reader& r) {
    LogisticRegressionModel m;
    m.weights = r.doubles("weights");
    m.intercept = r.real("intercept");
    m.iterations = static_cast<int>(r.integer("iterations"));
    return m;
  }
};

struct LossAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// J(w, b) = sum_i log(1 + exp(-z_i (w.x_i + b))) + |w|^2 / (2C), z_i = 2y_i - 1.
/// `theta` holds w followed by b; the gradient has the same layout.
inline LossAndGradient logistic_objective(std::span<const double> theta, const Matrix& x,
                                          std::span<const int> y, double C) {
  const std::size_t d = x.cols();
  LossAndGradient out;
  out.gradient.assign(d + 1, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double f = theta[d];
    for (std::size_t j = 0; j < d; ++j) f += theta[j] * row[j];
    const double z = y[i] == 1 ? 1.0 : -1.0;
    out.value += softplus(-z * f);
    const double coef = -z * sigmoid(-z * f);
    for (std::size_t j = 0; j < d; ++j) out.gradient[j] += coef * row[j];
    out.gradient[d] += coef;
  }
  for (std::size_t j = 0; j < d; ++j) {
    out.value += theta[j] * theta[j] / (2.0 * C);
    out.gradient[j] += theta[j] / C;
  }
  return out;
}

/// Damped Newton iterations with Armijo backtracking. Stops once the gradient
/// norm drops below tol or after max_iter iterations.
inline LogisticRegressionModel logreg_fit(const Matrix& x, std::span<const int> y,
                                          const LogisticRegressionParams& params,
                                          std::uint64_t /*seed*/ = 0) {
  require_fit_inputs(x, y);
  if (!(params.C > 0.0)) throw Error(ErrorCode::InvalidParameter, "C must be positive");
  if (params.max_iter < 1) throw Error(ErrorCode::InvalidParameter, "max_iter must be at least 1");

  const std::size_t d = x.cols();
  const std::size_t p = d + 1;
  std::vector<double> theta(p, 0.0);
  // Without an intercept the last coordinate is pinned at zero.
  auto project = [&](std::vector<double>& g) {
    if (!params.fit_intercept) g[d] = 0.0;
  };

  auto current = logistic_objective(theta, x, y, params.C);
  project(current.gradient);
  int iter = 0;
  for (; iter < params.max_iter; ++iter) {
    const Eigen::Map<const Eigen::VectorXd> grad(current.gradient.data(), static_cast<Eigen::Index>(p));
    if (grad.norm() < params.tol) break;

    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Eigen::VectorXd xi(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto row = x.row(i);
      double f = theta[d];
      for (std::size_t j = 0; j < d; ++j) {
        f += theta[j] * row[j];
        xi[static_cast<Eigen::Index>(j)] = row[j];
      }
      xi[static_cast<Eigen::Index>(d)] = 1.0;
      const double s = sigmoid(f);
      hessian.selfadjointView<Eigen::Lower>().rankUpdate(xi, s * (1.0 - s));
    }
    hessian = hessian.selfadjointView<Eigen::Lower>();
    for (std::size_t j = 0; j < d; ++j) hessian(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += 1.0 / params.C;
    if (!params.fit_intercept) {
      hessian.row(static_cast<Eigen::Index>(d)).setZero();
      hessian.col(static_cast<Eigen::Index>(d)).setZero();
      hessian(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) = 1.0;
    }

    Eigen::VectorXd step;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      step = -ldlt.solve(grad);
    }
    if (step.size() != static_cast<Eigen::Index>(p) || !step.allFinite() || grad.dot(step) >= 0.0) {
      step = -grad;
    }

    const double slope = grad.dot(step);
    double t = 1.0;
    std::vector<double> trial(p);
    LossAndGradient next;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      for (std::size_t j = 0; j < p; ++j) trial[j] = theta[j] + t * step[static_cast<Eigen::Index>(j)];
      next = logistic_objective(trial, x, y, params.C);
      if (next.value <= current.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    theta = trial;
    current = std::move(next);
    project(current.gradient);
  }

  LogisticRegressionModel model;
  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
  model.intercept = theta[d];
  model.iterations = iter;
  return model;
}

}  // namespace urlspam
