#pragma once

// Metrics, ROC curves, k-fold cross-validation and the model comparison
// table. Spam is the positive class everywhere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "urlspam/csv.hpp"
#include "urlspam/dataset.hpp"
#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/model.hpp"
#include "urlspam/parallel.hpp"
#include "urlspam/random.hpp"

namespace urlspam {

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(y_true.size()) + " labels vs " + std::to_string(y_pred.size()) + " predictions");
  }
  require_binary(y_true);
  require_binary(y_pred);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1) {
      (y_pred[i] == 1 ? cm.tp : cm.fn)++;
    } else {
      (y_pred[i] == 1 ? cm.fp : cm.tn)++;
    }
  }
  return cm;
}

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // False when the ratio had a zero denominator and was reported as 0.
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

inline ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::EmptyMatrix, "no evaluated examples");
  ClassificationMetrics m;
  const auto ratio = [](std::size_t num, std::size_t den, bool& defined) {
    defined = den > 0;
    return defined ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp, m.precision_defined);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, m.recall_defined);
  m.f1_defined = m.precision_defined && m.recall_defined && m.precision + m.recall > 0.0;
  m.f1 = m.f1_defined ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

/// Coefficient of determination on hard 0/1 predictions.
inline double r_square_binary(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCode::LengthMismatch, "label and prediction counts differ");
  require_binary(y_true);
  const double n = static_cast<double>(y_true.size());
  double mean = 0.0;
  for (int y : y_true) mean += y;
  mean /= n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_true[i] - y_pred[i];
    const double t = y_true[i] - mean;
    ss_res += r * r;
    ss_tot += t * t;
  }
  if (ss_tot == 0.0) throw Error(ErrorCode::SingleClassTruth, "R^2 needs both classes in the truth");
  return 1.0 - ss_res / ss_tot;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict positive when score >= threshold
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

inline RocCurve roc_and_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw Error(ErrorCode::LengthMismatch, "label and score counts differ");
  require_binary(y_true);
  const auto pos = static_cast<std::size_t>(std::count(y_true.begin(), y_true.end(), 1));
  const std::size_t neg = y_true.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClassTruth, "ROC needs both classes");

  std::vector<std::size_t> order = iota_indices(scores.size());
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (y_true[order[i]] == 1 ? tp : fp)++;
    const RocPoint p{static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos), s};
    const RocPoint& q = curve.points.back();
    curve.auc += (p.fpr - q.fpr) * (p.tpr + q.tpr) / 2.0;
    curve.points.push_back(p);
  }
  return curve;
}

inline void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  csv::write_row(out, {"threshold", "fpr", "tpr"});
  for (const auto& p : curve.points) {
    const std::string t = std::isinf(p.threshold) ? "inf" : csv::format_double(p.threshold);
    csv::write_row(out, {t, csv::format_double(p.fpr), csv::format_double(p.tpr)});
  }
}

/// Self-contained SVG line chart of one curve with the chance diagonal.
inline std::string roc_svg(const RocCurve& curve, const std::string& title) {
  constexpr double size = 400.0, pad = 40.0;
  const auto px = [&](double v) { return pad + v * size; };
  const auto py = [&](double v) { return pad + (1.0 - v) * size; };
  std::string escaped;
  for (char c : title) {
    switch (c) {
      case '<': escaped += "&lt;"; break;
      case '>': escaped += "&gt;"; break;
      case '&': escaped += "&amp;"; break;
      default: escaped += c;
    }
  }
  std::ostringstream svg;
  char buf[64];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"500\" viewBox=\"0 0 480 500\">\n";
  svg << "<rect x=\"40\" y=\"40\" width=\"400\" height=\"400\" fill=\"white\" stroke=\"black\"/>\n";
  svg << "<line x1=\"40\" y1=\"440\" x2=\"440\" y2=\"40\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(curve.points[i].fpr), py(curve.points[i].tpr));
    svg << buf;
  }
  svg << "\"/>\n";
  std::snprintf(buf, sizeof buf, "%.4f", curve.auc);
  svg << "<text x=\"40\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">" << escaped << " (AUC " << buf
      << ")</text>\n";
  svg << "<text x=\"240\" y=\"475\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "False positive rate</text>\n";
  svg << "<text x=\"15\" y=\"240\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 15 240)\">True positive rate</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CvOptions {
  bool keep_models = false;
};

struct CvResult {
  FoldPlan plan;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  std::vector<Model> fold_models;  // filled when CvOptions::keep_models
};

/// The fold plan every evaluation path derives from a master seed.
inline FoldPlan cv_fold_plan(std::span<const int> y, int k, std::uint64_t seed) {
  return stratified_kfold(y, k, derive_seed(seed, {0xf0, 0}));
}

/// Seed handed to the fit on fold `fold`.
inline std::uint64_t fold_fit_seed(std::uint64_t seed, int fold) {
  return derive_seed(seed, {0xcf, static_cast<std::uint64_t>(fold)});
}

/// Runs a previously built fold plan. Each fold's model (and its
/// Standardizer) sees only that fold's training rows.
inline CvResult cross_validate(const Matrix& x, std::span<const int> y, const ModelSpec& spec, const FoldPlan& plan,
                               std::uint64_t seed, const CvOptions& options = {}) {
  const auto k = static_cast<std::size_t>(plan.k);
  CvResult result;
  result.plan = plan;
  result.fold_accuracy.assign(k, 0.0);
  if (options.keep_models) result.fold_models.resize(k);
  parallel_for(k, [&](std::size_t f) {
    const int fold = static_cast<int>(f);
    const auto train = plan.train_indices(fold);
    const auto test = plan.test_indices(fold);
    Model m = fit_model(spec, x.select_rows(train), select(y, std::span<const std::size_t>(train)),
                        fold_fit_seed(seed, fold));
    std::size_t correct = 0;
    for (auto i : test) correct += m.predict_label(x.row(i)) == y[i];
    result.fold_accuracy[f] = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
    if (options.keep_models) result.fold_models[f] = std::move(m);
  });
  result.mean_accuracy =
      std::accumulate(result.fold_accuracy.begin(), result.fold_accuracy.end(), 0.0) / static_cast<double>(k);
  return result;
}

inline CvResult cross_validate(const Matrix& x, std::span<const int> y, const ModelSpec& spec, int k,
                               std::uint64_t seed, const CvOptions& options = {}) {
  return cross_validate(x, y, spec, cv_fold_plan(y, k, seed), seed, options);
}

inline CvResult cross_validate(const Dataset& data, const ModelSpec& spec, int k, std::uint64_t seed,
                               const CvOptions& options = {}) {
  return cross_validate(data.features(), data.labels(), spec, k, seed, options);
}

// ---------------------------------------------------------------------------
// Single-split evaluation and model comparison

struct MetricsReport {
  ClassificationMetrics metrics;
  ConfusionMatrix confusion;
  double r_square = 0.0;
  double auc = 0.0;
  std::optional<double> kfold_mean_accuracy;
};

inline MetricsReport evaluate_predictions(std::span<const int> y_true, std::span<const int> y_pred,
                                          std::span<const double> scores) {
  MetricsReport r;
  r.confusion = confusion(y_true, y_pred);
  r.metrics = classification_metrics(r.confusion);
  r.r_square = r_square_binary(y_true, y_pred);
  r.auc = roc_and_auc(y_true, scores).auc;
  return r;
}

inline MetricsReport evaluate_model(const Model& model, const Matrix& x, std::span<const int> y) {
  const auto scores = model.predict_scores(x);
  const double t = model.threshold();
  std::vector<int> pred(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= t ? 1 : 0;
  return evaluate_predictions(y, pred, scores);
}

struct CompareConfig {
  std::uint64_t seed = 0;
  int k = 10;
  double test_fraction = 0.20;
  bool stratified = true;
};

struct ComparisonRow {
  std::string name;
  ModelFamily family = ModelFamily::logreg;
  MetricsReport report;
  std::vector<double> fold_accuracy;
};

inline constexpr std::array<std::string_view, 7> kComparisonColumns = {"Classifier", "Acc.",   "10 K-fold", "Prec.",
                                                                        "Recall",     "F1", "R2"};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  /// Percentages with two decimals, R2 with two decimals.
  std::vector<std::vector<std::string>> cells() const {
    const auto pct = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
      return std::string(buf);
    };
    std::vector<std::vector<std::string>> out;
    out.emplace_back(kComparisonColumns.begin(), kComparisonColumns.end());
    for (const auto& r : rows) {
      char r2[32];
      std::snprintf(r2, sizeof r2, "%.2f", r.report.r_square);
      const auto& m = r.report.metrics;
      out.push_back({r.name, pct(m.accuracy), pct(r.report.kfold_mean_accuracy.value_or(0.0)), pct(m.precision),
                     pct(m.recall), pct(m.f1), r2});
    }
    return out;
  }

  void write_csv(std::ostream& out) const {
    for (const auto& row : cells()) csv::write_row(out, row);
  }

  std::string to_text() const {
    const auto table = cells();
    std::vector<std::size_t> width(kComparisonColumns.size(), 0);
    for (const auto& row : table) {
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string text;
    for (const auto& row : table) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        const std::string pad(width[c] - row[c].size(), ' ');
        if (c == 0) {
          text += row[c] + pad;
        } else {
          text += "  " + pad + row[c];
        }
      }
      text += '\n';
    }
    return text;
  }
};

/// One row per spec, in input order. Every spec sees the same train/test split
/// and the same fold plan.
inline ComparisonTable compare_models(const Dataset& data, std::span<const ModelSpec> specs,
                                      const CompareConfig& config) {
  if (specs.empty()) throw Error(ErrorCode::InvalidParameter, "nothing to compare");
  const auto split = split_indices(data.labels(), {config.test_fraction, config.seed, config.stratified});
  const Matrix x_train = data.features().select_rows(split.train);
  const Matrix x_test = data.features().select_rows(split.test);
  const Labels y_train = select(std::span<const int>(data.labels()), std::span<const std::size_t>(split.train));
  const Labels y_test = select(std::span<const int>(data.labels()), std::span<const std::size_t>(split.test));
  const FoldPlan plan = cv_fold_plan(data.labels(), config.k, config.seed);

  ComparisonTable table;
  for (const auto& spec : specs) {
    ComparisonRow row;
    row.family = spec.family();
    row.name = std::string(display_name(row.family));
    const Model model = fit_model(spec, x_train, y_train, config.seed);
    row.report = evaluate_model(model, x_test, y_test);
    const auto cv = cross_validate(data.features(), data.labels(), spec, plan, config.seed);
    row.fold_accuracy = cv.fold_accuracy;
    row.report.kfold_mean_accuracy = cv.mean_accuracy;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace urlspam
