#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles/oracles.hpp"
#include "urlspam/evaluation.hpp"
#include "urlspam/model_io.hpp"
#include "urlspam/random.hpp"

using namespace urlspam;

namespace {

Labels random_binary(Rng& rng, std::size_t n, double p = 0.5) {
  Labels y(n);
  for (auto& v : y) v = uniform01(rng) < p ? 1 : 0;
  return y;
}

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t d) {
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = 10.0 * uniform01(rng);
  }
  return x;
}

oracle::Rows to_rows(const Matrix& x) {
  oracle::Rows rows(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) rows[i].assign(x.row(i).begin(), x.row(i).end());
  return rows;
}

}  // namespace

TEST(Confusion, Examples) {
  const Labels y{1, 0, 1};
  const auto cm = confusion(y, y);
  EXPECT_EQ(cm, (ConfusionMatrix{2, 0, 0, 1}));
  const Labels flipped{0, 1, 0};
  const auto f = confusion(y, flipped);
  EXPECT_EQ(f.tp, cm.fn);
  EXPECT_EQ(f.fn, cm.tp);
  EXPECT_EQ(f.tn, cm.fp);
  EXPECT_EQ(f.fp, cm.tn);
}

TEST(Confusion, Errors) {
  try {
    confusion(Labels{1, 0}, Labels{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  try {
    confusion(Labels{1, 2}, Labels{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonBinaryLabels);
  }
}

TEST(Metrics, WorkedExample) {
  const auto m = classification_metrics({50, 5, 5, 40});
  EXPECT_NEAR(m.accuracy, 0.9, 1e-12);
  EXPECT_NEAR(m.precision, 0.9091, 1e-4);
  EXPECT_NEAR(m.recall, 0.9091, 1e-4);
  EXPECT_NEAR(m.f1, 0.9091, 1e-4);
}

TEST(Metrics, PerfectAndUndefined) {
  const auto perfect = classification_metrics({3, 0, 0, 4});
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);

  const auto none_predicted = classification_metrics({0, 0, 3, 4});
  EXPECT_EQ(none_predicted.precision, 0.0);
  EXPECT_FALSE(none_predicted.precision_defined);
  EXPECT_TRUE(none_predicted.recall_defined);
  EXPECT_FALSE(none_predicted.f1_defined);

  try {
    classification_metrics({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMatrix);
  }
}

TEST(RSquare, Examples) {
  const Labels y{1, 0, 0, 1, 0};
  EXPECT_EQ(r_square_binary(y, y), 1.0);
  // Majority-class prediction at base rate 0.32.
  Labels truth(100, 0), majority(100, 0);
  std::fill(truth.begin(), truth.begin() + 32, 1);
  EXPECT_NEAR(r_square_binary(truth, majority), 1.0 - 0.32 / 0.2176, 1e-12);
  EXPECT_NEAR(1.0 - 0.0136 / 0.2176, 0.9375, 1e-12);
  try {
    r_square_binary(Labels{1, 1}, Labels{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClassTruth);
  }
}

TEST(Metrics, IdentitiesOnRandomInstances) {
  Rng rng(101);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + uniform_below(rng, 99);
    auto y = random_binary(rng, n, 0.1 + 0.8 * uniform01(rng));
    y[0] = 0;
    y[1] = 1;
    const auto pred = random_binary(rng, n, uniform01(rng));
    const auto cm = confusion(y, pred);
    ASSERT_EQ(cm.total(), n);
    const auto m = classification_metrics(cm);
    EXPECT_NEAR(m.accuracy, static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n), 1e-12);
    if (m.f1_defined) EXPECT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-12);
    double ybar = 0;
    for (int v : y) ybar += v;
    ybar /= static_cast<double>(n);
    EXPECT_NEAR(r_square_binary(y, pred), 1.0 - (1.0 - m.accuracy) / (ybar * (1.0 - ybar)), 1e-12);
  }
}

TEST(Roc, Examples) {
  const Labels y{1, 0, 1, 0, 0};
  const std::vector<double> perfect{1, 0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(roc_and_auc(y, perfect).auc, 1.0);
  const std::vector<double> flat(5, 0.3);
  const auto c = roc_and_auc(y, flat);
  EXPECT_DOUBLE_EQ(c.auc, 0.5);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[1].fpr, 1.0);
  EXPECT_EQ(c.points[1].tpr, 1.0);
  EXPECT_THROW(roc_and_auc(Labels{1, 1}, std::vector<double>{0.1, 0.2}), Error);
}

TEST(Roc, AucMatchesPairwiseOracle) {
  Rng rng(102);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + uniform_below(rng, 99);
    auto y = random_binary(rng, n);
    y[0] = 1;
    y[n - 1] = 0;
    std::vector<double> s(n);
    const bool coarse = t % 2 == 0;  // coarse scores produce many ties
    for (auto& v : s) v = coarse ? static_cast<double>(uniform_below(rng, 5)) / 4.0 : uniform01(rng);
    const auto curve = roc_and_auc(y, s);
    EXPECT_NEAR(curve.auc, oracle::pairwise_auc(y, s), 1e-9);

    ASSERT_GE(curve.points.size(), 2u);
    EXPECT_EQ(curve.points.front().fpr, 0.0);
    EXPECT_EQ(curve.points.front().tpr, 0.0);
    EXPECT_EQ(curve.points.back().fpr, 1.0);
    EXPECT_EQ(curve.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      EXPECT_GE(curve.points[i].fpr, curve.points[i - 1].fpr);
      EXPECT_GE(curve.points[i].tpr, curve.points[i - 1].tpr);
      EXPECT_LT(curve.points[i].threshold, curve.points[i - 1].threshold);
    }
  }
}

TEST(Roc, CsvAndSvgExport) {
  const auto curve = roc_and_auc(Labels{1, 0, 1, 0}, std::vector<double>{0.9, 0.1, 0.4, 0.4});
  EXPECT_DOUBLE_EQ(curve.auc, 0.875);
  std::ostringstream out;
  write_roc_csv(out, curve);
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find("\r\n")), "threshold,fpr,tpr");
  EXPECT_NE(text.find("inf,0,0"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(curve.points.size() + 1));
  const auto svg = roc_svg(curve, "a<b");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("0.8750"), std::string::npos);
}

TEST(CrossValidate, LeaveOneOutNearestNeighbourMatchesOracle) {
  Rng rng(103);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 6 + uniform_below(rng, 25), d = 1 + uniform_below(rng, 4);
    const auto x = random_matrix(rng, n, d);
    auto y = random_binary(rng, n);
    y[0] = 0;
    y[1] = 1;
    y[2] = 0;
    y[3] = 1;
    const auto spec = ModelSpec::defaults(ModelFamily::knn);
    const auto cv = cross_validate(x, y, spec, static_cast<int>(n), 5);
    EXPECT_NEAR(cv.mean_accuracy, oracle::loo_1nn_accuracy(to_rows(x), y), 1e-12);
  }
}

TEST(CrossValidate, ConstantMajorityModel) {
  // Constant features: the tree is one leaf predicting the majority class.
  const Matrix x(103, 3);
  Labels y(103, 0);
  for (std::size_t i = 0; i < 103; i += 3) y[i] = 1;  // 35 positives
  const auto cv = cross_validate(x, y, ModelSpec::defaults(ModelFamily::dtree), 10, 2);
  const double majority = 68.0 / 103.0;
  for (int f = 0; f < 10; ++f) {
    const auto test = cv.plan.test_indices(f);
    std::size_t neg = 0;
    for (auto i : test) neg += y[i] == 0;
    EXPECT_DOUBLE_EQ(cv.fold_accuracy[static_cast<std::size_t>(f)], static_cast<double>(neg) / test.size());
    EXPECT_LE(std::abs(cv.fold_accuracy[static_cast<std::size_t>(f)] - majority), 1.0 / test.size() + 1e-12);
  }
  EXPECT_NEAR(cv.mean_accuracy, majority, 0.02);
}

TEST(CrossValidate, HeldOutRowsNeverReachTheFit) {
  Rng rng(104);
  const std::size_t n = 80;
  const auto x = random_matrix(rng, n, kFeatureCount);
  auto y = random_binary(rng, n);
  y[0] = 0;
  y[1] = 1;
  const auto plan = cv_fold_plan(y, 4, 7);
  for (auto family : {ModelFamily::logreg, ModelFamily::knn, ModelFamily::mlp, ModelFamily::dtree}) {
    auto spec = ModelSpec::defaults(family);
    if (family == ModelFamily::mlp) std::get<MlpParams>(spec.params).max_iter = 5;
    const auto clean = cross_validate(x, y, spec, plan, 3, {true});
    for (int f = 0; f < plan.k; ++f) {
      Matrix poisoned = x;
      Labels flipped = y;
      for (auto i : plan.test_indices(f)) {
        for (std::size_t j = 0; j < poisoned.cols(); ++j) poisoned(i, j) = 1e9 * (j + 1);
        flipped[i] = 1 - flipped[i];
      }
      const auto dirty = cross_validate(poisoned, flipped, spec, plan, 3, {true});
      const auto fi = static_cast<std::size_t>(f);
      EXPECT_EQ(model_to_string(clean.fold_models[fi]), model_to_string(dirty.fold_models[fi]))
          << family_tag(family) << " fold " << f;
    }
  }
}

TEST(CrossValidate, ParallelFoldsMatchSequential) {
  Rng rng(105);
  const auto x = random_matrix(rng, 120, 4);
  auto y = random_binary(rng, 120);
  const auto spec = ModelSpec::defaults(ModelFamily::forest);
  set_thread_count(1);
  const auto a = cross_validate(x, y, spec, 5, 9);
  set_thread_count(5);
  const auto b = cross_validate(x, y, spec, 5, 9);
  set_thread_count(0);
  EXPECT_EQ(a.fold_accuracy, b.fold_accuracy);
  EXPECT_EQ(a.plan.fold_assignment, b.plan.fold_assignment);
}

namespace {

Dataset separable_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, kFeatureCount);
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    x(i, 1) = static_cast<double>(uniform_below(rng, 4));
    x(i, 0) = y[i] ? 40.0 + static_cast<double>(uniform_below(rng, 10)) : static_cast<double>(uniform_below(rng, 10));
  }
  return Dataset(std::move(x), std::move(y));
}

}  // namespace

TEST(CompareModels, IdenticalSpecsGiveIdenticalRows) {
  const auto data = separable_dataset(100, 1);
  const std::vector<ModelSpec> specs{ModelSpec::defaults(ModelFamily::dtree), ModelSpec::defaults(ModelFamily::dtree)};
  const auto table = compare_models(data, specs, {3, 5, 0.2, true});
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.cells()[1], table.cells()[2]);
  EXPECT_EQ(table.rows[0].fold_accuracy, table.rows[1].fold_accuracy);
  const auto again = compare_models(data, specs, {3, 5, 0.2, true});
  EXPECT_EQ(again.to_text(), table.to_text());
}

TEST(CompareModels, SeparableDataIsSolved) {
  const auto data = separable_dataset(200, 2);
  std::vector<ModelSpec> specs;
  for (auto f : {ModelFamily::logreg, ModelFamily::knn, ModelFamily::dtree, ModelFamily::forest, ModelFamily::bagging,
                 ModelFamily::adaboost, ModelFamily::gboost}) {
    specs.push_back(ModelSpec::defaults(f));
  }
  std::get<BaggingParams>(specs[4].params).n_estimators = 10;
  const auto table = compare_models(data, specs, {4, 5, 0.2, true});
  for (const auto& row : table.rows) {
    EXPECT_EQ(row.report.metrics.accuracy, 1.0) << row.name;
    EXPECT_EQ(*row.report.kfold_mean_accuracy, 1.0) << row.name;
    EXPECT_EQ(row.report.r_square, 1.0) << row.name;
  }
}

TEST(CompareModels, TableLayout) {
  const auto data = separable_dataset(60, 3);
  const std::vector<ModelSpec> specs{ModelSpec::defaults(ModelFamily::bnb)};
  const auto table = compare_models(data, specs, {1, 3, 0.25, true});
  const auto cells = table.cells();
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0], (std::vector<std::string>{"Classifier", "Acc.", "10 K-fold", "Prec.", "Recall", "F1", "R2"}));
  EXPECT_EQ(cells[1][0], "BernoulliNB");
  std::ostringstream csv;
  table.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find("\r\n")), "Classifier,Acc.,10 K-fold,Prec.,Recall,F1,R2");
  EXPECT_THROW(compare_models(data, std::vector<ModelSpec>{}, {}), Error);
}
