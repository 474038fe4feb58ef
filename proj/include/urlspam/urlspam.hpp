#pragma once

#include "urlspam/error.hpp"
#include "urlspam/random.hpp"
#include "urlspam/parallel.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/url_features.hpp"
#include "urlspam/csv.hpp"
#include "urlspam/dataset.hpp"
#include "urlspam/serialization.hpp"
#include "urlspam/standardizer.hpp"
#include "urlspam/logistic_regression.hpp"
#include "urlspam/knn.hpp"
#include "urlspam/decision_tree.hpp"
#include "urlspam/naive_bayes.hpp"
#include "urlspam/mlp.hpp"
#include "urlspam/bagging.hpp"
#include "urlspam/random_forest.hpp"
#include "urlspam/adaboost.hpp"
#include "urlspam/gradient_boosting.hpp"
#include "urlspam/stacking.hpp"
#include "urlspam/model.hpp"
#include "urlspam/model_io.hpp"
#include "urlspam/evaluation.hpp"
#include "urlspam/tuning.hpp"
#include "urlspam/synthetic.hpp"
