#pragma once

// Stacked generalisation.
//
// Each base model is scored out of fold under an internal stratified k-fold;
// a logistic regression is then fit on the matrix of out-of-fold scores, and
// the base models are refit on all rows for inference. A score column that is
// bit-identical to an earlier one carries no information and is dropped, along
// with its base model, before the meta fit.
//
// The fit itself lives in model.hpp, after Model is a complete type.

#include <vector>

#include "urlspam/logistic_regression.hpp"

namespace urlspam {

struct ModelSpec;
class Model;

struct StackingParams {
  std::vector<ModelSpec> base_models;  // see default_stacking_params()
  int internal_cv_k = 5;
  LogisticRegressionParams final_model{1.0, 100, 1e-4, true};
};

struct StackingModel {
  std::vector<Model> bases;  // only the bases whose columns were kept
  LogisticRegressionModel meta;
};

}  // namespace urlspam
