#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

/// Per-column z-scoring with population standard deviation. Columns with zero
/// variance on the training data map to 0.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale)
      : mean_(std::move(mean)), scale_(std::move(scale)) {}

  static Standardizer fit(const Matrix& train) {
    if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "cannot standardize zero rows");
    const std::size_t d = train.cols();
    const double n = static_cast<double>(train.rows());
    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    for (std::size_t r = 0; r < train.rows(); ++r) {
      for (std::size_t c = 0; c < d; ++c) mean[c] += train(r, c);
    }
    for (auto& m : mean) m /= n;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        const double dev = train(r, c) - mean[c];
        scale[c] += dev * dev;
      }
    }
    for (auto& s : scale) s = std::sqrt(s / n);
    return Standardizer(std::move(mean), std::move(scale));
  }

  std::size_t dims() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

  void transform_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < mean_.size(); ++c) {
      out[c] = scale_[c] > 0.0 ? (in[c] - mean_[c]) / scale_[c] : 0.0;
    }
  }

  std::vector<double> transform_row(std::span<const double> in) const {
    std::vector<double> out(mean_.size());
    transform_row(in, out);
    return out;
  }

  Matrix transform(const Matrix& x) const {
    if (x.cols() != mean_.size()) throw Error(ErrorCode::LengthMismatch, "column count differs from fit");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) transform_row(x.row(r), out.row(r));
    return out;
  }

  void save(io::Writer& w) const {
    w.doubles("mean", mean_);
    w.doubles("scale", scale_);
  }

  static Standardizer load(io::Reader& r) {
    auto mean = r.doubles("mean");
    auto scale = r.doubles("scale");
    if (mean.size() != scale.size()) throw Error(ErrorCode::ModelFormat, "standardizer size mismatch");
    return Standardizer(std::move(mean), std::move(scale));
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

/// Fits on `train` and transforms `apply_to`.
inline Matrix standardize_fit_apply(const Matrix& train, const Matrix& apply_to) {
  return Standardizer::fit(train).transform(apply_to);
}

}  // namespace urlspam
