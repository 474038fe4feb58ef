#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

struct KnnParams {
  int n_neighbors = 1;
  double minkowski_p = 2.0;
};

/// Exact k-nearest-neighbour classifier over a kd-tree.
///
/// Neighbours are ordered by (distance, training index), so of two training
/// points at equal distance the lower index wins. The score is the fraction of
/// positive neighbours and the label is 1 only on a strict majority.
class KnnModel {
 public:
  KnnModel() = default;

  KnnModel(Matrix train_x, Labels train_y, KnnParams params)
      : x_(std::move(train_x)), y_(std::move(train_y)), params_(params) {
    if (x_.empty()) throw Error(ErrorCode::EmptyTrainingSet, "k-NN needs training rows");
    require_fit_inputs(x_, y_);
    if (params_.n_neighbors < 1) throw Error(ErrorCode::InvalidParameter, "n_neighbors must be at least 1");
    if (static_cast<std::size_t>(params_.n_neighbors) > x_.rows()) {
      throw Error(ErrorCode::InvalidParameter, "n_neighbors exceeds training rows");
    }
    if (!(params_.minkowski_p >= 1.0)) throw Error(ErrorCode::InvalidParameter, "minkowski_p must be >= 1");
    build();
  }

  const KnnParams& params() const noexcept { return params_; }
  const Matrix& train_x() const noexcept { return x_; }
  const Labels& train_y() const noexcept { return y_; }

  double threshold() const noexcept {
    const int k = params_.n_neighbors;
    return static_cast<double>(k / 2 + 1) / static_cast<double>(k);
  }

  /// Training indices of the k nearest neighbours, closest first.
  std::vector<std::size_t> neighbors(std::span<const double> query) const {
    Heap heap;
    search(0, query, heap);
    std::vector<std::size_t> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top().index;
      heap.pop();
    }
    return out;
  }

  double predict_score(std::span<const double> query) const {
    int positives = 0;
    for (auto i : neighbors(query)) positives += y_[i];
    return static_cast<double>(positives) / static_cast<double>(params_.n_neighbors);
  }

  int predict_label(std::span<const double> query) const { return predict_score(query) >= threshold() ? 1 : 0; }

  void save(io::Writer& w) const {
    w.line("n_neighbors", params_.n_neighbors);
    w.line("minkowski_p", params_.minkowski_p);
    w.line("train", x_.rows(), x_.cols());
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      w.doubles("x", std::vector<double>(x_.row(r).begin(), x_.row(r).end()));
    }
    w.ints("y", y_);
  }

  static KnnModel load(io::Reader& r) {
    KnnParams params;
    params.n_neighbors = static_cast<int>(r.integer("n_neighbors"));
    params.minkowski_p = r.real("minkowski_p");
    const auto shape = r.expect("train", 2);
    const auto rows = static_cast<std::size_t>(io::parse_int(shape[0]));
    const auto cols = static_cast<std::size_t>(io::parse_int(shape[1]));
    Matrix x(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto values = r.doubles("x");
      if (values.size() != cols) throw Error(ErrorCode::ModelFormat, "k-NN row width mismatch");
      std::copy(values.begin(), values.end(), x.row(i).begin());
    }
    auto y = r.ints("y");
    return KnnModel(std::move(x), std::move(y), params);
  }

 private:
  static constexpr std::size_t kLeafSize = 16;

  struct Candidate {
    double distance;
    std::size_t index;
    bool operator<(const Candidate& o) const {
      return distance < o.distance || (distance == o.distance && index < o.index);
    }
  };
  using Heap = std::priority_queue<Candidate>;  // worst candidate on top

  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    std::int64_t left = -1, right = -1;
    std::vector<double> lo, hi;      // bounding box
  };

  double term(double diff) const {
    diff = std::abs(diff);
    if (params_.minkowski_p == 2.0) return diff * diff;
    if (params_.minkowski_p == 1.0) return diff;
    return std::pow(diff, params_.minkowski_p);
  }

  double powered_distance(std::span<const double> a, std::size_t row) const {
    const auto b = x_.row(row);
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += term(a[j] - b[j]);
    return s;
  }

  double box_distance(std::span<const double> q, const Node& node) const {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (q[j] < node.lo[j]) {
        s += term(node.lo[j] - q[j]);
      } else if (q[j] > node.hi[j]) {
        s += term(q[j] - node.hi[j]);
      }
    }
    return s;
  }

  void build() {
    order_.resize(x_.rows());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.clear();
    build_node(0, order_.size());
  }

  std::int64_t build_node(std::size_t begin, std::size_t end) {
    const std::size_t d = x_.cols();
    const auto id = static_cast<std::int64_t>(nodes_.size());
    nodes_.emplace_back();
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo.assign(d, std::numeric_limits<double>::infinity());
    node.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = x_.row(order_[i]);
      for (std::size_t j = 0; j < d; ++j) {
        node.lo[j] = std::min(node.lo[j], row[j]);
        node.hi[j] = std::max(node.hi[j], row[j]);
      }
    }
    std::size_t split_dim = 0;
    double spread = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (node.hi[j] - node.lo[j] > spread) {
        spread = node.hi[j] - node.lo[j];
        split_dim = j;
      }
    }
    if (end - begin > kLeafSize && spread > 0.0) {
      const std::size_t mid = begin + (end - begin) / 2;
      std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                       order_.begin() + static_cast<std::ptrdiff_t>(mid),
                       order_.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](std::size_t a, std::size_t b) {
                         const double va = x_(a, split_dim), vb = x_(b, split_dim);
                         return va < vb || (va == vb && a < b);
                       });
      node.left = build_node(begin, mid);
      node.right = build_node(mid, end);
    }
    nodes_[static_cast<std::size_t>(id)] = std::move(node);
    return id;
  }

  void search(std::int64_t id, std::span<const double> q, Heap& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const auto k = static_cast<std::size_t>(params_.n_neighbors);
    if (heap.size() == k && box_distance(q, node) > heap.top().distance) return;
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const Candidate c{powered_distance(q, order_[i]), order_[i]};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    if (box_distance(q, l) <= box_distance(q, r)) {
      search(node.left, q, heap);
      search(node.right, q, heap);
    } else {
      search(node.right, q, heap);
      search(node.left, q, heap);
    }
  }

  Matrix x_;
  Labels y_;
  KnnParams params_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

inline KnnModel knn_fit(const Matrix& x, std::span<const int> y, const KnnParams& params) {
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet, "k-NN needs training rows");
  return KnnModel(x, Labels(y.begin(), y.end()), params);
}

struct KnnPrediction {
  int label = 0;
  double score = 0.0;
};

inline KnnPrediction knn_predict(const Matrix& train_x, std::span<const int> train_y,
                                 std::span<const double> query, const KnnParams& params) {
  const KnnModel model = knn_fit(train_x, train_y, params);
  const double score = model.predict_score(query);
  return {score >= model.threshold() ? 1 : 0, score};
}

}  // namespace urlspam
