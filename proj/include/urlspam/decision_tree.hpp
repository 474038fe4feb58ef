#pragma once

// Greedy binary CART.
//
// Classification trees split on weighted Gini or entropy and store the
// weighted positive fraction in each leaf; regression trees (used by gradient
// boosting) split on squared error and store the leaf mean. Rows may repeat in
// the training row list, which is how bootstrap resamples are fed in.
//
// Split search: candidate thresholds are midpoints between consecutive distinct
// values of a feature among the node's rows, and a row goes left when
// x <= threshold. Features are scanned in ascending index order and thresholds
// in ascending order; a candidate replaces the incumbent only when its gain is
// larger by more than a relative 1e-12, so ties go to the lowest feature index
// and then the lowest threshold. A node is split whenever some candidate
// respects min_samples_leaf, even at zero gain (XOR-style parents have zero
// gain but informative children).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/random.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

enum class Criterion { gini, entropy, squared_error };

inline std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::gini: return "gini";
    case Criterion::entropy: return "entropy";
    case Criterion::squared_error: return "squared_error";
  }
  return "gini";
}

inline Criterion parse_criterion(std::string_view s) {
  if (s == "gini") return Criterion::gini;
  if (s == "entropy") return Criterion::entropy;
  if (s == "squared_error") return Criterion::squared_error;
  throw Error(ErrorCode::InvalidParameter, "unknown criterion '" + std::string(s) + "'");
}

struct DecisionTreeParams {
  Criterion criterion = Criterion::entropy;
  std::optional<int> max_depth = 22;  // nullopt: grow until pure
  int min_samples_split = 2;
  int min_samples_leaf = 1;
};

/// Impurity of a binary node with total weight w and positive weight w_pos.
inline double binary_impurity(Criterion c, double w, double w_pos) {
  if (w <= 0.0) return 0.0;
  const double p = std::clamp(w_pos / w, 0.0, 1.0);
  const double q = 1.0 - p;
  if (c == Criterion::gini) return 1.0 - p * p - q * q;
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (q > 0.0) h -= q * std::log2(q);
  return h;
}

/// Strictly better beyond rounding noise.
inline bool gain_improves(double candidate, double incumbent) {
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

namespace detail {

/// Sufficient statistics of a set of weighted rows.
struct NodeStats {
  double w = 0.0;    // total weight
  double wy = 0.0;   // weighted target sum (positive weight for classification)
  std::size_t n = 0; // row count

  void add(double weight, double target) {
    w += weight;
    wy += weight * target;
    ++n;
  }
};

inline double split_gain(Criterion c, const NodeStats& parent, const NodeStats& left) {
  const double wl = left.w;
  const double wr = parent.w - left.w;
  if (c == Criterion::squared_error) {
    if (!(wl > 0.0) || !(wr > 0.0)) return -std::numeric_limits<double>::infinity();
    const double sl = left.wy, sr = parent.wy - left.wy;
    return (sl * sl / wl + sr * sr / wr - parent.wy * parent.wy / parent.w) / parent.w;
  }
  const double parent_imp = binary_impurity(c, parent.w, parent.wy);
  const double imp_l = binary_impurity(c, wl, left.wy);
  const double imp_r = binary_impurity(c, wr, parent.wy - left.wy);
  return parent_imp - (wl / parent.w) * imp_l - (wr / parent.w) * imp_r;
}

inline double midpoint(double a, double b) {
  double t = a + (b - a) / 2.0;
  if (!(t >= a && t < b)) t = a;
  return t;
}

}  // namespace detail

/// Training rows of one node plus their targets and weights.
struct SplitProblem {
  const Matrix& x;
  std::span<const double> target;  // 0/1 for classification
  std::span<const double> weight;  // empty: unit weights
  std::span<const std::size_t> rows;

  double w(std::size_t row) const { return weight.empty() ? 1.0 : weight[row]; }
};

namespace detail {

/// Scans one feature whose node positions are given in ascending value order
/// (ties by position) and updates `best` under the tie rule.
template <class Pos>
inline void scan_feature(const SplitProblem& node, Criterion criterion, std::size_t leaf, const NodeStats& total,
                         std::size_t f, std::span<const Pos> sorted, std::optional<SplitChoice>& best) {
  const std::size_t m = sorted.size();
  const auto value = [&](std::size_t i) { return node.x(node.rows[sorted[i]], f); };
  if (value(0) == value(m - 1)) return;
  NodeStats left;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const auto r = node.rows[sorted[i]];
    left.add(node.w(r), node.target[r]);
    const double v = node.x(r, f), next = value(i + 1);
    if (v == next) continue;
    if (left.n < leaf || m - left.n < leaf) continue;
    const double gain = split_gain(criterion, total, left);
    if (!best || gain_improves(gain, best->gain)) best = SplitChoice{f, midpoint(v, next), gain};
  }
}

}  // namespace detail

/// Best split over `features` (scanned in the given order) under the tie rule
/// described at the top of this file; nullopt when no threshold respects
/// min_samples_leaf.
inline std::optional<SplitChoice> best_split(const SplitProblem& node, Criterion criterion,
                                             int min_samples_leaf,
                                             std::span<const std::size_t> features) {
  detail::NodeStats total;
  for (auto r : node.rows) total.add(node.w(r), node.target[r]);
  const std::size_t m = node.rows.size();
  const auto leaf = static_cast<std::size_t>(std::max(1, min_samples_leaf));
  if (m < 2 * leaf) return std::nullopt;

  std::optional<SplitChoice> best;
  std::vector<std::size_t> sorted(m);
  for (auto f : features) {
    for (std::size_t i = 0; i < m; ++i) sorted[i] = i;
    std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
      const double va = node.x(node.rows[a], f), vb = node.x(node.rows[b], f);
      return va < vb || (va == vb && a < b);
    });
    detail::scan_feature<std::size_t>(node, criterion, leaf, total, f, sorted, best);
  }
  return best;
}

/// Row indices of every column sorted by value (ties by row index).
using ColumnOrder = std::vector<std::vector<std::uint32_t>>;

inline ColumnOrder presort_columns(const Matrix& x) {
  if (x.rows() > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorCode::InvalidParameter, "too many rows");
  ColumnOrder order(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& o = order[f];
    o.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) o[i] = static_cast<std::uint32_t>(i);
    std::sort(o.begin(), o.end(), [&](std::uint32_t p, std::uint32_t q) {
      return x(p, f) < x(q, f) || (x(p, f) == x(q, f) && p < q);
    });
  }
  return order;
}

/// Options used by the ensembles on top of DecisionTreeParams.
struct TreeGrowOptions {
  /// Features evaluated per node; nullopt evaluates every allowed feature.
  std::optional<std::size_t> features_per_split;
  /// Allowed feature indices; empty means all columns.
  std::vector<std::size_t> allowed_features;
  std::uint64_t seed = 0;
  /// presort_columns of the same matrix; used when the rows are ascending.
  const ColumnOrder* presorted = nullptr;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

  std::size_t leaf_index(std::span<const double> x) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
      const auto& n = nodes_[id];
      id = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return id;
  }

  double predict_value(std::span<const double> x) const { return nodes_[leaf_index(x)].value; }
  double predict_score(std::span<const double> x) const { return predict_value(x); }

  void set_leaf_value(std::size_t id, double value) { nodes_[id].value = value; }

  int depth() const {
    int best = 0;
    std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [id, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes_[id].is_leaf()) {
        stack.emplace_back(static_cast<std::size_t>(nodes_[id].left), d + 1);
        stack.emplace_back(static_cast<std::size_t>(nodes_[id].right), d + 1);
      }
    }
    return best;
  }

  void save(io::Writer& w) const {
    w.line("nodes", nodes_.size());
    for (const auto& n : nodes_) w.line("n", n.feature, n.threshold, n.left, n.right, n.value);
  }

  static DecisionTree load(io::Reader& r) {
    const auto count = r.integer("nodes");
    if (count < 1) throw Error(ErrorCode::ModelFormat, "tree without nodes");
    std::vector<TreeNode> nodes(static_cast<std::size_t>(count));
    for (auto& n : nodes) {
      const auto t = r.expect("n", 5);
      n.feature = static_cast<int>(io::parse_int(t[0]));
      n.threshold = io::parse_double(t[1]);
      n.left = static_cast<std::int32_t>(io::parse_int(t[2]));
      n.right = static_cast<std::int32_t>(io::parse_int(t[3]));
      n.value = io::parse_double(t[4]);
    }
    for (const auto& n : nodes) {
      if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
        throw Error(ErrorCode::ModelFormat, "tree child index out of range");
      }
    }
    return DecisionTree(std::move(nodes));
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Grows a tree over `rows` (duplicates allowed). Targets are 0/1 for the
/// classification criteria and arbitrary reals for squared error.
inline DecisionTree grow_tree(const Matrix& x, std::span<const double> target, std::span<const double> weight,
                              std::vector<std::size_t> rows, const DecisionTreeParams& params,
                              const TreeGrowOptions& options = {}) {
  if (rows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "tree needs at least one row");
  if (params.max_depth && *params.max_depth < 1) throw Error(ErrorCode::InvalidParameter, "max_depth must be >= 1");
  if (params.min_samples_split < 2) throw Error(ErrorCode::InvalidParameter, "min_samples_split must be >= 2");
  if (params.min_samples_leaf < 1) throw Error(ErrorCode::InvalidParameter, "min_samples_leaf must be >= 1");

  std::vector<std::size_t> allowed = options.allowed_features;
  if (allowed.empty()) allowed = iota_indices(x.cols());
  std::sort(allowed.begin(), allowed.end());
  Rng rng(options.seed);

  const SplitProblem whole{x, target, weight, {}};
  const auto leaf = static_cast<std::size_t>(params.min_samples_leaf);
  std::vector<TreeNode> nodes;
  // Each pending node keeps, per allowed feature, its row positions sorted by
  // (value, position). Children inherit the order by stable partition.
  using Pos = std::uint32_t;
  struct Pending {
    std::size_t id;
    std::vector<std::size_t> rows;
    std::vector<std::vector<Pos>> order;
    int depth;
  };
  if (rows.size() > std::numeric_limits<Pos>::max()) throw Error(ErrorCode::InvalidParameter, "too many rows");
  std::vector<std::vector<Pos>> root_order(allowed.size());
  if (options.presorted && std::is_sorted(rows.begin(), rows.end())) {
    // Ascending rows: position order agrees with row order, so each sorted
    // column is expanded by the multiplicity of its rows.
    std::vector<Pos> first(x.rows(), 0), count(x.rows(), 0);
    for (std::size_t i = rows.size(); i-- > 0;) {
      first[rows[i]] = static_cast<Pos>(i);
      ++count[rows[i]];
    }
    for (std::size_t a = 0; a < allowed.size(); ++a) {
      auto& o = root_order[a];
      o.reserve(rows.size());
      for (Pos r : (*options.presorted)[allowed[a]]) {
        for (Pos k = 0; k < count[r]; ++k) o.push_back(first[r] + k);
      }
    }
  } else {
    for (std::size_t a = 0; a < allowed.size(); ++a) {
      const std::size_t f = allowed[a];
      auto& o = root_order[a];
      o.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) o[i] = static_cast<Pos>(i);
      std::sort(o.begin(), o.end(), [&](Pos p, Pos q) {
        const double vp = x(rows[p], f), vq = x(rows[q], f);
        return vp < vq || (vp == vq && p < q);
      });
    }
  }
  std::vector<Pending> stack;
  nodes.emplace_back();
  stack.push_back({0, std::move(rows), std::move(root_order), 0});
  std::vector<std::uint8_t> goes_left;
  std::vector<Pos> child_pos;

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();

    detail::NodeStats stats;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    for (auto r : job.rows) {
      stats.add(whole.w(r), target[r]);
      y_min = std::min(y_min, target[r]);
      y_max = std::max(y_max, target[r]);
    }
    nodes[job.id].value = stats.w > 0.0 ? stats.wy / stats.w : 0.0;

    const bool depth_ok = !params.max_depth || job.depth < *params.max_depth;
    const bool size_ok = job.rows.size() >= static_cast<std::size_t>(params.min_samples_split) &&
                         job.rows.size() >= 2 * leaf;
    const bool impure = y_min != y_max;
    if (!depth_ok || !size_ok || !impure) continue;

    const auto constant = [&](std::size_t a) {
      const auto& o = job.order[a];
      return x(job.rows[o.front()], allowed[a]) == x(job.rows[o.back()], allowed[a]);
    };
    std::vector<std::size_t> candidates;  // indices into allowed
    if (options.features_per_split && *options.features_per_split < allowed.size()) {
      // Random subset of non-constant features, drawn fresh at every node.
      std::vector<std::size_t> perm = iota_indices(allowed.size());
      shuffle(perm, rng);
      for (auto a : perm) {
        if (candidates.size() == *options.features_per_split) break;
        if (!constant(a)) candidates.push_back(a);
      }
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates = iota_indices(allowed.size());
    }

    const SplitProblem problem{x, target, weight, job.rows};
    std::optional<SplitChoice> split;
    for (auto a : candidates) {
      detail::scan_feature<Pos>(problem, params.criterion, leaf, stats, allowed[a], job.order[a], split);
    }
    if (!split) continue;

    const std::size_t m = job.rows.size();
    goes_left.assign(m, 0);
    child_pos.assign(m, 0);
    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = job.rows[i];
      goes_left[i] = x(r, split->feature) <= split->threshold;
      auto& side = goes_left[i] ? left_rows : right_rows;
      child_pos[i] = static_cast<Pos>(side.size());
      side.push_back(r);
    }
    std::vector<std::vector<Pos>> left_order(allowed.size()), right_order(allowed.size());
    for (std::size_t a = 0; a < allowed.size(); ++a) {
      left_order[a].reserve(left_rows.size());
      right_order[a].reserve(right_rows.size());
      for (Pos p : job.order[a]) (goes_left[p] ? left_order[a] : right_order[a]).push_back(child_pos[p]);
    }
    job.order.clear();

    auto& node = nodes[job.id];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = static_cast<std::int32_t>(nodes.size());
    node.right = static_cast<std::int32_t>(nodes.size() + 1);
    const std::size_t left_id = nodes.size();
    nodes.emplace_back();
    nodes.emplace_back();
    // Right child pushed first so the left subtree is grown first.
    stack.push_back({left_id + 1, std::move(right_rows), std::move(right_order), job.depth + 1});
    stack.push_back({left_id, std::move(left_rows), std::move(left_order), job.depth + 1});
  }
  return DecisionTree(std::move(nodes));
}

inline std::vector<double> labels_as_targets(std::span<const int> y) { return {y.begin(), y.end()}; }

inline DecisionTree dtree_fit(const Matrix& x, std::span<const int> y, const DecisionTreeParams& params,
                              std::uint64_t seed = 0) {
  require_fit_inputs(x, y);
  if (params.criterion == Criterion::squared_error) {
    throw Error(ErrorCode::InvalidParameter, "classification tree needs gini or entropy");
  }
  const auto target = labels_as_targets(y);
  TreeGrowOptions options;
  options.seed = seed;
  return grow_tree(x, target, {}, iota_indices(x.rows()), params, options);
}

}  // namespace urlspam
