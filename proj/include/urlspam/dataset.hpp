#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "urlspam/csv.hpp"
#include "urlspam/error.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/parallel.hpp"
#include "urlspam/random.hpp"
#include "urlspam/url_features.hpp"

namespace urlspam {

struct LabeledExample {
  std::string url;
  int label = 0;
  FeatureVector features;
};

/// Labeled feature matrix in the canonical 13-column schema. Immutable once
/// built; `subset` produces new datasets.
class Dataset {
 public:
  Dataset() = default;

  /// Extracts features for every URL. Throws EmptyUrl on any empty URL.
  Dataset(std::vector<std::string> urls, Labels labels)
      : labels_(std::move(labels)), urls_(std::move(urls)) {
    if (urls_.size() != labels_.size()) {
      throw Error(ErrorCode::LengthMismatch, "urls and labels differ in length");
    }
    require_binary(labels_);
    features_ = Matrix(urls_.size(), kFeatureCount);
    parallel_for(urls_.size(), [&](std::size_t i) {
      const auto values = extract_features(urls_[i]).to_array();
      std::copy(values.begin(), values.end(), features_.row(i).begin());
    });
  }

  /// Dataset over precomputed features, e.g. synthetic tasks.
  Dataset(Matrix features, Labels labels, std::vector<std::string> urls = {})
      : features_(std::move(features)), labels_(std::move(labels)), urls_(std::move(urls)) {
    if (features_.rows() != labels_.size() || (!urls_.empty() && urls_.size() != labels_.size())) {
      throw Error(ErrorCode::LengthMismatch, "features, labels and urls differ in length");
    }
    if (!features_.empty() && features_.cols() != kFeatureCount) {
      throw Error(ErrorCode::LengthMismatch, "feature matrix must have 13 columns");
    }
    require_binary(labels_);
  }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const Matrix& features() const noexcept { return features_; }
  const Labels& labels() const noexcept { return labels_; }
  const std::vector<std::string>& urls() const noexcept { return urls_; }
  static constexpr const auto& feature_names() noexcept { return kFeatureNames; }

  std::size_t n_spam() const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
  }

  LabeledExample example(std::size_t i) const {
    LabeledExample ex;
    ex.url = urls_.empty() ? std::string() : urls_[i];
    ex.label = labels_[i];
    const auto r = features_.row(i);
    auto& f = ex.features;
    f.url_length = r[0], f.has_subscribe = r[1], f.contains_hash = r[2], f.num_digits = r[3];
    f.non_https = r[4], f.num_words = r[5], f.entropy = r[6], f.num_params = r[7];
    f.num_fragments = r[8], f.num_subdomains = r[9], f.num_pct20 = r[10], f.num_at = r[11];
    f.has_ip = r[12];
    return ex;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features_ = features_.select_rows(indices);
    out.labels_ = select(std::span<const int>(labels_), indices);
    if (!urls_.empty()) out.urls_ = select(std::span<const std::string>(urls_), indices);
    return out;
  }

 private:
  Matrix features_;
  Labels labels_;
  std::vector<std::string> urls_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

struct LoadSummary {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t skipped = 0;

  std::string to_text() const {
    std::ostringstream os;
    os << "total: " << total << "\nkept: " << kept << "\nskipped: " << skipped << "\n";
    return os.str();
  }
};

struct CsvColumns {
  std::string url = "url";
  std::string label = "is_spam";
};

namespace detail {
inline std::optional<int> parse_label(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return std::nullopt;
  text = text.substr(first, text.find_last_not_of(ws) - first + 1);
  std::string lower(text);
  for (char& c : lower) c = ascii_lower(c);
  if (lower == "true" || lower == "1") return 1;
  if (lower == "false" || lower == "0") return 0;
  return std::nullopt;
}
}  // namespace detail

inline Dataset load_csv(std::istream& in, const CsvColumns& columns, LoadSummary& summary) {
  summary = {};
  csv::Row header;
  if (!csv::read_row(in, header)) throw Error(ErrorCode::MissingColumn, columns.url);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  auto find_column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t url_col = find_column(columns.url);
  const std::size_t label_col = find_column(columns.label);

  std::vector<std::string> urls;
  Labels labels;
  csv::Row row;
  while (csv::read_row(in, row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    ++summary.total;
    if (row.size() <= std::max(url_col, label_col)) {
      ++summary.skipped;
      continue;
    }
    const auto label = detail::parse_label(row[label_col]);
    if (!label) {
      ++summary.skipped;
      continue;
    }
    try {
      urls.push_back(RawUrl(row[url_col]).text());
    } catch (const Error&) {
      ++summary.skipped;
      continue;
    }
    labels.push_back(*label);
    ++summary.kept;
  }
  if (summary.kept == 0) {
    throw Error(ErrorCode::AllRowsMalformed, std::to_string(summary.total) + " rows, none usable");
  }
  return Dataset(std::move(urls), std::move(labels));
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvColumns& columns,
                        LoadSummary& summary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return load_csv(in, columns, summary);
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvColumns& columns = {}) {
  LoadSummary summary;
  return load_csv(path, columns, summary);
}

// ---------------------------------------------------------------------------
// Splits and folds

struct SplitConfig {
  double test_fraction = 0.20;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Partition of row indices. The test side holds round(test_fraction * n)
/// rows; when stratified, that total is apportioned to the classes by largest
/// remainder, so each class is within one row of exact proportionality.
inline SplitIndices split_indices(std::span<const int> labels, const SplitConfig& cfg) {
  const std::size_t n = labels.size();
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "test_fraction must lie in (0,1)");
  }
  require_binary(labels);
  const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(n)));
  if (n < 2 || n_test == 0 || n_test >= n) {
    throw Error(ErrorCode::DegenerateSplit, "split of " + std::to_string(n) + " rows leaves a side empty");
  }
  Rng rng(cfg.seed);
  std::vector<bool> in_test(n, false);
  if (cfg.stratified) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    if (by_class[0].empty() || by_class[1].empty()) {
      throw Error(ErrorCode::DegenerateSplit, "stratified split needs both classes");
    }
    std::array<std::size_t, 2> take{};
    std::array<double, 2> remainder{};
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
      const double exact = static_cast<double>(n_test) * static_cast<double>(by_class[c].size()) / static_cast<double>(n);
      take[c] = static_cast<std::size_t>(std::floor(exact));
      remainder[c] = exact - std::floor(exact);
      assigned += take[c];
    }
    while (assigned < n_test) {
      const int c = remainder[1] > remainder[0] ? 1 : 0;
      ++take[c];
      remainder[c] = -1.0;
      ++assigned;
    }
    for (int c = 0; c < 2; ++c) {
      shuffle(by_class[c], rng);
      for (std::size_t j = 0; j < take[c]; ++j) in_test[by_class[c][j]] = true;
    }
  } else {
    auto order = iota_indices(n);
    shuffle(order, rng);
    for (std::size_t j = 0; j < n_test; ++j) in_test[order[j]] = true;
  }
  SplitIndices out;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(i);
  return out;
}

inline std::pair<Dataset, Dataset> train_test_split(const Dataset& data, const SplitConfig& cfg) {
  const auto idx = split_indices(data.labels(), cfg);
  return {data.subset(idx.train), data.subset(idx.test)};
}

struct FoldPlan {
  int k = 0;
  std::vector<int> fold_assignment;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_assignment.size(); ++i) {
      if (fold_assignment[i] == fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_assignment.size(); ++i) {
      if (fold_assignment[i] != fold) out.push_back(i);
    }
    return out;
  }
};

/// Stratified fold assignment: each class is shuffled, then dealt round-robin
/// across folds, the positives continuing where the negatives stopped. Fold
/// sizes differ by at most one and so do per-fold class counts.
inline FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidParameter, "k must be at least 2");
  require_binary(labels);
  if (labels.size() < static_cast<std::size_t>(k)) {
    const int minority = std::count(labels.begin(), labels.end(), 1) * 2 <
                                 static_cast<std::ptrdiff_t>(labels.size())
                             ? 1
                             : 0;
    throw Error(ErrorCode::TooFewExamples, "class " + std::to_string(minority) + " cannot fill " +
                                               std::to_string(k) + " folds from " +
                                               std::to_string(labels.size()) + " rows");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_assignment.assign(labels.size(), -1);
  Rng rng(seed);
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    shuffle(members, rng);
    for (auto i : members) plan.fold_assignment[i] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  }
  return plan;
}

inline FoldPlan stratified_kfold(const Dataset& data, int k, std::uint64_t seed) {
  return stratified_kfold(data.labels(), k, seed);
}

// ---------------------------------------------------------------------------
// Exploratory statistics

struct EdaReport {
  static constexpr double kLengthBucketWidth = 25.0;
  static constexpr std::size_t kLengthBuckets = 20;  // [0,500) then overflow
  static constexpr std::size_t kWordBuckets = 20;    // 0..19 then overflow

  std::size_t n_total = 0;
  std::size_t n_spam = 0;
  double spam_ratio = 0.0;
  std::vector<std::size_t> length_histogram;  // kLengthBuckets + 1
  std::size_t subscribe_count = 0;
  std::size_t subscribe_spam_count = 0;
  std::size_t non_https_count = 0;
  std::size_t non_https_spam_count = 0;
  std::array<std::vector<std::size_t>, 2> words_histogram_by_class;  // kWordBuckets + 1 each

  std::string to_text() const {
    std::ostringstream os;
    os << "n_total: " << n_total << "\n";
    os << "n_spam: " << n_spam << "\n";
    os << "spam_ratio: " << csv::format_double(spam_ratio) << "\n";
    os << "subscribe_count: " << subscribe_count << "\n";
    os << "subscribe_spam_count: " << subscribe_spam_count << "\n";
    os << "non_https_count: " << non_https_count << "\n";
    os << "non_https_spam_count: " << non_https_spam_count << "\n";
    os << "length_histogram:\n";
    for (std::size_t b = 0; b < length_histogram.size(); ++b) {
      const auto lo = static_cast<std::size_t>(b * kLengthBucketWidth);
      if (b < kLengthBuckets) {
        os << "  [" << lo << "," << lo + static_cast<std::size_t>(kLengthBucketWidth) << "): ";
      } else {
        os << "  [" << lo << ",inf): ";
      }
      os << length_histogram[b] << "\n";
    }
    for (int c = 0; c < 2; ++c) {
      os << "words_histogram_" << (c == 1 ? "spam" : "ham") << ":\n";
      const auto& h = words_histogram_by_class[c];
      for (std::size_t b = 0; b < h.size(); ++b) {
        os << "  " << (b < kWordBuckets ? std::to_string(b) : std::to_string(b) + "+") << ": " << h[b] << "\n";
      }
    }
    return os.str();
  }
};

inline EdaReport eda_report(const Dataset& data) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no rows to analyze");
  EdaReport r;
  r.length_histogram.assign(EdaReport::kLengthBuckets + 1, 0);
  for (auto& h : r.words_histogram_by_class) h.assign(EdaReport::kWordBuckets + 1, 0);
  const Matrix& x = data.features();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.labels()[i];
    const auto row = x.row(i);
    ++r.n_total;
    r.n_spam += static_cast<std::size_t>(y);
    const auto length_bucket = std::min(EdaReport::kLengthBuckets,
                                        static_cast<std::size_t>(row[0] / EdaReport::kLengthBucketWidth));
    ++r.length_histogram[length_bucket];
    if (row[1] != 0.0) {
      ++r.subscribe_count;
      r.subscribe_spam_count += static_cast<std::size_t>(y);
    }
    if (row[4] != 0.0) {
      ++r.non_https_count;
      r.non_https_spam_count += static_cast<std::size_t>(y);
    }
    const auto words_bucket = std::min(EdaReport::kWordBuckets, static_cast<std::size_t>(row[5]));
    ++r.words_histogram_by_class[y][words_bucket];
  }
  r.spam_ratio = static_cast<double>(r.n_spam) / static_cast<double>(r.n_total);
  return r;
}

}  // namespace urlspam
