#pragma once

// Synthetic noisy task over the 13 URL features.
//
// Each feature is drawn independently from a range shaped like real URL
// data (lengths around 80 characters, a handful of digits, rare flags). The
// clean label is
//
//   (70 <= url_length < 160) XOR (num_digits >= 6)
//     OR has_subscribe
//     OR (non_https AND num_params >= 1)
//
// which is axis-aligned (trees can express it) but not linearly separable.
// Each label is then flipped with probability label_noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "urlspam/dataset.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/random.hpp"
#include "urlspam/url_features.hpp"

namespace urlspam {

struct SyntheticConfig {
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  double label_noise = 0.08;
};

namespace detail {

inline double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double bernoulli(Rng& rng, double p) { return uniform01(rng) < p ? 1.0 : 0.0; }

/// floor of an exponential with the given mean.
inline double exp_count(Rng& rng, double mean) { return std::floor(-mean * std::log(1.0 - uniform01(rng))); }

}  // namespace detail

inline int synthetic_clean_label(std::span<const double> f) {
  const bool band = f[0] >= 70.0 && f[0] < 160.0;
  const bool digits = f[3] >= 6.0;
  return ((band != digits) || f[1] == 1.0 || (f[4] == 1.0 && f[7] >= 1.0)) ? 1 : 0;
}

inline Dataset make_synthetic(const SyntheticConfig& config) {
  Rng rng(config.seed);
  Matrix x(config.n, kFeatureCount);
  Labels y(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    auto f = x.row(i);
    const double length = std::clamp(std::round(std::exp(std::log(80.0) + 0.55 * detail::standard_normal(rng))), 10.0, 600.0);
    f[0] = length;
    f[1] = detail::bernoulli(rng, 0.03);
    f[2] = detail::bernoulli(rng, 0.05);
    f[3] = std::min(detail::exp_count(rng, 8.0), length);
    f[4] = detail::bernoulli(rng, 0.05);
    f[5] = std::max(1.0, std::round(length / 9.0 + 2.0 * detail::standard_normal(rng)));
    f[6] = std::clamp(4.2 + 0.35 * detail::standard_normal(rng), 0.0, std::log2(length));
    f[7] = detail::exp_count(rng, 0.6);
    f[8] = detail::bernoulli(rng, 0.04);
    f[9] = std::floor(4.0 * uniform01(rng));
    f[10] = detail::bernoulli(rng, 0.05) * (1.0 + detail::exp_count(rng, 1.0));
    f[11] = detail::bernoulli(rng, 0.02);
    f[12] = detail::bernoulli(rng, 0.02);
    if (f[12] == 1.0) f[9] = 0.0;
    y[i] = synthetic_clean_label(f);
    if (uniform01(rng) < config.label_noise) y[i] = 1 - y[i];
  }
  return Dataset(std::move(x), std::move(y));
}

}  // namespace urlspam
