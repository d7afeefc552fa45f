#pragma once

// Test-only oracles and statistics helpers. Everything here is independent
// of the library's implementation paths: the Hadamard oracle multiplies the
// explicit matrix, and the quantizer oracle enumerates both randomized
// rounding outcomes instead of sampling them.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dme/modulo_quantizer.hpp"
#include "dme/types.hpp"

namespace dme::testing {

// O(d^2) Walsh-Hadamard multiply via H(i, j) = (-1)^popcount(i & j),
// normalized by 1/sqrt(d).
inline Vector hadamard_oracle(const Vector& x) {
  const std::size_t d = x.size();
  Vector out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const int sign = (std::popcount(i & j) % 2 == 0) ? 1 : -1;
      out[i] += sign * x[j];
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& v : out) v *= scale;
  return out;
}

// Both encoder outcomes of the modulo quantizer with their probabilities.
struct MqOutcomes {
  MqWord word_low = 0;
  MqWord word_high = 0;
  double prob_high = 0.0;  // P(ztilde = ceil(x / eps))
};

inline MqOutcomes mq_enumerate(double x, const MqParams& params) {
  const double t = x / params.epsilon;
  MqOutcomes outcomes;
  const double nearest = std::round(t);
  const long long k = params.k;
  const auto word = [k](long long z) {
    return static_cast<MqWord>(((z % k) + k) % k);
  };
  if (std::abs(t - nearest) <= 1e-12 * std::max(1.0, std::abs(t))) {
    const long long z = static_cast<long long>(nearest);
    outcomes.word_low = outcomes.word_high = word(z);
    outcomes.prob_high = 0.0;
    return outcomes;
  }
  const long long zl = static_cast<long long>(std::floor(t));
  outcomes.word_low = word(zl);
  outcomes.word_high = word(zl + 1);
  outcomes.prob_high = t - static_cast<double>(zl);
  return outcomes;
}

struct RunningStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double variance() const {
    const double m = mean();
    return std::max(0.0, sum_sq / static_cast<double>(count) - m * m);
  }
  double stderr_mean() const {
    return std::sqrt(variance() / static_cast<double>(count));
  }
};

inline double l1_dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double sq_dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return s;
}

inline double l2_norm(const Vector& a) {
  double s = 0.0;
  for (const double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace dme::testing
