#pragma once

#include <random>

#include "htrace/overlap.hpp"

namespace htrace::testing {

// Instances where coverage alone separates the classes (positives >= 0.6,
// negatives <= 0.4); the other features are noise.
inline overlap::Dataset separable_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  overlap::Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i % 4 == 0;
    overlap::FeatureRow row{};
    row[0] = u(rng) < 0.5 ? 1 : 0;
    row[1] = u(rng) < 0.5 ? 1 : 0;
    row[2] = positive ? 0.6 + 0.4 * u(rng) : 0.4 * u(rng);
    row[3] = std::log1p(40 * u(rng));
    row[4] = u(rng);
    row[5] = u(rng);
    d.rows.push_back(row);
    d.labels.push_back(positive ? 1.0 : 0.0);
  }
  return d;
}

inline double training_accuracy(const overlap::LogisticModel& model, const overlap::Dataset& d) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const bool predicted = model.probability(d.rows[i]) >= 0.5;
    if (predicted == (d.labels[i] > 0.5)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(d.rows.size());
}

}  // namespace htrace::testing
