#pragma once

// Shared data for the test suites: the small worked examples and random instance generators.

#include <cstdint>
#include <random>
#include <vector>

#include "boxmon/geometry.hpp"
#include "boxmon/monitor.hpp"

namespace boxmon::testing {

/// The five 2D points used for the box, sub-box and clustering coverage examples.
inline PointSet five_points() { return {{0.1, 0.5}, {0.1, 1.0}, {0.2, 0.8}, {0.6, 0.2}, {1.0, 0.3}}; }

/// Index blocks {first three}, {last two} of five_points().
inline std::vector<std::vector<std::size_t>> five_points_blocks() { return {{0, 1, 2}, {3, 4}}; }

/// Toy network data: layer-2 features (y1, y2) with class ids 1 and 2.
inline std::vector<FeatureRecord> toy_network_records() {
  return {
      {{0.078, 0.062}, 1, 1}, {{0.222, 0.162}, 1, 1}, {{0.69, 0.61}, 1, 1},   {{0.79, 0.71}, 1, 1},
      {{0.289, 0.281}, 2, 1}, {{0.389, 0.381}, 2, 1}, {{0.566, 0.614}, 2, 2}, {{0.666, 0.714}, 2, 2},
  };
}

/// Tau pair that yields two correct clusters and one incorrect cluster on toy_network_records().
inline constexpr double kToyTauCorrect = 0.7;
inline constexpr double kToyTauIncorrect = 1.0;

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

inline std::size_t uniform_index(std::mt19937_64& gen, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
}

/// Gaussian blobs: `per_blob` points around each of `centers`.
inline PointSet blobs(std::mt19937_64& gen, const std::vector<Vector>& centers, std::size_t per_blob, double sigma) {
  PointSet pts;
  std::normal_distribution<double> noise(0.0, sigma);
  for (const auto& c : centers) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      Vector p = c;
      for (double& x : p) x += noise(gen);
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

}  // namespace boxmon::testing
