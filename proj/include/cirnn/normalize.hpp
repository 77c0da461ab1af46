// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cirnn/tensor.hpp"

namespace cirnn {

/// Per-column min and max of a fit split. Columns with max == min are
/// constant and map to 0.
struct MinMaxStats {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t size() const noexcept { return min.size(); }
  bool constant(std::size_t j) const noexcept { return !(max[j] > min[j]); }

  friend bool operator==(const MinMaxStats&, const MinMaxStats&) = default;
};

/// Fits on the rows of data. Constant columns add a warning when a sink is given.
MinMaxStats fit_minmax(const Matrix& data, std::vector<std::string>* warnings = nullptr);
/// (v - min) / (max - min). Values outside the fit range are not clipped.
Matrix apply_minmax(const MinMaxStats& stats, const Matrix& data);
Matrix invert_minmax(const MinMaxStats& stats, const Matrix& data);

/// Operating-regime statistics for contextual normalization: k-means
/// centroids over the context columns and, per cluster, the mean and range
/// (max - min) of every feature.
struct RegimeStats {
  Matrix centroids;                  // k x n_context
  Matrix mean;                       // k x n_features
  Matrix range;                      // k x n_features, 0 marks a constant feature
  std::vector<std::uint64_t> counts;  // fit rows per cluster

  std::size_t k() const noexcept { return centroids.rows(); }

  /// Nearest centroid whose cluster saw data during fitting.
  std::size_t regime_of(std::span<const double> context) const;

  friend bool operator==(const RegimeStats&, const RegimeStats&) = default;
};

/// Clusters the context rows into k regimes and collects per-regime feature
/// statistics. Throws DataError on empty input or too few distinct contexts.
RegimeStats fit_regimes(const Matrix& context, const Matrix& features, std::size_t k, std::uint64_t seed);

/// (v - mean_c) / range_c with c the regime of the row's context; constant
/// features map to 0.
Matrix contextual_normalize(const RegimeStats& stats, const Matrix& context, const Matrix& features);
/// Inverse of contextual_normalize; constant features come back as the mean.
Matrix contextual_denormalize(const RegimeStats& stats, const Matrix& context, const Matrix& normalized);

/// Trailing moving average; the first window - 1 points average the prefix
/// that exists. window must be >= 1.
std::vector<double> smooth(std::span<const double> series, std::size_t window = 3);
/// Column-wise smooth over the rows of one unit.
Matrix smooth_rows(const Matrix& data, std::size_t window = 3);

}  // namespace cirnn
