// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cirnn/tensor.hpp"

namespace cirnn {

struct KMeansResult {
  Matrix centroids;  // k x d
  std::vector<std::size_t> assignments;
  std::size_t iterations = 0;
  bool converged = false;  // assignments stopped changing before the cap
};

/// Lloyd's algorithm from k-means++ seeding. Stops when no assignment changes
/// or after max_iter iterations. A cluster that empties keeps its previous
/// centroid. Throws DataError if k is 0 or exceeds the number of distinct
/// points.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100);

/// Index of the closest centroid (squared Euclidean; lowest index on ties).
std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point);

std::size_t count_distinct_rows(const Matrix& points);

/// Fraction of points whose cluster's majority label equals their own label.
double purity(std::span<const std::size_t> assignments, std::span<const std::size_t> labels);

}  // namespace cirnn
