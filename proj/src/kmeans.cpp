// SPDX-License-Identifier: Apache-2.0
#include "cirnn/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "cirnn/error.hpp"
#include "cirnn/rng.hpp"

namespace cirnn {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

// k-means++: first centre uniform, then each next one drawn with probability
// proportional to the squared distance to the nearest chosen centre.
Matrix seed_centroids(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t pick = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], squared_distance(points.row(i), centroids.row(c)));
      total += dist[i];
    }
    // total > 0 is guaranteed while fewer than the distinct count are chosen.
    const double target = rng.uniform() * total;
    double acc = 0.0;
    pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] <= 0.0) continue;
      acc += dist[i];
      pick = i;
      if (acc > target) break;
    }
  }
  return centroids;
}

}  // namespace

std::size_t count_distinct_rows(const Matrix& points) {
  std::vector<std::size_t> order(points.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = points.row(a), rb = points.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point) {
  if (point.size() != centroids.cols()) {
    throw ShapeError("nearest_centroid: point of length " + std::to_string(point.size()) +
                     " vs centroids " + shape_string(centroids));
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  if (k == 0) throw DataError("kmeans: k must be positive");
  const std::size_t distinct = count_distinct_rows(points);
  if (k > distinct) {
    throw DataError("kmeans: k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct) +
                    " distinct points");
  }
  Rng rng(seed);
  KMeansResult res;
  res.centroids = seed_centroids(points, k, rng);
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  res.assignments.assign(n, k);  // sentinel: nothing assigned yet

  for (res.iterations = 0; res.iterations < max_iter;) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_centroid(res.centroids, points.row(i));
      if (c != res.assignments[i]) {
        res.assignments[i] = c;
        changed = true;
      }
    }
    ++res.iterations;
    if (!changed) {
      res.converged = true;
      break;
    }
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = res.assignments[i];
      ++counts[c];
      auto row = sums.row(c);
      for (std::size_t j = 0; j < d; ++j) row[j] += points(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) res.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
  }
  return res;
}

double purity(std::span<const std::size_t> assignments, std::span<const std::size_t> labels) {
  if (assignments.size() != labels.size() || assignments.empty()) {
    throw ShapeError("purity: need equal, non-empty assignment and label lists");
  }
  std::map<std::size_t, std::map<std::size_t, std::size_t>> table;
  for (std::size_t i = 0; i < assignments.size(); ++i) ++table[assignments[i]][labels[i]];
  std::size_t majority = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [label, count] : counts) best = std::max(best, count);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(assignments.size());
}

}  // namespace cirnn
