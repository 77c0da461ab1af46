// SPDX-License-Identifier: Apache-2.0
#include "cirnn/normalize.hpp"

#include <algorithm>
#include <limits>

#include "cirnn/error.hpp"
#include "cirnn/kmeans.hpp"

namespace cirnn {
namespace {

void require_cols(const Matrix& data, std::size_t cols, const char* what) {
  if (data.cols() != cols) {
    throw ShapeError(std::string(what) + ": data " + shape_string(data) + " vs " + std::to_string(cols) +
                     " fitted columns");
  }
}

void require_rows(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows()) {
    throw ShapeError(std::string(what) + ": context " + shape_string(a) + " vs features " + shape_string(b));
  }
}

}  // namespace

MinMaxStats fit_minmax(const Matrix& data, std::vector<std::string>* warnings) {
  if (data.rows() == 0) throw DataError("fit_minmax: no rows");
  MinMaxStats stats;
  stats.min.assign(data.cols(), std::numeric_limits<double>::infinity());
  stats.max.assign(data.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      stats.min[j] = std::min(stats.min[j], data(i, j));
      stats.max[j] = std::max(stats.max[j], data(i, j));
    }
  }
  if (warnings != nullptr) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (stats.constant(j)) warnings->push_back("column " + std::to_string(j) + " is constant; mapped to 0");
    }
  }
  return stats;
}

Matrix apply_minmax(const MinMaxStats& stats, const Matrix& data) {
  require_cols(data, stats.size(), "apply_minmax");
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      out(i, j) = stats.constant(j) ? 0.0 : (data(i, j) - stats.min[j]) / (stats.max[j] - stats.min[j]);
    }
  }
  return out;
}

Matrix invert_minmax(const MinMaxStats& stats, const Matrix& data) {
  require_cols(data, stats.size(), "invert_minmax");
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      out(i, j) = stats.constant(j) ? stats.min[j] : stats.min[j] + data(i, j) * (stats.max[j] - stats.min[j]);
    }
  }
  return out;
}

std::size_t RegimeStats::regime_of(std::span<const double> context) const {
  const std::size_t c = nearest_centroid(centroids, context);
  if (counts[c] > 0) return c;
  // Fall back to the closest cluster that has statistics.
  std::size_t best = k();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k(); ++i) {
    if (counts[i] == 0) continue;
    double d = 0.0;
    for (std::size_t j = 0; j < context.size(); ++j) {
      const double diff = context[j] - centroids(i, j);
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best == k()) throw DataError("regime_of: no cluster has statistics");
  return best;
}

RegimeStats fit_regimes(const Matrix& context, const Matrix& features, std::size_t k, std::uint64_t seed) {
  require_rows(context, features, "fit_regimes");
  if (context.rows() == 0) throw DataError("fit_regimes: no rows");
  const KMeansResult clusters = kmeans(context, k, seed);

  RegimeStats stats;
  stats.centroids = clusters.centroids;
  stats.counts.assign(k, 0);
  const std::size_t n_f = features.cols();
  Matrix lo(k, n_f, std::numeric_limits<double>::infinity());
  Matrix hi(k, n_f, -std::numeric_limits<double>::infinity());
  stats.mean = Matrix(k, n_f);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const std::size_t c = clusters.assignments[i];
    ++stats.counts[c];
    for (std::size_t j = 0; j < n_f; ++j) {
      stats.mean(c, j) += features(i, j);
      lo(c, j) = std::min(lo(c, j), features(i, j));
      hi(c, j) = std::max(hi(c, j), features(i, j));
    }
  }
  stats.range = Matrix(k, n_f);
  for (std::size_t c = 0; c < k; ++c) {
    if (stats.counts[c] == 0) continue;
    for (std::size_t j = 0; j < n_f; ++j) {
      stats.mean(c, j) /= static_cast<double>(stats.counts[c]);
      stats.range(c, j) = hi(c, j) - lo(c, j);
    }
  }
  return stats;
}

Matrix contextual_normalize(const RegimeStats& stats, const Matrix& context, const Matrix& features) {
  require_rows(context, features, "contextual_normalize");
  require_cols(features, stats.mean.cols(), "contextual_normalize");
  Matrix out(features.rows(), features.cols());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const std::size_t c = stats.regime_of(context.row(i));
    for (std::size_t j = 0; j < features.cols(); ++j) {
      const double range = stats.range(c, j);
      out(i, j) = range > 0.0 ? (features(i, j) - stats.mean(c, j)) / range : 0.0;
    }
  }
  return out;
}

Matrix contextual_denormalize(const RegimeStats& stats, const Matrix& context, const Matrix& normalized) {
  require_rows(context, normalized, "contextual_denormalize");
  require_cols(normalized, stats.mean.cols(), "contextual_denormalize");
  Matrix out(normalized.rows(), normalized.cols());
  for (std::size_t i = 0; i < normalized.rows(); ++i) {
    const std::size_t c = stats.regime_of(context.row(i));
    for (std::size_t j = 0; j < normalized.cols(); ++j) {
      out(i, j) = stats.mean(c, j) + normalized(i, j) * stats.range(c, j);
    }
  }
  return out;
}

std::vector<double> smooth(std::span<const double> series, std::size_t window) {
  if (window == 0) throw ConfigError("smooth: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    double acc = 0.0;
    for (std::size_t i = first; i <= t; ++i) acc += series[i];
    out[t] = acc / static_cast<double>(t + 1 - first);
  }
  return out;
}

Matrix smooth_rows(const Matrix& data, std::size_t window) {
  Matrix out(data.rows(), data.cols());
  std::vector<double> column(data.rows());
  for (std::size_t j = 0; j < data.cols(); ++j) {
    for (std::size_t i = 0; i < data.rows(); ++i) column[i] = data(i, j);
    const auto smoothed = smooth(column, window);
    for (std::size_t i = 0; i < data.rows(); ++i) out(i, j) = smoothed[i];
  }
  return out;
}

}  // namespace cirnn
