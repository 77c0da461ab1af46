// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cirnn/cells.hpp"
#include "cirnn/dataset.hpp"
#include "cirnn/gradients.hpp"
#include "cirnn/metrics.hpp"
#include "cirnn/optimizer.hpp"

namespace cirnn {

struct TrainConfig {
  std::size_t hidden_units = 20;
  std::size_t sequence_length = 15;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  OptimizerConstants constants;
  std::size_t epochs = 200;   // upper bound; early stopping may end sooner
  std::size_t patience = 10;  // epochs without validation RMSE improvement
  bool keep_best = true;      // return the best validation epoch, else the last
  std::uint64_t seed = 0;
  std::optional<double> clip_norm = 5.0;
  LossScope loss_scope = LossScope::final_step;
  std::size_t basis_degree = 2;
  bool context_features = false;  // plain GRU only: append z to x
  std::size_t threads = 1;
  ScoreConstants score_constants;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Tuning grid for hidden units, sequence length and batch size.
inline constexpr std::size_t kHiddenGrid[] = {10, 15, 20, 25, 30};
inline constexpr std::size_t kSeqLenGrid[] = {10, 15, 20};
inline constexpr std::size_t kBatchGrid[] = {64, 128, 256};
inline constexpr double kLearningRateMin = 1e-5;
inline constexpr double kLearningRateMax = 1e-3;

/// Throws ConfigError listing the allowed set when hidden units, sequence
/// length or batch size are off the grid. Learning rates outside the tuning
/// range are permitted and returned as warnings.
std::vector<std::string> check_grid(const TrainConfig& cfg);

/// Basic sanity (positive sizes, lr > 0, ...). Throws ConfigError.
void validate(const TrainConfig& cfg);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-window loss in model space
  double val_rmse = 0.0;    // raw cycles; NaN without validation data
  double val_score = 0.0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  Model model;  // best validation epoch (or the last one, see keep_best)
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Mini-batch training with batch-averaged gradients, global-norm clipping
/// and early stopping on validation RMSE. Deterministic for a fixed seed,
/// independent of the thread count.
TrainResult train(ModelKind kind, const SequenceBatch& train_data, const SequenceBatch& val_data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Mean gradient (and mean loss) over the selected windows.
CiRnnGradients batch_gradient(const CiRnnParams& p, const SequenceBatch& data,
                              std::span<const std::size_t> indices, const TrainConfig& cfg,
                              double* mean_loss = nullptr);
GruGradients batch_gradient(const GruParams& p, const SequenceBatch& data,
                            std::span<const std::size_t> indices, const TrainConfig& cfg,
                            double* mean_loss = nullptr);

/// Flat RMSE and summed score over all windows in raw cycles.
std::pair<double, double> validation_metrics(const Model& model, const SequenceBatch& data,
                                             const TrainConfig& cfg);

void write_loss_log_header(std::ostream& out);
void write_loss_log_row(std::ostream& out, const EpochLog& row);

}  // namespace cirnn
