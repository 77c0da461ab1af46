// SPDX-License-Identifier: Apache-2.0
#include "cirnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "cirnn/error.hpp"

namespace cirnn {
namespace {

template <typename Range>
std::string list_of(const Range& values) {
  std::string out = "{";
  for (auto v : values) out += (out.size() > 1 ? ", " : "") + std::to_string(v);
  return out + "}";
}

template <typename Range, typename T>
bool contains(const Range& values, T v) {
  return std::find(std::begin(values), std::end(values), v) != std::end(values);
}

// Per-window loss and gradient in model space.
template <typename P>
P sample_gradient(const P& p, const Window& w, const Matrix& xs, LossScope scope, double& loss_out) {
  ForwardResult fwd;
  if constexpr (std::is_same_v<P, CiRnnParams>) {
    fwd = forward_sequence(p, xs, w.zs);
  } else {
    fwd = forward_sequence(p, xs);
  }
  if (scope == LossScope::final_step) {
    const Vector y{w.y};
    loss_out = loss(fwd.y_hat, y);
    if constexpr (std::is_same_v<P, CiRnnParams>) {
      return backward(p, fwd.trace, y);
    } else {
      return backward_gru(p, fwd.trace, y);
    }
  }
  if (w.ys.size() != fwd.trace.steps.size()) {
    throw DataError("window of unit " + std::to_string(w.unit_id) + " lacks per-step targets");
  }
  std::vector<Vector> ys;
  ys.reserve(w.ys.size());
  loss_out = 0.0;
  for (std::size_t t = 0; t < w.ys.size(); ++t) {
    ys.push_back(Vector{w.ys[t]});
    loss_out += loss(fwd.trace.steps[t].y_hat, ys.back());
  }
  if constexpr (std::is_same_v<P, CiRnnParams>) {
    return backward(p, fwd.trace, std::span<const Vector>(ys));
  } else {
    return backward_gru(p, fwd.trace, std::span<const Vector>(ys));
  }
}

bool appends_context(const TrainConfig& cfg, bool is_cirnn) { return cfg.context_features && !is_cirnn; }

template <typename P>
P batch_gradient_impl(const P& p, const SequenceBatch& data, std::span<const std::size_t> indices,
                      const TrainConfig& cfg, const std::vector<Matrix>* inputs, double* mean_loss) {
  if (indices.empty()) throw DataError("batch_gradient: empty batch");
  constexpr bool is_cirnn = std::is_same_v<P, CiRnnParams>;
  const bool append = appends_context(cfg, is_cirnn);

  std::vector<P> grads(indices.size());
  std::vector<double> losses(indices.size(), 0.0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const Window& w = data.windows.at(indices[b]);
      if (inputs != nullptr) {
        grads[b] = sample_gradient(p, w, (*inputs)[indices[b]], cfg.loss_scope, losses[b]);
      } else {
        grads[b] = sample_gradient(p, w, model_inputs(w, append), cfg.loss_scope, losses[b]);
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(cfg.threads, 1, indices.size());
  if (n_threads == 1) {
    work(0, indices.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (indices.size() + n_threads - 1) / n_threads;
    for (std::size_t begin = 0; begin < indices.size(); begin += chunk) {
      pool.emplace_back(work, begin, std::min(indices.size(), begin + chunk));
    }
  }

  // Reduce in index order so the result does not depend on the thread count.
  P total = zeros_like(p);
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < indices.size(); ++b) {
    accumulate(total, grads[b]);
    loss_sum += losses[b];
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  scale(total, inv);
  if (mean_loss != nullptr) *mean_loss = loss_sum * inv;
  return total;
}

template <typename P>
TrainResult train_impl(P params, Rng& rng, const SequenceBatch& train_data, const SequenceBatch& val_data,
                       const TrainConfig& cfg, const EpochCallback& on_epoch) {
  constexpr bool is_cirnn = std::is_same_v<P, CiRnnParams>;
  const bool append = appends_context(cfg, is_cirnn);

  std::vector<Matrix> inputs;
  inputs.reserve(train_data.windows.size());
  for (const Window& w : train_data.windows) inputs.push_back(model_inputs(w, append));

  std::vector<std::size_t> order(train_data.windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  OptimizerState opt = make_optimizer(cfg.optimizer, cfg.learning_rate, cfg.constants);
  TrainResult result;
  result.model = params;
  double best_rmse = std::numeric_limits<double>::infinity();
  const bool has_val = !val_data.windows.empty();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      double batch_loss = 0.0;
      P grad = batch_gradient_impl(params, train_data, batch, cfg, &inputs, &batch_loss);
      if (!std::isfinite(batch_loss)) {
        const Window& first = train_data.windows[batch.front()];
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                            std::to_string(start) + " (unit " + std::to_string(first.unit_id) +
                            ", end cycle " + std::to_string(first.end_cycle) + ")");
      }
      loss_sum += batch_loss * static_cast<double>(batch.size());
      if (cfg.clip_norm) {
        const double norm = global_norm(grad);
        if (norm > *cfg.clip_norm) scale(grad, *cfg.clip_norm / norm);
      }
      optimizer_step(opt, params, grad);
    }

    EpochLog row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    if (has_val) {
      std::tie(row.val_rmse, row.val_score) = validation_metrics(Model{params}, val_data, cfg);
    } else {
      row.val_rmse = std::numeric_limits<double>::quiet_NaN();
      row.val_score = std::numeric_limits<double>::quiet_NaN();
    }
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);

    if (!has_val) {
      result.model = params;
      result.best_epoch = epoch;
      continue;
    }
    if (row.val_rmse < best_rmse) {
      best_rmse = row.val_rmse;
      result.model = params;
      result.best_epoch = epoch;
    } else if (epoch - result.best_epoch >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (!cfg.keep_best) result.model = params;
  return result;
}

}  // namespace

std::vector<std::string> check_grid(const TrainConfig& cfg) {
  if (!contains(kHiddenGrid, cfg.hidden_units)) {
    throw ConfigError("hidden units " + std::to_string(cfg.hidden_units) + " not in allowed set " +
                      list_of(kHiddenGrid));
  }
  if (!contains(kSeqLenGrid, cfg.sequence_length)) {
    throw ConfigError("sequence length " + std::to_string(cfg.sequence_length) + " not in allowed set " +
                      list_of(kSeqLenGrid));
  }
  if (!contains(kBatchGrid, cfg.batch_size)) {
    throw ConfigError("batch size " + std::to_string(cfg.batch_size) + " not in allowed set " +
                      list_of(kBatchGrid));
  }
  std::vector<std::string> warnings;
  if (cfg.learning_rate < kLearningRateMin || cfg.learning_rate > kLearningRateMax) {
    warnings.push_back("learning rate " + format_double(cfg.learning_rate) +
                       " is outside the tuning range [1e-05, 0.001]");
  }
  return warnings;
}

void validate(const TrainConfig& cfg) {
  if (cfg.hidden_units == 0) throw ConfigError("hidden units must be positive");
  if (cfg.sequence_length == 0) throw ConfigError("sequence length must be positive");
  if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
  if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (cfg.clip_norm && !(*cfg.clip_norm > 0.0)) throw ConfigError("clip threshold must be positive");
  if (cfg.basis_degree == 0) throw ConfigError("basis degree must be >= 1");
}

CiRnnGradients batch_gradient(const CiRnnParams& p, const SequenceBatch& data,
                              std::span<const std::size_t> indices, const TrainConfig& cfg,
                              double* mean_loss) {
  return batch_gradient_impl(p, data, indices, cfg, nullptr, mean_loss);
}

GruGradients batch_gradient(const GruParams& p, const SequenceBatch& data,
                            std::span<const std::size_t> indices, const TrainConfig& cfg,
                            double* mean_loss) {
  return batch_gradient_impl(p, data, indices, cfg, nullptr, mean_loss);
}

std::pair<double, double> validation_metrics(const Model& model, const SequenceBatch& data,
                                             const TrainConfig& cfg) {
  const bool is_cirnn = kind_of(model) == ModelKind::cirnn;
  std::vector<double> predictions, truths;
  predictions.reserve(data.windows.size());
  truths.reserve(data.windows.size());
  for (const Window& w : data.windows) {
    const Matrix xs = model_inputs(w, appends_context(cfg, is_cirnn));
    const Vector y_hat = predict(model, xs, is_cirnn ? &w.zs : nullptr);
    predictions.push_back(data.target.to_raw(y_hat[0]));
    truths.push_back(data.target.to_raw(w.y));
  }
  return {rmse(predictions, truths), score(predictions, truths, cfg.score_constants)};
}

TrainResult train(ModelKind kind, const SequenceBatch& train_data, const SequenceBatch& val_data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate(cfg);
  if (train_data.windows.empty()) throw DataError("train: empty training set");
  for (const Window& w : train_data.windows) {
    if (w.xs.rows() != cfg.sequence_length) {
      throw DataError("train: window of length " + std::to_string(w.xs.rows()) +
                      " does not match sequence length " + std::to_string(cfg.sequence_length));
    }
  }

  Rng rng(cfg.seed);
  const std::size_t n_y = 1;
  if (kind == ModelKind::cirnn) {
    if (train_data.n_z == 0) throw DataError("train: CiRNN needs context features");
    const BasisSpec basis = build_spec(BasisKind::polynomial, cfg.basis_degree, train_data.n_z);
    return train_impl(init_cirnn(train_data.n_x, basis, cfg.hidden_units, n_y, rng), rng, train_data,
                      val_data, cfg, on_epoch);
  }
  const std::size_t n_x = train_data.n_x + (cfg.context_features ? train_data.n_z : 0);
  return train_impl(init_gru(n_x, cfg.hidden_units, n_y, rng), rng, train_data, val_data, cfg, on_epoch);
}

void write_loss_log_header(std::ostream& out) { out << "epoch,train_loss,val_rmse,val_score\n"; }

void write_loss_log_row(std::ostream& out, const EpochLog& row) {
  out << row.epoch << ',' << format_double(row.train_loss) << ',' << format_double(row.val_rmse) << ','
      << format_double(row.val_score) << '\n';
}

}  // namespace cirnn
