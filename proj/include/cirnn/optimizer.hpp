// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cirnn/cells.hpp"

namespace cirnn {

enum class OptimizerKind { sgd, adam, rmsprop };

std::string to_string(OptimizerKind kind);
/// Accepts "sgd", "adam", "rmsprop" in any letter case.
OptimizerKind parse_optimizer_kind(const std::string& name);

struct OptimizerConstants {
  double rho = 0.9;      // RMSProp decay
  double beta1 = 0.9;    // Adam first moment
  double beta2 = 0.999;  // Adam second moment
  double epsilon = 1e-8;

  friend bool operator==(const OptimizerConstants&, const OptimizerConstants&) = default;
};

/// Update rules:
///   sgd:     θ ← θ − η g
///   rmsprop: v ← ρ v + (1 − ρ) g²;  θ ← θ − η g / √(v + ε)
///   adam:    m ← β1 m + (1 − β1) g;  v ← β2 v + (1 − β2) g²;
///            θ ← θ − η m̂ / (√v̂ + ε) with m̂ = m / (1 − β1^t), v̂ = v / (1 − β2^t)
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  OptimizerConstants constants;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first;   // per parameter group (adam)
  std::vector<std::vector<double>> second;  // per parameter group (adam, rmsprop)
};

/// Throws ConfigError unless learning_rate > 0.
OptimizerState make_optimizer(OptimizerKind kind, double learning_rate,
                              const OptimizerConstants& constants = {});

/// Applies one update in place. Throws TrainingError naming the parameter
/// group if any gradient entry is non-finite; parameters are untouched then.
void optimizer_step(OptimizerState& state, GruParams& params, const GruGradients& grads);
void optimizer_step(OptimizerState& state, CiRnnParams& params, const CiRnnGradients& grads);

}  // namespace cirnn
