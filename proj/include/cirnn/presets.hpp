// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>

#include "cirnn/cells.hpp"
#include "cirnn/optimizer.hpp"
#include "cirnn/trainer.hpp"

namespace cirnn {

/// A named model configuration. contextual_norm selects per-regime sensor
/// normalization at preprocessing; context_features feeds the settings to the
/// model (always true for a CiRNN, where they drive the basis).
struct Preset {
  std::string_view name;
  std::string_view subset;
  ModelKind kind;
  bool contextual_norm;
  bool context_features;
  std::size_t hidden_units;
  std::size_t sequence_length;
  std::size_t batch_size;
  double learning_rate;
  OptimizerKind optimizer;
};

/// The eighteen published configurations, FD001 through FD004.
std::span<const Preset> presets() noexcept;

/// Case-sensitive lookup. Throws ConfigError listing the known names.
const Preset& find_preset(std::string_view name);

/// Copies the preset's model and optimizer settings into cfg.
void apply_preset(const Preset& preset, TrainConfig& cfg);

}  // namespace cirnn
