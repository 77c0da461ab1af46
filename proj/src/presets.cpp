// SPDX-License-Identifier: Apache-2.0
#include "cirnn/presets.hpp"

#include <array>

#include "cirnn/error.hpp"

namespace cirnn {
namespace {

constexpr ModelKind C = ModelKind::cirnn;
constexpr ModelKind G = ModelKind::gru;
constexpr OptimizerKind ADAM = OptimizerKind::adam;
constexpr OptimizerKind RMS = OptimizerKind::rmsprop;

// name, subset, kind, contextual norm, context features, hidden, seq, batch, lr, optimizer
constexpr std::array<Preset, 18> kPresets = {{
    {"CiRNN_D1", "FD001", C, false, true, 15, 20, 64, 1e-2, ADAM},
    {"GRU_D1_CxF", "FD001", G, false, true, 25, 20, 128, 5e-3, ADAM},
    {"GRU_D1", "FD001", G, false, false, 10, 15, 64, 9e-3, ADAM},

    {"CiRNN_D2", "FD002", C, true, true, 20, 15, 64, 5e-3, RMS},
    {"CiRNN_D2_CxF", "FD002", C, false, true, 15, 20, 128, 5e-3, RMS},
    {"GRU_D2", "FD002", G, false, false, 25, 15, 128, 1e-2, ADAM},
    {"GRU_D2_CxF", "FD002", G, false, true, 30, 15, 128, 5e-3, ADAM},
    {"GRU_D2_CxN", "FD002", G, true, false, 20, 10, 64, 8e-3, RMS},
    {"GRU_D2_CxN_CxF", "FD002", G, true, true, 15, 10, 64, 9e-3, RMS},

    {"CiRNN_D3", "FD003", C, false, true, 30, 10, 64, 8e-3, RMS},
    {"GRU_D3_CxF", "FD003", G, false, true, 15, 10, 64, 2e-3, RMS},
    {"GRU_D3", "FD003", G, false, false, 20, 10, 64, 5e-3, RMS},

    {"CiRNN_D4", "FD004", C, true, true, 15, 10, 128, 8e-3, RMS},
    {"CiRNN_D4_CxF", "FD004", C, false, true, 25, 20, 128, 9e-3, ADAM},
    {"GRU_D4", "FD004", G, false, false, 25, 20, 128, 8e-3, ADAM},
    {"GRU_D4_CxF", "FD004", G, false, true, 25, 15, 256, 5e-3, ADAM},
    {"GRU_D4_CxN", "FD004", G, true, false, 20, 15, 256, 1e-2, RMS},
    {"GRU_D4_CxN_CxF", "FD004", G, true, true, 15, 15, 256, 9e-3, ADAM},
}};

}  // namespace

std::span<const Preset> presets() noexcept { return kPresets; }

const Preset& find_preset(std::string_view name) {
  for (const Preset& p : kPresets) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const Preset& p : kPresets) known += (known.empty() ? "" : ", ") + std::string(p.name);
  throw ConfigError("unknown preset '" + std::string(name) + "'; known presets: " + known);
}

void apply_preset(const Preset& preset, TrainConfig& cfg) {
  cfg.hidden_units = preset.hidden_units;
  cfg.sequence_length = preset.sequence_length;
  cfg.batch_size = preset.batch_size;
  cfg.learning_rate = preset.learning_rate;
  cfg.optimizer = preset.optimizer;
  cfg.context_features = preset.kind == ModelKind::gru && preset.context_features;
}

}  // namespace cirnn
