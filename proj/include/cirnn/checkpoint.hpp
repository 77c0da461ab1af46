// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "cirnn/cells.hpp"
#include "cirnn/pipeline.hpp"
#include "cirnn/trainer.hpp"

namespace cirnn {

/// Binary layout, all integers and doubles little-endian:
///
///   "CIRNNCKP" magic, u32 version
///   u8 kind (0 gru, 1 cirnn); u64 n_x, n_z, n_h, n_y
///   basis: u8 kind, u64 degree, u64 n_z (exponents are rebuilt)
///   parameter groups in param_groups() order: u64 rows, u64 cols, f64 values
///   preprocessing config and fitted statistics
///   training config, then the preset name
///
/// n_x is the model's primary input width; for a plain GRU fed context
/// features it includes n_z.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  std::size_t n_z = 0;
  PreprocessConfig preprocess;
  PreprocessStats stats;
  TrainConfig train;
  std::string preset;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws FormatError on a bad magic, a version other than
/// kCheckpointVersion, truncation or inconsistent shapes.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Fitted preprocessing alone (the stats.bin of a preprocessed dataset).
void save_stats(std::ostream& out, const PreprocessConfig& cfg, const PreprocessStats& stats);
std::pair<PreprocessConfig, PreprocessStats> load_stats(std::istream& in);

}  // namespace cirnn
