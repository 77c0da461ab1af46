// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cirnn/cmapss.hpp"

namespace cirnn {

/// Context-regime degradation data in the C-MAPSS layout.
///
/// Every unit has a life L drawn uniformly from [min_cycles, max_cycles] and
/// a latent life L' = L + N(0, life_jitter). At cycle t its health is
/// h = min(cap, L' - t) / cap, and informative sensor j reads
/// base_j + mixing[c][j] * h + N(0, noise_std), where c is the operating
/// regime of that cycle. The regime follows a Markov chain that keeps the
/// previous regime with probability regime_stay and otherwise draws
/// uniformly. The first n_z settings are the regime's setting centre c_k
/// moved to c_k (1 + j) + j with j uniform in +-setting_jitter, so zero
/// centres vary too; the rest are zero.
/// Sensors after n_x are constant. The target is min(cap, L - t).
///
/// Sensors see L' while the target uses L, so life_jitter sets an error floor
/// that no model can remove.
struct SynthSpec {
  std::size_t n_units = 60;       // run-to-failure training units
  std::size_t n_test_units = 40;  // truncated units with truth RUL
  std::size_t min_cycles = 150;
  std::size_t max_cycles = 280;
  std::size_t n_x = 4;  // informative sensors s1..s{n_x}
  std::size_t n_z = 3;  // varying settings OS1..OS{n_z}
  std::size_t n_regimes = 3;
  /// n_regimes rows of n_x sensor gains; empty selects built-in defaults.
  std::vector<std::vector<double>> mixing;
  /// n_regimes setting centres; empty selects built-in defaults.
  std::vector<std::array<double, kOpSettings>> settings;
  double setting_jitter = 0.002;
  double noise_std = 0.0;
  double life_jitter = 0.0;
  double regime_stay = 0.0;
  double rul_cap = 125.0;
  std::uint64_t seed = 0;
};

struct SynthData {
  std::vector<RawRecord> train;
  std::vector<RawRecord> test;
  std::vector<double> truth;             // one per test unit
  std::vector<std::size_t> train_regimes;  // per train record
  std::vector<std::size_t> test_regimes;   // per test record
};

/// Validates the spec (ConfigError) and fills in default mixing and settings.
SynthSpec resolve(const SynthSpec& spec);

SynthData generate(const SynthSpec& spec);

/// Regime of a record: nearest setting centre over the first n_z settings.
std::size_t regime_of(const SynthSpec& spec, const RawRecord& record);

/// Per-regime least squares of the target on the informative sensors plus an
/// intercept, fitted and scored on the given records. The RMSE of that fit is
/// the floor a model reading the same cycle can reach. targets has one value
/// per record.
double oracle_best_rmse(const SynthSpec& spec, std::span<const RawRecord> records, std::span<const double> targets);

/// Same fit with a single regime-blind regression.
double pooled_rmse(const SynthSpec& spec, std::span<const RawRecord> records, std::span<const double> targets);

}  // namespace cirnn
