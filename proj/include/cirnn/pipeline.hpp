// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cirnn/cmapss.hpp"
#include "cirnn/dataset.hpp"
#include "cirnn/normalize.hpp"

namespace cirnn {

/// Primary sensor columns and context setting columns, both 1-based as in
/// the dataset documentation (s1..s21, OS1..OS3).
struct FeatureSelection {
  std::string name;  // "FD002", or "custom"
  std::vector<int> sensors;
  std::vector<int> settings;

  std::size_t n_x() const noexcept { return sensors.size(); }
  std::size_t n_z() const noexcept { return settings.size(); }

  friend bool operator==(const FeatureSelection&, const FeatureSelection&) = default;
};

/// Fixed sensor and setting lists for FD001..FD004 (case-insensitive).
/// Throws ConfigError for any other name.
FeatureSelection subset_features(const std::string& subset);
/// Custom lists; throws ConfigError for empty or out-of-range indices.
FeatureSelection custom_features(std::vector<int> sensors, std::vector<int> settings);

/// Cycle-aligned feature rows of one unit.
struct UnitSeries {
  int unit_id = 0;
  std::vector<int> cycles;
  Matrix x;                 // cycles x n_x
  Matrix z;                 // cycles x n_z
  std::vector<double> rul;  // raw cycles; empty until labelled

  std::size_t length() const noexcept { return cycles.size(); }

  friend bool operator==(const UnitSeries&, const UnitSeries&) = default;
};

/// Groups records by unit (records must be sorted, as parse_cmapss returns
/// them) and extracts the selected columns.
std::vector<UnitSeries> select_features(std::span<const RawRecord> records, const FeatureSelection& features);

inline constexpr double kRulCap = 125.0;

/// min(cap, last_cycle - cycle) for a run-to-failure unit.
std::vector<double> label_rul(std::span<const int> cycles, double cap = kRulCap);
/// min(cap, truth + last_cycle - cycle) for a truncated test unit.
std::vector<double> label_test_rul(std::span<const int> cycles, double truth, double cap = kRulCap);

void label_training_units(std::vector<UnitSeries>& units, double cap = kRulCap);
/// One truth value per unit, in unit order. Throws DataError on a count mismatch.
void label_test_units(std::vector<UnitSeries>& units, std::span<const double> truth, double cap = kRulCap);

/// Cuts the last k_val cycles of every unit off as validation data. Units with
/// fewer than seq_len + k_val cycles are flagged; units with k_val cycles or
/// fewer stay entirely in training. Throws ConfigError unless k_val is a
/// multiple of seq_len.
struct UnitSplit {
  std::vector<UnitSeries> train;
  std::vector<UnitSeries> val;
};
UnitSplit split_units(std::span<const UnitSeries> units, std::size_t seq_len, std::size_t k_val,
                      std::vector<std::string>* warnings = nullptr);

/// How windows are cut from each unit.
///   sliding: every window of seq_len consecutive cycles (stride 1)
///   chunks:  non-overlapping windows tiling the unit from its end
///   last:    only the window ending at the unit's last cycle
/// A unit shorter than seq_len yields one window front-padded by repeating its
/// first cycle, flagged as padded.
enum class WindowMode { sliding, chunks, last };
std::string to_string(WindowMode mode);
WindowMode parse_window_mode(const std::string& name);

SequenceBatch make_windows(std::span<const UnitSeries> units, std::size_t seq_len, WindowMode mode,
                           const TargetScale& target = {});

/// split_units followed by sliding training windows and chunked validation
/// windows.
std::pair<SequenceBatch, SequenceBatch> window_and_split(std::span<const UnitSeries> units, std::size_t seq_len,
                                                         std::size_t k_val, const TargetScale& target = {},
                                                         std::vector<std::string>* warnings = nullptr);

struct PreprocessConfig {
  FeatureSelection features;
  bool contextual_norm = false;  // per-regime sensor normalization instead of min-max
  std::size_t regimes = 6;
  bool normalize_target = false;  // min-max the RUL target
  std::size_t smooth_window = 3;
  double rul_cap = kRulCap;
  std::size_t seq_len = 15;
  std::size_t k_val = 15;
  std::uint64_t seed = 0;

  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

/// Defaults for a named subset: contextual normalization for the six-regime
/// sets (FD002, FD004), target min-max for the single-regime ones.
PreprocessConfig default_preprocess(const std::string& subset);

/// Everything fitted on the training split, needed again at inference.
struct PreprocessStats {
  bool contextual = false;
  RegimeStats regimes;    // set when contextual
  MinMaxStats x_minmax;   // set when not contextual
  MinMaxStats z_minmax;
  TargetScale target;
  std::size_t smooth_window = 3;

  friend bool operator==(const PreprocessStats&, const PreprocessStats&) = default;
};

struct Prepared {
  PreprocessConfig config;
  PreprocessStats stats;
  std::vector<UnitSeries> train;  // training cycles of each unit
  std::vector<UnitSeries> val;    // last k_val cycles of each unit
  std::vector<UnitSeries> test;
  std::vector<std::string> warnings;
};

/// Full preprocessing. Order: sensors normalized (per regime, or min-max),
/// context min-max, smoothing of the sensors within each unit, RUL labels,
/// then the train/validation split. Every statistic is fitted on the
/// training cycles only (validation cycles and test units excluded).
/// Pass an empty test set to skip test handling; truth must then be empty too.
Prepared preprocess(std::span<const RawRecord> train_records, std::span<const RawRecord> test_records,
                    std::span<const double> truth, const PreprocessConfig& cfg);

/// Applies fitted statistics to new units (no labels).
std::vector<UnitSeries> apply_preprocessing(std::span<const UnitSeries> units, const PreprocessStats& stats);

/// Per-cycle CSV: split,unit,cycle,rul,x1..x{n_x},z1..z{n_z}.
void write_dataset_csv(std::ostream& out, const Prepared& data);
struct DatasetTables {
  std::vector<UnitSeries> train, val, test;
  std::size_t n_x = 0;
  std::size_t n_z = 0;
};
DatasetTables read_dataset_csv(std::istream& in, const std::string& source = "<input>");

/// Human-readable key=value summary of a preprocessing run.
void write_meta(std::ostream& out, const Prepared& data);

}  // namespace cirnn
