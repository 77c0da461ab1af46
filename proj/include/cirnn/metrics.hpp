// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cirnn/cells.hpp"
#include "cirnn/dataset.hpp"

namespace cirnn {

/// sqrt(mean((pred - truth)^2)). Throws MetricError on empty or unequal input.
double rmse(std::span<const double> predictions, std::span<const double> truths);

/// Time constants of the asymmetric score. With D = pred - truth, a negative
/// (early) error costs exp(-D/a1) - 1 and a non-negative (late) one
/// exp(D/a2) - 1.
///
/// The default (a1 = 10, a2 = 13) is the assignment commonly printed for this
/// metric; with it, early errors cost more than late ones of the same size.
/// phm08() swaps to (13, 10), which penalizes late predictions more.
struct ScoreConstants {
  double a1 = 10.0;
  double a2 = 13.0;

  static ScoreConstants phm08() noexcept { return {13.0, 10.0}; }
  friend bool operator==(const ScoreConstants&, const ScoreConstants&) = default;
};

/// Sum of per-sample asymmetric penalties.
double score(std::span<const double> predictions, std::span<const double> truths,
             const ScoreConstants& constants = {});

struct UnitMetrics {
  int unit_id = 0;
  std::size_t n = 0;
  double rmse = 0.0;
  double score = 0.0;
};

struct EvalReport {
  std::vector<UnitMetrics> units;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;   // population
  double score_mean = 0.0;
  double score_std = 0.0;  // population
  std::vector<std::string> warnings;

  std::size_t n_units() const noexcept { return units.size(); }
};

struct UnitPredictions {
  int unit_id = 0;
  std::vector<double> predictions;
  std::vector<double> truths;
};

/// Per-unit RMSE and score, then mean and population std across units.
/// Units without predictions are skipped with a warning.
EvalReport evaluate_per_unit(std::span<const UnitPredictions> units, const ScoreConstants& constants = {});

/// Runs the model over every window, maps predictions and targets back to raw
/// cycles, groups by unit (ascending id) and evaluates.
std::vector<UnitPredictions> predict_units(const Model& model, const SequenceBatch& batch,
                                           bool append_context);
EvalReport evaluate_model(const Model& model, const SequenceBatch& batch, bool append_context,
                          const ScoreConstants& constants = {});

/// unit,n,rmse,score rows.
void write_report_csv(std::ostream& out, const EvalReport& report);
/// model,n_units,rmse_mean,rmse_std,score_mean,score_std
void write_summary_csv(std::ostream& out, const std::string& model_name, const EvalReport& report);
/// "<model>  RMSE (mean, std) = 11.97, 4.94  Score (s) (mean, std) = 363.03, 710.70"
std::string summary_line(const std::string& model_name, const EvalReport& report);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace cirnn
