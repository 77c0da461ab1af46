// SPDX-License-Identifier: Apache-2.0
#include "cirnn/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "cirnn/error.hpp"

namespace cirnn {
namespace {

void require_pairs(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw MetricError(std::string(what) + ": " + std::to_string(a.size()) + " predictions vs " +
                      std::to_string(b.size()) + " truths");
  }
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> truths) {
  require_pairs(predictions, truths, "rmse");
  if (predictions.empty()) throw MetricError("rmse: no predictions");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(predictions.size()));
}

double score(std::span<const double> predictions, std::span<const double> truths,
             const ScoreConstants& constants) {
  require_pairs(predictions, truths, "score");
  if (!(constants.a1 > 0.0) || !(constants.a2 > 0.0)) {
    throw ConfigError("score: time constants a1 and a2 must be positive");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    total += d < 0.0 ? std::exp(-d / constants.a1) - 1.0 : std::exp(d / constants.a2) - 1.0;
  }
  return total;
}

EvalReport evaluate_per_unit(std::span<const UnitPredictions> units, const ScoreConstants& constants) {
  EvalReport report;
  std::vector<double> rmses, scores;
  for (const UnitPredictions& unit : units) {
    if (unit.predictions.empty()) {
      report.warnings.push_back("unit " + std::to_string(unit.unit_id) + " has no windows; excluded");
      continue;
    }
    UnitMetrics m;
    m.unit_id = unit.unit_id;
    m.n = unit.predictions.size();
    m.rmse = rmse(unit.predictions, unit.truths);
    m.score = score(unit.predictions, unit.truths, constants);
    rmses.push_back(m.rmse);
    scores.push_back(m.score);
    report.units.push_back(m);
  }
  if (report.units.empty()) throw MetricError("evaluate_per_unit: no unit has predictions");
  std::tie(report.rmse_mean, report.rmse_std) = mean_std(rmses);
  std::tie(report.score_mean, report.score_std) = mean_std(scores);
  return report;
}

std::vector<UnitPredictions> predict_units(const Model& model, const SequenceBatch& batch,
                                           bool append_context) {
  std::map<int, UnitPredictions> by_unit;
  const bool is_cirnn = kind_of(model) == ModelKind::cirnn;
  for (const Window& w : batch.windows) {
    const Matrix xs = model_inputs(w, append_context && !is_cirnn);
    const Vector y_hat = predict(model, xs, is_cirnn ? &w.zs : nullptr);
    auto& unit = by_unit[w.unit_id];
    unit.unit_id = w.unit_id;
    unit.predictions.push_back(batch.target.to_raw(y_hat[0]));
    unit.truths.push_back(batch.target.to_raw(w.y));
  }
  std::vector<UnitPredictions> out;
  out.reserve(by_unit.size());
  for (auto& [id, unit] : by_unit) out.push_back(std::move(unit));
  return out;
}

EvalReport evaluate_model(const Model& model, const SequenceBatch& batch, bool append_context,
                          const ScoreConstants& constants) {
  const auto units = predict_units(model, batch, append_context);
  return evaluate_per_unit(units, constants);
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "unit,n,rmse,score\n";
  for (const UnitMetrics& m : report.units) {
    out << m.unit_id << ',' << m.n << ',' << format_double(m.rmse) << ',' << format_double(m.score)
        << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::string& model_name, const EvalReport& report) {
  out << "model,n_units,rmse_mean,rmse_std,score_mean,score_std\n";
  out << model_name << ',' << report.n_units() << ',' << format_double(report.rmse_mean) << ','
      << format_double(report.rmse_std) << ',' << format_double(report.score_mean) << ','
      << format_double(report.score_std) << '\n';
}

std::string summary_line(const std::string& model_name, const EvalReport& report) {
  return model_name + "  RMSE (mean, std) = " + fixed2(report.rmse_mean) + ", " + fixed2(report.rmse_std) +
         "  Score (s) (mean, std) = " + fixed2(report.score_mean) + ", " + fixed2(report.score_std);
}

}  // namespace cirnn
