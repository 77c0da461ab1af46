// SPDX-License-Identifier: Apache-2.0
#include "cirnn/synthetic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "cirnn/error.hpp"
#include "cirnn/rng.hpp"

namespace cirnn {
namespace {

// Default gains: one positive sensor pattern scaled by a per-regime factor.
// The direction of the sensor vector then carries no regime information and
// each sensor's minimum sits at its base value in every regime, so min-max
// scaling adds no regime-dependent offset.
constexpr double kGainPattern[] = {1.0, 0.8, 0.6, 0.9, 0.7, 0.5};
constexpr double kRegimeScale[] = {1.0, 0.5, 0.25, 0.75, 0.375, 0.625};

const std::vector<std::array<double, kOpSettings>> kDefaultSettings = {
    {10.0, 0.25, 100.0}, {20.0, 0.70, 60.0}, {35.0, 0.84, 100.0},
    {0.0, 0.0, 100.0},   {25.0, 0.62, 60.0}, {42.0, 0.84, 100.0},
};

double sensor_base(std::size_t j) { return 100.0 + 25.0 * static_cast<double>(j); }

double rmse_of(const std::vector<double>& residuals) {
  double acc = 0.0;
  for (double r : residuals) acc += r * r;
  return std::sqrt(acc / static_cast<double>(residuals.size()));
}

// Least-squares residuals of targets on [1, sensors] over the given rows.
void fit_group(const SynthSpec& spec, std::span<const RawRecord> records, std::span<const double> targets,
               const std::vector<std::size_t>& rows, std::vector<double>& residuals) {
  if (rows.empty()) return;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(spec.n_x + 1);
  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RawRecord& r = records[rows[static_cast<std::size_t>(i)]];
    a(i, 0) = 1.0;
    for (std::size_t j = 0; j < spec.n_x; ++j) a(i, static_cast<Eigen::Index>(j + 1)) = r.sensors[j];
    b(i) = targets[rows[static_cast<std::size_t>(i)]];
  }
  // Column pivoting copes with collinear sensors (noise-free data).
  const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd res = b - a * beta;
  for (Eigen::Index i = 0; i < n; ++i) residuals.push_back(res(i));
}

std::vector<RawRecord> unit_records(const SynthSpec& spec, int unit_id, std::size_t observed, double life,
                                    Rng& rng, std::vector<std::size_t>& regimes) {
  const double latent = life + spec.life_jitter * rng.normal();
  std::vector<RawRecord> out;
  std::size_t regime = static_cast<std::size_t>(rng.below(spec.n_regimes));
  for (std::size_t t = 1; t <= observed; ++t) {
    if (t > 1 && !(rng.uniform() < spec.regime_stay)) regime = static_cast<std::size_t>(rng.below(spec.n_regimes));
    RawRecord r;
    r.unit_id = unit_id;
    r.cycle = static_cast<int>(t);
    for (std::size_t k = 0; k < kOpSettings; ++k) {
      const double centre = spec.settings[regime][k];
      const double jitter = spec.setting_jitter * rng.uniform(-1.0, 1.0);
      r.op_settings[k] = k < spec.n_z ? centre * (1.0 + jitter) + jitter : 0.0;
    }
    const double health = std::min(spec.rul_cap, latent - static_cast<double>(t)) / spec.rul_cap;
    for (std::size_t j = 0; j < kSensors; ++j) {
      r.sensors[j] = sensor_base(j);
      if (j < spec.n_x) r.sensors[j] += spec.mixing[regime][j] * health + spec.noise_std * rng.normal();
    }
    regimes.push_back(regime);
    out.push_back(r);
  }
  return out;
}

}  // namespace

SynthSpec resolve(const SynthSpec& spec) {
  SynthSpec s = spec;
  if (s.n_units == 0) throw ConfigError("synth: need at least one training unit");
  if (s.n_regimes == 0) throw ConfigError("synth: need at least one regime");
  if (s.n_x == 0 || s.n_x > kSensors) throw ConfigError("synth: n_x must be in 1..21");
  if (s.n_z == 0 || s.n_z > kOpSettings) throw ConfigError("synth: n_z must be in 1..3");
  if (s.min_cycles < 2 || s.max_cycles < s.min_cycles) throw ConfigError("synth: need 2 <= min_cycles <= max_cycles");
  if (s.noise_std < 0.0 || s.life_jitter < 0.0 || s.setting_jitter < 0.0) {
    throw ConfigError("synth: noise levels must be non-negative");
  }
  if (s.regime_stay < 0.0 || s.regime_stay > 1.0) throw ConfigError("synth: regime_stay must be in [0, 1]");
  if (!(s.rul_cap > 0.0)) throw ConfigError("synth: RUL cap must be positive");
  if (s.mixing.empty()) {
    if (s.n_regimes > std::size(kRegimeScale) || s.n_x > std::size(kGainPattern)) {
      throw ConfigError("synth: default gains cover at most 6 regimes and 6 sensors; pass explicit gains");
    }
    for (std::size_t c = 0; c < s.n_regimes; ++c) {
      std::vector<double> row(s.n_x);
      for (std::size_t j = 0; j < s.n_x; ++j) row[j] = kRegimeScale[c] * kGainPattern[j];
      s.mixing.push_back(std::move(row));
    }
  }
  if (s.settings.empty()) {
    if (s.n_regimes > kDefaultSettings.size()) throw ConfigError("synth: default settings cover at most 6 regimes");
    s.settings.assign(kDefaultSettings.begin(), kDefaultSettings.begin() + static_cast<long>(s.n_regimes));
  }
  if (s.mixing.size() != s.n_regimes || s.settings.size() != s.n_regimes) {
    throw ConfigError("synth: need one mixing row and one setting centre per regime");
  }
  for (const auto& row : s.mixing) {
    if (row.size() != s.n_x) throw ConfigError("synth: every mixing row needs n_x gains");
  }
  return s;
}

SynthData generate(const SynthSpec& input) {
  const SynthSpec spec = resolve(input);
  Rng rng(spec.seed);
  SynthData data;
  auto draw_life = [&] {
    return static_cast<double>(spec.min_cycles + rng.below(spec.max_cycles - spec.min_cycles + 1));
  };
  for (std::size_t u = 0; u < spec.n_units; ++u) {
    const double life = draw_life();
    auto recs = unit_records(spec, static_cast<int>(u + 1), static_cast<std::size_t>(life), life, rng,
                             data.train_regimes);
    data.train.insert(data.train.end(), recs.begin(), recs.end());
  }
  for (std::size_t u = 0; u < spec.n_test_units; ++u) {
    const double life = draw_life();
    // Observe between 30% and 90% of the life.
    const auto lo = static_cast<std::size_t>(0.3 * life);
    const auto hi = static_cast<std::size_t>(0.9 * life);
    const std::size_t observed = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
    auto recs = unit_records(spec, static_cast<int>(u + 1), observed, life, rng, data.test_regimes);
    data.test.insert(data.test.end(), recs.begin(), recs.end());
    data.truth.push_back(life - static_cast<double>(observed));
  }
  return data;
}

std::size_t regime_of(const SynthSpec& input, const RawRecord& record) {
  const SynthSpec spec = input.settings.empty() ? resolve(input) : input;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < spec.settings.size(); ++c) {
    double d = 0.0;
    for (std::size_t k = 0; k < spec.n_z; ++k) {
      const double scale = std::max(1.0, std::abs(spec.settings[c][k]));
      const double diff = (record.op_settings[k] - spec.settings[c][k]) / scale;
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

double oracle_best_rmse(const SynthSpec& input, std::span<const RawRecord> records, std::span<const double> targets) {
  const SynthSpec spec = resolve(input);
  if (records.size() != targets.size() || records.empty()) {
    throw ShapeError("oracle_best_rmse: need one target per record");
  }
  std::vector<std::vector<std::size_t>> groups(spec.n_regimes);
  for (std::size_t i = 0; i < records.size(); ++i) groups[regime_of(spec, records[i])].push_back(i);
  std::vector<double> residuals;
  for (const auto& rows : groups) fit_group(spec, records, targets, rows, residuals);
  return rmse_of(residuals);
}

double pooled_rmse(const SynthSpec& input, std::span<const RawRecord> records, std::span<const double> targets) {
  const SynthSpec spec = resolve(input);
  if (records.size() != targets.size() || records.empty()) {
    throw ShapeError("pooled_rmse: need one target per record");
  }
  std::vector<std::size_t> rows(records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::vector<double> residuals;
  fit_group(spec, records, targets, rows, residuals);
  return rmse_of(residuals);
}

}  // namespace cirnn
