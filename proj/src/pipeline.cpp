// SPDX-License-Identifier: Apache-2.0
#include "cirnn/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cirnn/error.hpp"
#include "cirnn/metrics.hpp"

namespace cirnn {
namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Rows [first, first + count) of a unit as a new unit.
UnitSeries slice(const UnitSeries& u, std::size_t first, std::size_t count) {
  UnitSeries out;
  out.unit_id = u.unit_id;
  out.cycles.assign(u.cycles.begin() + static_cast<long>(first), u.cycles.begin() + static_cast<long>(first + count));
  out.x = Matrix(count, u.x.cols());
  out.z = Matrix(count, u.z.cols());
  for (std::size_t i = 0; i < count; ++i) {
    std::copy(u.x.row(first + i).begin(), u.x.row(first + i).end(), out.x.row(i).begin());
    std::copy(u.z.row(first + i).begin(), u.z.row(first + i).end(), out.z.row(i).begin());
  }
  if (!u.rul.empty()) {
    out.rul.assign(u.rul.begin() + static_cast<long>(first), u.rul.begin() + static_cast<long>(first + count));
  }
  return out;
}

// Window of seq_len rows ending at row `last`; rows before the unit's start
// repeat row 0.
Window window_at(const UnitSeries& u, std::size_t last, std::size_t seq_len, const TargetScale& target) {
  Window w;
  w.unit_id = u.unit_id;
  w.end_cycle = u.cycles[last];
  w.xs = Matrix(seq_len, u.x.cols());
  w.zs = Matrix(seq_len, u.z.cols());
  w.padded = last + 1 < seq_len;
  const bool labelled = !u.rul.empty();
  if (labelled) w.ys.resize(seq_len);
  for (std::size_t t = 0; t < seq_len; ++t) {
    const std::size_t back = seq_len - 1 - t;
    const std::size_t src = back > last ? 0 : last - back;
    std::copy(u.x.row(src).begin(), u.x.row(src).end(), w.xs.row(t).begin());
    std::copy(u.z.row(src).begin(), u.z.row(src).end(), w.zs.row(t).begin());
    if (labelled) w.ys[t] = target.to_model(u.rul[src]);
  }
  if (labelled) w.y = w.ys.back();
  return w;
}

Matrix stack_rows(std::span<const UnitSeries> units, bool context) {
  std::size_t rows = 0;
  const std::size_t cols = units.empty() ? 0 : (context ? units[0].z.cols() : units[0].x.cols());
  for (const UnitSeries& u : units) rows += u.length();
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const UnitSeries& u : units) {
    const Matrix& m = context ? u.z : u.x;
    for (std::size_t i = 0; i < m.rows(); ++i, ++r) std::copy(m.row(i).begin(), m.row(i).end(), out.row(r).begin());
  }
  return out;
}

std::string join_ints(const std::vector<int>& values, const char* prefix) {
  std::string out;
  for (int v : values) out += (out.empty() ? "" : ",") + std::string(prefix) + std::to_string(v);
  return out;
}

}  // namespace

FeatureSelection subset_features(const std::string& subset) {
  const std::string name = upper(subset);
  if (name == "FD001") return {name, {2, 3, 4, 7, 8, 9, 11, 12, 13, 15, 17, 20, 21}, {1, 2}};
  if (name == "FD002") return {name, {1, 2, 8, 13, 14, 19}, {1, 2, 3}};
  if (name == "FD003") return {name, {2, 3, 4, 7, 8, 9, 11, 15, 17, 20, 21}, {1, 2}};
  if (name == "FD004") return {name, {2, 8, 14, 16}, {1, 2, 3}};
  throw ConfigError("unknown subset '" + subset + "'; expected FD001, FD002, FD003 or FD004, or custom feature lists");
}

FeatureSelection custom_features(std::vector<int> sensors, std::vector<int> settings) {
  if (sensors.empty()) throw ConfigError("custom features: at least one sensor is required");
  for (int s : sensors) {
    if (s < 1 || s > static_cast<int>(kSensors)) throw ConfigError("sensor index " + std::to_string(s) + " not in 1..21");
  }
  for (int s : settings) {
    if (s < 1 || s > static_cast<int>(kOpSettings)) throw ConfigError("setting index " + std::to_string(s) + " not in 1..3");
  }
  return {"custom", std::move(sensors), std::move(settings)};
}

std::vector<UnitSeries> select_features(std::span<const RawRecord> records, const FeatureSelection& features) {
  std::vector<UnitSeries> units;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].unit_id == records[i].unit_id) ++j;
    if (!units.empty() && records[i].unit_id <= units.back().unit_id) {
      throw DataError("select_features: records are not sorted by unit");
    }
    UnitSeries u;
    u.unit_id = records[i].unit_id;
    u.x = Matrix(j - i, features.n_x());
    u.z = Matrix(j - i, features.n_z());
    for (std::size_t r = i; r < j; ++r) {
      u.cycles.push_back(records[r].cycle);
      for (std::size_t k = 0; k < features.n_x(); ++k) {
        u.x(r - i, k) = records[r].sensors[static_cast<std::size_t>(features.sensors[k] - 1)];
      }
      for (std::size_t k = 0; k < features.n_z(); ++k) {
        u.z(r - i, k) = records[r].op_settings[static_cast<std::size_t>(features.settings[k] - 1)];
      }
    }
    units.push_back(std::move(u));
    i = j;
  }
  return units;
}

std::vector<double> label_rul(std::span<const int> cycles, double cap) {
  std::vector<double> out(cycles.size());
  if (cycles.empty()) return out;
  const int last = cycles.back();
  for (std::size_t i = 0; i < cycles.size(); ++i) out[i] = std::min(cap, static_cast<double>(last - cycles[i]));
  return out;
}

std::vector<double> label_test_rul(std::span<const int> cycles, double truth, double cap) {
  std::vector<double> out(cycles.size());
  if (cycles.empty()) return out;
  const int last = cycles.back();
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    out[i] = std::min(cap, truth + static_cast<double>(last - cycles[i]));
  }
  return out;
}

void label_training_units(std::vector<UnitSeries>& units, double cap) {
  for (UnitSeries& u : units) u.rul = label_rul(u.cycles, cap);
}

void label_test_units(std::vector<UnitSeries>& units, std::span<const double> truth, double cap) {
  if (truth.size() != units.size()) {
    throw DataError("truth file has " + std::to_string(truth.size()) + " values for " +
                    std::to_string(units.size()) + " test units");
  }
  for (std::size_t i = 0; i < units.size(); ++i) units[i].rul = label_test_rul(units[i].cycles, truth[i], cap);
}

UnitSplit split_units(std::span<const UnitSeries> units, std::size_t seq_len, std::size_t k_val,
                      std::vector<std::string>* warnings) {
  if (seq_len == 0) throw ConfigError("sequence length must be positive");
  if (k_val % seq_len != 0) {
    throw ConfigError("validation length " + std::to_string(k_val) + " is not a multiple of sequence length " +
                      std::to_string(seq_len));
  }
  UnitSplit out;
  for (const UnitSeries& u : units) {
    const std::size_t n = u.length();
    if (k_val > 0 && n < seq_len + k_val && warnings != nullptr) {
      warnings->push_back("unit " + std::to_string(u.unit_id) + " has " + std::to_string(n) +
                          " cycles, fewer than sequence length + validation length");
    }
    if (k_val == 0 || n <= k_val) {
      out.train.push_back(u);
      continue;
    }
    out.train.push_back(slice(u, 0, n - k_val));
    out.val.push_back(slice(u, n - k_val, k_val));
  }
  return out;
}

std::string to_string(WindowMode mode) {
  switch (mode) {
    case WindowMode::sliding: return "sliding";
    case WindowMode::chunks: return "chunks";
    case WindowMode::last: return "last";
  }
  return "?";
}

WindowMode parse_window_mode(const std::string& name) {
  const std::string n = lower(name);
  if (n == "sliding" || n == "all") return WindowMode::sliding;
  if (n == "chunks") return WindowMode::chunks;
  if (n == "last") return WindowMode::last;
  throw ConfigError("unknown window mode '" + name + "'; expected all, chunks or last");
}

SequenceBatch make_windows(std::span<const UnitSeries> units, std::size_t seq_len, WindowMode mode,
                           const TargetScale& target) {
  if (seq_len == 0) throw ConfigError("sequence length must be positive");
  SequenceBatch batch;
  batch.seq_len = seq_len;
  batch.target = target;
  if (!units.empty()) {
    batch.n_x = units[0].x.cols();
    batch.n_z = units[0].z.cols();
  }
  for (const UnitSeries& u : units) {
    const std::size_t n = u.length();
    if (n == 0) continue;
    if (n < seq_len || mode == WindowMode::last) {
      batch.windows.push_back(window_at(u, n - 1, seq_len, target));
      continue;
    }
    if (mode == WindowMode::sliding) {
      for (std::size_t last = seq_len - 1; last < n; ++last) batch.windows.push_back(window_at(u, last, seq_len, target));
    } else {
      // Tile from the end so the final cycle is always covered.
      std::vector<Window> chunks;
      for (std::size_t end = n; end >= seq_len; end -= seq_len) chunks.push_back(window_at(u, end - 1, seq_len, target));
      for (auto it = chunks.rbegin(); it != chunks.rend(); ++it) batch.windows.push_back(std::move(*it));
    }
  }
  return batch;
}

std::pair<SequenceBatch, SequenceBatch> window_and_split(std::span<const UnitSeries> units, std::size_t seq_len,
                                                         std::size_t k_val, const TargetScale& target,
                                                         std::vector<std::string>* warnings) {
  const UnitSplit split = split_units(units, seq_len, k_val, warnings);
  SequenceBatch train = make_windows(split.train, seq_len, WindowMode::sliding, target);
  SequenceBatch val = make_windows(split.val, seq_len, WindowMode::chunks, target);
  val.n_x = train.n_x;
  val.n_z = train.n_z;
  return {std::move(train), std::move(val)};
}

PreprocessConfig default_preprocess(const std::string& subset) {
  PreprocessConfig cfg;
  cfg.features = subset_features(subset);
  const bool multi_regime = cfg.features.name == "FD002" || cfg.features.name == "FD004";
  cfg.contextual_norm = multi_regime;
  cfg.normalize_target = !multi_regime;
  return cfg;
}

std::vector<UnitSeries> apply_preprocessing(std::span<const UnitSeries> units, const PreprocessStats& stats) {
  std::vector<UnitSeries> out;
  out.reserve(units.size());
  for (const UnitSeries& u : units) {
    UnitSeries p = u;
    p.x = stats.contextual ? contextual_normalize(stats.regimes, u.z, u.x) : apply_minmax(stats.x_minmax, u.x);
    p.z = apply_minmax(stats.z_minmax, u.z);
    p.x = smooth_rows(p.x, stats.smooth_window);
    out.push_back(std::move(p));
  }
  return out;
}

Prepared preprocess(std::span<const RawRecord> train_records, std::span<const RawRecord> test_records,
                    std::span<const double> truth, const PreprocessConfig& cfg) {
  if (train_records.empty()) throw DataError("preprocess: no training records");
  if (cfg.features.n_x() == 0) throw ConfigError("preprocess: no primary features selected");
  if (cfg.features.n_z() == 0) throw ConfigError("preprocess: no context settings selected");
  if (test_records.empty() && !truth.empty()) throw DataError("preprocess: truth values without test records");

  Prepared out;
  out.config = cfg;
  std::vector<UnitSeries> units = select_features(train_records, cfg.features);
  label_training_units(units, cfg.rul_cap);
  std::vector<UnitSeries> test_units = select_features(test_records, cfg.features);
  if (!test_units.empty()) label_test_units(test_units, truth, cfg.rul_cap);

  // Statistics come from the training cycles only.
  const UnitSplit raw_split = split_units(units, cfg.seq_len, cfg.k_val, &out.warnings);
  const Matrix fit_x = stack_rows(raw_split.train, false);
  const Matrix fit_z = stack_rows(raw_split.train, true);

  PreprocessStats& stats = out.stats;
  stats.contextual = cfg.contextual_norm;
  stats.smooth_window = cfg.smooth_window;
  if (cfg.contextual_norm) {
    stats.regimes = fit_regimes(fit_z, fit_x, cfg.regimes, cfg.seed);
    for (std::size_t c = 0; c < stats.regimes.k(); ++c) {
      for (std::size_t j = 0; j < cfg.features.n_x(); ++j) {
        if (stats.regimes.counts[c] > 0 && !(stats.regimes.range(c, j) > 0.0)) {
          out.warnings.push_back("s" + std::to_string(cfg.features.sensors[j]) + " is constant in regime " +
                                 std::to_string(c) + "; mapped to 0");
        }
      }
    }
  } else {
    stats.x_minmax = fit_minmax(fit_x);
    for (std::size_t j = 0; j < cfg.features.n_x(); ++j) {
      if (stats.x_minmax.constant(j)) {
        out.warnings.push_back("s" + std::to_string(cfg.features.sensors[j]) + " is constant; mapped to 0");
      }
    }
  }
  stats.z_minmax = fit_minmax(fit_z);
  for (std::size_t j = 0; j < cfg.features.n_z(); ++j) {
    if (stats.z_minmax.constant(j)) {
      out.warnings.push_back("OS" + std::to_string(cfg.features.settings[j]) + " is constant; mapped to 0");
    }
  }

  if (cfg.normalize_target) {
    double lo = raw_split.train[0].rul.front(), hi = lo;
    for (const UnitSeries& u : raw_split.train) {
      for (double v : u.rul) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    stats.target = TargetScale{lo, hi > lo ? hi - lo : 1.0};
  }

  UnitSplit split = split_units(apply_preprocessing(units, stats), cfg.seq_len, cfg.k_val);
  out.train = std::move(split.train);
  out.val = std::move(split.val);
  out.test = apply_preprocessing(test_units, stats);
  return out;
}

void write_dataset_csv(std::ostream& out, const Prepared& data) {
  const std::size_t n_x = data.config.features.n_x();
  const std::size_t n_z = data.config.features.n_z();
  out << "split,unit,cycle,rul";
  for (std::size_t j = 1; j <= n_x; ++j) out << ",x" << j;
  for (std::size_t j = 1; j <= n_z; ++j) out << ",z" << j;
  out << '\n';
  auto emit = [&](const char* split, const std::vector<UnitSeries>& units) {
    for (const UnitSeries& u : units) {
      for (std::size_t i = 0; i < u.length(); ++i) {
        out << split << ',' << u.unit_id << ',' << u.cycles[i] << ',' << format_double(u.rul[i]);
        for (double v : u.x.row(i)) out << ',' << format_double(v);
        for (double v : u.z.row(i)) out << ',' << format_double(v);
        out << '\n';
      }
    }
  };
  emit("train", data.train);
  emit("val", data.val);
  emit("test", data.test);
}

DatasetTables read_dataset_csv(std::istream& in, const std::string& source) {
  DatasetTables tables;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  {
    std::stringstream header(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(header, col, ',')) cols.push_back(col);
    if (cols.size() < 4 || cols[0] != "split" || cols[1] != "unit" || cols[2] != "cycle" || cols[3] != "rul") {
      throw ParseError(source, 1, "expected header split,unit,cycle,rul,...");
    }
    for (std::size_t j = 4; j < cols.size(); ++j) {
      if (!cols[j].empty() && cols[j][0] == 'x') {
        ++tables.n_x;
      } else if (!cols[j].empty() && cols[j][0] == 'z') {
        ++tables.n_z;
      } else {
        throw ParseError(source, 1, "unexpected column '" + cols[j] + "'");
      }
    }
  }

  struct Rows {
    std::vector<int> cycles;
    std::vector<double> rul, x, z;
  };
  std::map<std::string, std::vector<std::pair<int, Rows>>> grouped;
  const std::size_t width = 4 + tables.n_x + tables.n_z;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != width) {
      throw ParseError(source, line_no, "expected " + std::to_string(width) + " fields, found " +
                                            std::to_string(fields.size()));
    }
    const std::string split(fields[0]);
    if (split != "train" && split != "val" && split != "test") {
      throw ParseError(source, line_no, "unknown split '" + split + "'");
    }
    auto number = [&](std::string_view text) {
      double v = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ParseError(source, line_no, "not a number '" + std::string(text) + "'");
      }
      return v;
    };
    const int unit = static_cast<int>(number(fields[1]));
    auto& list = grouped[split];
    if (list.empty() || list.back().first != unit) list.emplace_back(unit, Rows{});
    Rows& rows = list.back().second;
    rows.cycles.push_back(static_cast<int>(number(fields[2])));
    rows.rul.push_back(number(fields[3]));
    for (std::size_t j = 0; j < tables.n_x; ++j) rows.x.push_back(number(fields[4 + j]));
    for (std::size_t j = 0; j < tables.n_z; ++j) rows.z.push_back(number(fields[4 + tables.n_x + j]));
  }

  auto build = [&](const std::string& split, std::vector<UnitSeries>& dest) {
    for (auto& [unit, rows] : grouped[split]) {
      UnitSeries u;
      u.unit_id = unit;
      u.cycles = std::move(rows.cycles);
      u.rul = std::move(rows.rul);
      u.x = Matrix(u.cycles.size(), tables.n_x, std::move(rows.x));
      u.z = Matrix(u.cycles.size(), tables.n_z, std::move(rows.z));
      dest.push_back(std::move(u));
    }
  };
  build("train", tables.train);
  build("val", tables.val);
  build("test", tables.test);
  return tables;
}

void write_meta(std::ostream& out, const Prepared& data) {
  const PreprocessConfig& cfg = data.config;
  out << "features=" << cfg.features.name << '\n';
  out << "sensors=" << join_ints(cfg.features.sensors, "s") << '\n';
  out << "settings=" << join_ints(cfg.features.settings, "OS") << '\n';
  out << "contextual_norm=" << (cfg.contextual_norm ? "true" : "false") << '\n';
  out << "regimes=" << (cfg.contextual_norm ? data.stats.regimes.k() : 0) << '\n';
  out << "normalize_target=" << (cfg.normalize_target ? "true" : "false") << '\n';
  out << "target_offset=" << format_double(data.stats.target.offset) << '\n';
  out << "target_scale=" << format_double(data.stats.target.scale) << '\n';
  out << "smooth_window=" << cfg.smooth_window << '\n';
  out << "rul_cap=" << format_double(cfg.rul_cap) << '\n';
  out << "seq_len=" << cfg.seq_len << '\n';
  out << "k_val=" << cfg.k_val << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "train_units=" << data.train.size() << '\n';
  out << "val_units=" << data.val.size() << '\n';
  out << "test_units=" << data.test.size() << '\n';
  for (const std::string& w : data.warnings) out << "warning=" << w << '\n';
}

}  // namespace cirnn
