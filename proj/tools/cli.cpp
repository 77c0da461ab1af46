// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cirnn/checkpoint.hpp"
#include "cirnn/cmapss.hpp"
#include "cirnn/error.hpp"
#include "cirnn/gradcheck.hpp"
#include "cirnn/metrics.hpp"
#include "cirnn/pipeline.hpp"
#include "cirnn/presets.hpp"
#include "cirnn/synthetic.hpp"
#include "cirnn/trainer.hpp"

namespace cirnn::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kGradThreshold = 1e-4;

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  fs::path out_dir = ".";
};

struct SynthOpts {
  SynthSpec spec;
  std::string tag = "SYN";
};

struct PreprocessOpts {
  std::string data_dir;
  std::string subset;
  std::string train, test, truth;
  std::string preset;
  std::string sensors, settings;
  bool contextual_norm = false;
  bool normalize_target = false;
  std::size_t regimes = 6;
  std::size_t seq_len = 15;
  std::size_t k_val = 15;
  std::size_t smooth = 3;
  double cap = kRulCap;
};

struct TrainOpts {
  std::string data;
  std::string preset;
  std::string model = "cirnn";
  std::size_t hidden = 20;
  std::size_t batch = 64;
  double lr = 1e-3;
  std::string optimizer = "adam";
  std::size_t epochs = 200;
  std::size_t patience = 10;
  bool keep_last = false;
  bool context_features = false;
  std::size_t threads = 1;
  std::string loss_scope = "final_step";
  double clip = 5.0;
  std::size_t degree = 2;
  bool allow_off_grid = false;
};

struct EvalOpts {
  std::string checkpoint;
  std::string data;
  std::string test, truth;
  std::string split = "test";
  std::string windows;
  std::string name;
  bool phm08 = false;
};

struct GradcheckOpts {
  std::string cell = "both";
  std::size_t instances = 20;
  std::optional<std::size_t> steps;
  double eps = 1e-5;
  std::string loss_scope = "final_step";
};

struct ExportOpts {
  std::string checkpoint;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "2,3,s4" or "OS1,OS2" -> {2, 3, 4} / {1, 2}
std::vector<int> parse_index_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t pos = 0;
    while (pos < item.size() && std::isalpha(static_cast<unsigned char>(item[pos]))) ++pos;
    const std::string digits = item.substr(pos);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(c); })) {
      throw ConfigError("bad " + what + " entry '" + item + "' (expected a 1-based column number)");
    }
    out.push_back(std::stoi(digits));
  }
  if (out.empty()) throw ConfigError(what + " list is empty");
  return out;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Flat key=value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

// --- synth ---------------------------------------------------------------

int cmd_synth(const Globals& g, SynthOpts o, std::ostream& out) {
  o.spec.seed = g.seed;
  const SynthData data = generate(o.spec);
  fs::create_directories(g.out_dir);
  const fs::path train = g.out_dir / ("train_" + o.tag + ".txt");
  const fs::path test = g.out_dir / ("test_" + o.tag + ".txt");
  const fs::path truth = g.out_dir / ("RUL_" + o.tag + ".txt");
  {
    auto f = open_output(train);
    write_cmapss(f, data.train);
  }
  {
    auto f = open_output(test);
    write_cmapss(f, data.test);
  }
  {
    auto f = open_output(truth);
    write_rul_truth(f, data.truth);
  }
  out << "wrote " << o.spec.n_units << " training units (" << data.train.size() << " cycles) and "
      << o.spec.n_test_units << " test units to " << g.out_dir.string() << '\n';
  return kOk;
}

// --- preprocess ----------------------------------------------------------

bool is_named_subset(const std::string& name) {
  std::string upper = name;
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return upper == "FD001" || upper == "FD002" || upper == "FD003" || upper == "FD004";
}

int cmd_preprocess(const Globals& g, PreprocessOpts o, const CLI::App& sub, std::ostream& out,
                   std::ostream& err) {
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };

  if (!o.preset.empty()) {
    const Preset& p = find_preset(o.preset);
    if (o.subset.empty()) o.subset = std::string(p.subset);
    if (!given("--contextual-norm")) o.contextual_norm = p.contextual_norm;
    if (!given("--seq-len")) o.seq_len = p.sequence_length;
  }

  PreprocessConfig cfg;
  if (is_named_subset(o.subset)) {
    cfg = default_preprocess(o.subset);
  } else if (o.sensors.empty() || o.settings.empty()) {
    throw ConfigError("preprocess: give --subset FD001..FD004 or both --sensors and --settings");
  }
  if (!o.sensors.empty() || !o.settings.empty()) {
    const FeatureSelection base = cfg.features;
    cfg.features = custom_features(o.sensors.empty() ? base.sensors : parse_index_list(o.sensors, "sensor"),
                                   o.settings.empty() ? base.settings : parse_index_list(o.settings, "setting"));
  }
  if (given("--contextual-norm") || !o.preset.empty()) cfg.contextual_norm = o.contextual_norm;
  if (given("--normalize-target")) cfg.normalize_target = o.normalize_target;
  if (given("--regimes") || !is_named_subset(o.subset)) cfg.regimes = o.regimes;
  cfg.seq_len = o.seq_len;
  cfg.k_val = o.k_val;
  cfg.smooth_window = o.smooth;
  cfg.rul_cap = o.cap;
  cfg.seed = g.seed;

  auto resolve = [&](const std::string& explicit_path, const char* prefix) -> fs::path {
    if (!explicit_path.empty()) return explicit_path;
    if (o.data_dir.empty() || o.subset.empty()) return {};
    return fs::path(o.data_dir) / (std::string(prefix) + o.subset + ".txt");
  };
  const fs::path train_path = resolve(o.train, "train_");
  if (train_path.empty()) throw ConfigError("preprocess: give --train or --data-dir with --subset");
  const fs::path test_path = resolve(o.test, "test_");
  const fs::path truth_path = resolve(o.truth, "RUL_");

  const std::vector<RawRecord> train = read_cmapss(train_path);
  std::vector<RawRecord> test;
  std::vector<double> truth;
  if (!test_path.empty() && fs::exists(test_path)) {
    test = read_cmapss(test_path);
    if (truth_path.empty() || !fs::exists(truth_path)) {
      throw DataError("preprocess: test file " + test_path.string() + " has no truth file");
    }
    truth = read_rul_truth(truth_path);
  } else if (!o.test.empty()) {
    throw DataError("cannot open " + o.test);
  }

  const Prepared data = preprocess(train, test, truth, cfg);
  for (const std::string& w : data.warnings) err << "warning: " << w << '\n';

  fs::create_directories(g.out_dir);
  {
    auto f = open_output(g.out_dir / "dataset.csv");
    write_dataset_csv(f, data);
  }
  {
    auto f = open_output(g.out_dir / "stats.bin");
    save_stats(f, data.config, data.stats);
  }
  {
    auto f = open_output(g.out_dir / "meta.txt");
    write_meta(f, data);
  }

  out << "features " << cfg.features.name << ": " << cfg.features.n_x() << " sensors, " << cfg.features.n_z()
      << " settings\n";
  out << "units: " << unit_ids(train).size() << " train, " << data.val.size() << " with validation cycles, "
      << data.test.size() << " test\n";
  if (cfg.contextual_norm) {
    out << "fitted " << data.stats.regimes.k() << " regimes (cycles per regime:";
    for (auto c : data.stats.regimes.counts) out << ' ' << c;
    out << ")\n";
  }
  out << "wrote " << (g.out_dir / "dataset.csv").string() << '\n';
  return kOk;
}

// --- shared data loading -------------------------------------------------

struct LoadedData {
  DatasetTables tables;
  PreprocessConfig config;
  PreprocessStats stats;
};

LoadedData load_dataset(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("--data is required (a preprocess output directory)");
  LoadedData d;
  {
    auto f = open_input(dir / "dataset.csv");
    d.tables = read_dataset_csv(f, (dir / "dataset.csv").string());
  }
  {
    auto f = open_input(dir / "stats.bin");
    std::tie(d.config, d.stats) = load_stats(f);
  }
  if (d.tables.n_x != d.config.features.n_x() || d.tables.n_z != d.config.features.n_z()) {
    throw DataError(dir.string() + ": dataset.csv and stats.bin disagree on feature counts");
  }
  return d;
}

// --- train ---------------------------------------------------------------

int cmd_train(const Globals& g, const TrainOpts& o, const CLI::App& sub, std::ostream& out,
              std::ostream& err) {
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  const LoadedData data = load_dataset(o.data);

  TrainConfig cfg;
  ModelKind kind = parse_model_kind(o.model);
  std::string preset_name;
  if (!o.preset.empty()) {
    const Preset& p = find_preset(o.preset);
    preset_name = std::string(p.name);
    if (p.sequence_length != data.config.seq_len) {
      throw ConfigError("preset " + preset_name + " uses sequence length " + std::to_string(p.sequence_length) +
                        " but the data was windowed for " + std::to_string(data.config.seq_len));
    }
    if (p.contextual_norm != data.config.contextual_norm) {
      throw ConfigError("preset " + preset_name + (p.contextual_norm ? " expects" : " does not use") +
                        " contextual normalization; rerun preprocess with --preset " + preset_name);
    }
    if (is_named_subset(data.config.features.name) && data.config.features.name != p.subset) {
      err << "warning: preset " << preset_name << " was tuned on " << p.subset << ", data is "
          << data.config.features.name << '\n';
    }
    apply_preset(p, cfg);
    if (!given("--model")) kind = p.kind;
  }
  cfg.sequence_length = data.config.seq_len;
  if (o.preset.empty() || given("--hidden")) cfg.hidden_units = o.hidden;
  if (o.preset.empty() || given("--batch")) cfg.batch_size = o.batch;
  if (o.preset.empty() || given("--lr")) cfg.learning_rate = o.lr;
  if (o.preset.empty() || given("--optimizer")) cfg.optimizer = parse_optimizer_kind(o.optimizer);
  if (o.preset.empty() || given("--context-features")) cfg.context_features = o.context_features;
  if (kind == ModelKind::cirnn) cfg.context_features = false;
  cfg.epochs = o.epochs;
  cfg.patience = o.patience;
  cfg.keep_best = !o.keep_last;
  cfg.seed = g.seed;
  cfg.threads = o.threads;
  cfg.loss_scope = parse_loss_scope(o.loss_scope);
  cfg.clip_norm = o.clip > 0.0 ? std::optional<double>(o.clip) : std::nullopt;
  cfg.basis_degree = o.degree;

  if (!o.allow_off_grid) {
    for (const std::string& w : check_grid(cfg)) err << "warning: " << w << '\n';
  }

  const SequenceBatch train_windows =
      make_windows(data.tables.train, cfg.sequence_length, WindowMode::sliding, data.stats.target);
  const SequenceBatch val_windows =
      make_windows(data.tables.val, cfg.sequence_length, WindowMode::chunks, data.stats.target);
  out << "training " << to_string(kind) << " (n_h " << cfg.hidden_units << ", batch " << cfg.batch_size << ", lr "
      << format_double(cfg.learning_rate) << ", " << to_string(cfg.optimizer) << ") on "
      << train_windows.windows.size() << " windows, " << val_windows.windows.size() << " validation windows\n";

  fs::create_directories(g.out_dir);
  auto log = open_output(g.out_dir / "loss_log.csv");
  write_loss_log_header(log);
  const TrainResult result = train(kind, train_windows, val_windows, cfg, [&](const EpochLog& row) {
    write_loss_log_row(log, row);
    out << "epoch " << row.epoch << "  loss " << fmt("%.6f", row.train_loss) << "  val_rmse "
        << fmt("%.3f", row.val_rmse) << '\n';
  });

  Checkpoint ckpt;
  ckpt.model = result.model;
  ckpt.n_z = data.config.features.n_z();
  ckpt.preprocess = data.config;
  ckpt.stats = data.stats;
  ckpt.train = cfg;
  ckpt.preset = preset_name;
  save_checkpoint(g.out_dir / "checkpoint.bin", ckpt);

  out << (result.early_stopped ? "early stop; " : "") << "kept epoch "
      << (cfg.keep_best ? result.best_epoch : result.log.size()) << " of " << result.log.size() << "; wrote "
      << (g.out_dir / "checkpoint.bin").string() << '\n';
  return kOk;
}

// --- eval ----------------------------------------------------------------

std::vector<UnitSeries> raw_test_units(const Checkpoint& ckpt, const fs::path& test, const fs::path& truth) {
  if (truth.empty()) throw ConfigError("--test needs --truth");
  const std::vector<RawRecord> records = read_cmapss(test);
  std::vector<UnitSeries> units = select_features(records, ckpt.preprocess.features);
  label_test_units(units, read_rul_truth(truth), ckpt.preprocess.rul_cap);
  return apply_preprocessing(units, ckpt.stats);
}

int cmd_eval(const Globals& g, const EvalOpts& o, std::ostream& out, std::ostream& err) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  const Checkpoint ckpt = load_checkpoint(fs::path(o.checkpoint));
  const std::size_t want_x = ckpt.preprocess.features.n_x();
  const std::size_t want_z = ckpt.preprocess.features.n_z();

  std::vector<UnitSeries> units;
  if (!o.test.empty()) {
    if (o.split != "test") throw ConfigError("--test evaluates the test split only");
    units = raw_test_units(ckpt, o.test, o.truth);
  } else {
    LoadedData data = load_dataset(o.data);
    if (data.tables.n_x != want_x || data.tables.n_z != want_z) {
      throw ShapeError("checkpoint expects " + std::to_string(want_x) + " sensors and " + std::to_string(want_z) +
                       " settings, data has " + std::to_string(data.tables.n_x) + " and " +
                       std::to_string(data.tables.n_z));
    }
    if (data.config.features != ckpt.preprocess.features) {
      throw ShapeError("checkpoint was trained on " + ckpt.preprocess.features.name +
                       " features, data holds " + data.config.features.name);
    }
    if (!(data.stats == ckpt.stats)) {
      throw ConfigError("data was preprocessed with different fitted statistics than the checkpoint");
    }
    if (o.split == "test") {
      units = std::move(data.tables.test);
    } else if (o.split == "val") {
      units = std::move(data.tables.val);
    } else if (o.split == "train") {
      units = std::move(data.tables.train);
    } else {
      throw ConfigError("unknown split '" + o.split + "' (allowed: train, val, test)");
    }
  }
  if (units.empty()) throw DataError("no units in the " + o.split + " split");

  const WindowMode mode = !o.windows.empty() ? parse_window_mode(o.windows)
                          : o.split == "val" ? WindowMode::chunks
                                             : WindowMode::sliding;
  const SequenceBatch batch = make_windows(units, ckpt.train.sequence_length, mode, ckpt.stats.target);
  const ScoreConstants constants = o.phm08 ? ScoreConstants::phm08() : ScoreConstants{};
  const EvalReport report = evaluate_model(ckpt.model, batch, ckpt.train.context_features, constants);
  for (const std::string& w : report.warnings) err << "warning: " << w << '\n';

  const std::string name = !o.name.empty()     ? o.name
                           : !ckpt.preset.empty() ? ckpt.preset
                                                  : to_string(kind_of(ckpt.model));
  fs::create_directories(g.out_dir);
  {
    auto f = open_output(g.out_dir / "report.csv");
    write_report_csv(f, report);
  }
  {
    auto f = open_output(g.out_dir / "summary.csv");
    write_summary_csv(f, name, report);
  }
  out << summary_line(name, report) << '\n';
  return kOk;
}

// --- gradcheck -----------------------------------------------------------

int cmd_gradcheck(const Globals& g, const GradcheckOpts& o, std::ostream& out) {
  std::vector<ModelKind> kinds;
  if (o.cell == "both") {
    kinds = {ModelKind::cirnn, ModelKind::gru};
  } else {
    kinds = {parse_model_kind(o.cell)};
  }
  std::vector<LossScope> scopes;
  if (o.loss_scope == "both") {
    scopes = {LossScope::final_step, LossScope::all_steps};
  } else {
    scopes = {parse_loss_scope(o.loss_scope)};
  }
  if (o.instances == 0) throw ConfigError("--instances must be positive");
  if (o.steps && *o.steps == 0) throw ConfigError("--t must be positive");

  const std::vector<GradCheckCase> cases = gradcheck_cases(o.instances, g.seed, o.steps);
  bool ok = true;
  for (ModelKind kind : kinds) {
    for (LossScope scope : scopes) {
      std::array<GroupError, kParamGroups> worst{};
      for (const GradCheckCase& c : cases) {
        const GradCheckResult r = run_gradcheck(kind, c, o.eps, scope);
        for (std::size_t i = 0; i < kParamGroups; ++i) {
          worst[i].name = r.groups[i].name;
          worst[i].max_error = std::max(worst[i].max_error, r.groups[i].max_error);
          worst[i].max_abs_error = std::max(worst[i].max_abs_error, r.groups[i].max_abs_error);
        }
      }
      out << to_string(kind) << ' ' << to_string(scope) << ": " << cases.size() << " instances, eps "
          << format_double(o.eps) << '\n';
      for (const GroupError& e : worst) {
        const bool pass = e.max_error < kGradThreshold;
        ok = ok && pass;
        out << "  " << e.name << std::string(e.name.size() < 4 ? 4 - e.name.size() : 0, ' ') << "  max rel "
            << fmt("%.3e", e.max_error) << "  max abs " << fmt("%.3e", e.max_abs_error) << "  "
            << (pass ? "ok" : "FAIL") << '\n';
      }
    }
  }
  out << (ok ? "PASS" : "FAIL") << " (threshold " << format_double(kGradThreshold) << ")\n";
  return ok ? kOk : kCheckFailed;
}

// --- export-weights ------------------------------------------------------

int cmd_export(const Globals& g, const ExportOpts& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  const Checkpoint ckpt = load_checkpoint(fs::path(o.checkpoint));
  const auto* p = std::get_if<CiRnnParams>(&ckpt.model);
  if (p == nullptr) throw ConfigError("export-weights needs a cirnn checkpoint (this one holds a gru)");

  const std::size_t m = p->basis.m;
  std::vector<std::string> labels;
  for (int s : ckpt.preprocess.features.sensors) labels.push_back("s" + std::to_string(s));
  if (labels.size() != p->n_x()) {
    labels.clear();
    for (std::size_t i = 1; i <= p->n_x(); ++i) labels.push_back("x" + std::to_string(i));
  }

  fs::create_directories(g.out_dir);
  const std::pair<const char*, const Matrix*> groups[] = {{"As", &p->As}, {"Ah", &p->Ah}, {"Ar", &p->Ar}};
  for (const auto& [name, a] : groups) {
    const std::vector<Matrix> blocks = feature_blocks(*a, m);
    auto f = open_output(g.out_dir / (std::string(name) + ".csv"));
    f << "feature,row";
    for (std::size_t k = 0; k < m; ++k) f << ',' << monomial_name(p->basis, k);
    f << '\n';
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      for (std::size_t r = 0; r < blocks[i].rows(); ++r) {
        f << labels[i] << ',' << r;
        for (std::size_t k = 0; k < m; ++k) f << ',' << format_double(blocks[i](r, k));
        f << '\n';
      }
    }
    out << name << ": " << blocks.size() << " blocks of " << p->n_h() << "x" << m << " -> "
        << (g.out_dir / (std::string(name) + ".csv")).string() << '\n';
  }
  return kOk;
}

// Finds the subcommand token, skipping values of the global options.
std::optional<std::size_t> subcommand_index(const std::vector<std::string>& args, const CLI::App& app) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--seed" || a == "--config" || a == "--out-dir") {
      ++i;
      continue;
    }
    if (!a.empty() && a[0] == '-') continue;
    if (app.get_subcommand_no_throw(a) != nullptr) return i;
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

int exit_for(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kUsage;
  if (dynamic_cast<const cirnn::ParseError*>(&e) != nullptr || dynamic_cast<const DataError*>(&e) != nullptr ||
      dynamic_cast<const ShapeError*>(&e) != nullptr || dynamic_cast<const FormatError*>(&e) != nullptr) {
    return kData;
  }
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Context-integrated GRU for remaining-useful-life prediction", "cirnn"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  Globals g;
  std::string out_dir = ".";
  app.add_option("--seed", g.seed, "Seed for data generation, clustering and training");
  app.add_option("--config", g.config, "Flat key=value file of flag defaults");
  app.add_option("--out-dir", out_dir, "Directory for written artifacts");

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Generate synthetic context-regime data in C-MAPSS layout");
  synth->fallthrough();
  synth->add_option("--units", so.spec.n_units, "Run-to-failure training units");
  synth->add_option("--test-units", so.spec.n_test_units, "Truncated test units");
  synth->add_option("--min-cycles", so.spec.min_cycles);
  synth->add_option("--max-cycles", so.spec.max_cycles);
  synth->add_option("--n-x", so.spec.n_x, "Informative sensors");
  synth->add_option("--n-z", so.spec.n_z, "Varying settings");
  synth->add_option("--regimes", so.spec.n_regimes);
  synth->add_option("--noise", so.spec.noise_std, "Sensor noise std");
  synth->add_option("--life-jitter", so.spec.life_jitter, "Std of the latent life offset");
  synth->add_option("--regime-stay", so.spec.regime_stay, "Probability of keeping the previous regime");
  synth->add_option("--setting-jitter", so.spec.setting_jitter);
  synth->add_option("--cap", so.spec.rul_cap, "RUL cap");
  synth->add_option("--tag", so.tag, "File name tag: train_<tag>.txt, test_<tag>.txt, RUL_<tag>.txt");

  PreprocessOpts po;
  auto* prep = app.add_subcommand("preprocess", "Normalize, smooth, label and split raw data");
  prep->fallthrough();
  prep->add_option("--data-dir", po.data_dir, "Directory holding train_<subset>.txt and friends");
  prep->add_option("--subset", po.subset, "FD001..FD004, or a file tag with --sensors/--settings");
  prep->add_option("--train", po.train, "Training file (overrides --data-dir)");
  prep->add_option("--test", po.test, "Test file");
  prep->add_option("--truth", po.truth, "Test truth RUL file");
  prep->add_option("--preset", po.preset, "Take subset, normalization and sequence length from a preset");
  prep->add_option("--sensors", po.sensors, "Comma-separated sensor columns, e.g. 2,3,4");
  prep->add_option("--settings", po.settings, "Comma-separated setting columns, e.g. 1,2,3");
  prep->add_flag("--contextual-norm,!--no-contextual-norm", po.contextual_norm, "Per-regime sensor normalization");
  prep->add_flag("--normalize-target,!--raw-target", po.normalize_target, "Min-max the RUL target");
  prep->add_option("--regimes", po.regimes, "Clusters for contextual normalization");
  prep->add_option("--seq-len", po.seq_len);
  prep->add_option("--k-val", po.k_val, "Trailing cycles per unit held out for validation");
  prep->add_option("--smooth", po.smooth, "Trailing smoothing window (1 disables)");
  prep->add_option("--cap", po.cap, "RUL cap");

  TrainOpts to;
  auto* trn = app.add_subcommand("train", "Train a model on preprocessed data");
  trn->fallthrough();
  trn->add_option("--data", to.data, "Preprocess output directory");
  trn->add_option("--preset", to.preset, "Named configuration, e.g. CiRNN_D2");
  trn->add_option("--model", to.model, "cirnn or gru");
  trn->add_option("--hidden", to.hidden);
  trn->add_option("--batch", to.batch);
  trn->add_option("--lr", to.lr);
  trn->add_option("--optimizer", to.optimizer, "sgd, rmsprop or adam");
  trn->add_option("--epochs", to.epochs, "Epoch limit");
  trn->add_option("--patience", to.patience, "Epochs without validation improvement before stopping");
  trn->add_flag("--keep-last", to.keep_last, "Keep the final epoch instead of the best validation epoch");
  trn->add_flag("--context-features,!--no-context-features", to.context_features,
                "Feed the settings to a plain GRU as extra inputs");
  trn->add_option("--threads", to.threads);
  trn->add_option("--loss-scope", to.loss_scope, "final_step or all_steps");
  trn->add_option("--clip", to.clip, "Global gradient-norm clip (0 disables)");
  trn->add_option("--degree", to.degree, "Polynomial basis degree");
  trn->add_flag("--allow-off-grid", to.allow_off_grid, "Skip the hyperparameter grid check");

  EvalOpts eo;
  auto* evl = app.add_subcommand("eval", "Per-unit RMSE and score of a checkpoint");
  evl->fallthrough();
  evl->add_option("--checkpoint", eo.checkpoint);
  evl->add_option("--data", eo.data, "Preprocess output directory");
  evl->add_option("--test", eo.test, "Raw test file, preprocessed with the checkpoint's statistics");
  evl->add_option("--truth", eo.truth, "Truth RUL file for --test");
  evl->add_option("--split", eo.split, "train, val or test");
  evl->add_option("--windows", eo.windows, "all, chunks or last");
  evl->add_option("--name", eo.name, "Model name in the summary");
  evl->add_flag("--phm08", eo.phm08, "Score with the constants swapped (late errors cost more)");

  GradcheckOpts go;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gc->fallthrough();
  gc->add_option("--cell", go.cell, "cirnn, gru or both");
  gc->add_option("--instances", go.instances);
  gc->add_option("--t", go.steps, "Fix the sequence length");
  gc->add_option("--eps", go.eps);
  gc->add_option("--loss-scope", go.loss_scope, "final_step, all_steps or both");

  ExportOpts xo;
  auto* exp = app.add_subcommand("export-weights", "Write input coefficient matrices as per-feature blocks");
  exp->fallthrough();
  exp->add_option("--checkpoint", xo.checkpoint);

  try {
    std::vector<std::string> argv = args;
    if (const auto path = config_path(args)) {
      const auto sub_at = subcommand_index(args, app);
      if (sub_at) {
        const CLI::App* sub = app.get_subcommand(args[*sub_at]);
        std::vector<std::string> injected;
        for (const auto& [key, value] : read_config(*path)) {
          if (key == "config") continue;
          const std::string flag = "--" + key;
          if (sub->get_option_no_throw(flag) == nullptr && app.get_option_no_throw(flag) == nullptr) {
            err << "warning: " << *path << ": '" << key << "' does not apply to " << sub->get_name() << '\n';
            continue;
          }
          injected.push_back(flag + "=" + value);
        }
        // Right after the subcommand, so flags given on the command line win.
        argv.insert(argv.begin() + static_cast<std::ptrdiff_t>(*sub_at) + 1, injected.begin(), injected.end());
      }
    }
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const std::exception& e) {
    return exit_for(e, err);
  }

  g.out_dir = out_dir;
  try {
    if (synth->parsed()) return cmd_synth(g, so, out);
    if (prep->parsed()) return cmd_preprocess(g, po, *prep, out, err);
    if (trn->parsed()) return cmd_train(g, to, *trn, out, err);
    if (evl->parsed()) return cmd_eval(g, eo, out, err);
    if (gc->parsed()) return cmd_gradcheck(g, go, out);
    if (exp->parsed()) return cmd_export(g, xo, out);
  } catch (const std::exception& e) {
    return exit_for(e, err);
  }
  return kUsage;
}

}  // namespace cirnn::cli
