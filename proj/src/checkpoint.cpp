// SPDX-License-Identifier: Apache-2.0
#include "cirnn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "cirnn/error.hpp"

namespace cirnn {
namespace {

constexpr char kMagic[8] = {'C', 'I', 'R', 'N', 'N', 'C', 'K', 'P'};
constexpr char kStatsMagic[8] = {'C', 'I', 'R', 'N', 'N', 'S', 'T', 'S'};
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double d : v) f64(d);
  }
  void ints(const std::vector<int>& v) {
    u64(v.size());
    for (int i : v) u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(i)));
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double d : m.span()) f64(d);
  }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  bool boolean() {
    const auto v = u8();
    if (v > 1) throw FormatError("checkpoint: invalid boolean byte");
    return v == 1;
  }
  std::size_t count() {
    const std::uint64_t n = u64();
    if (n > kMaxCount) throw FormatError("checkpoint: implausible element count " + std::to_string(n));
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    std::string s(count(), '\0');
    bytes(s.data(), s.size());
    return s;
  }
  std::vector<double> doubles() {
    std::vector<double> v(count());
    for (double& d : v) d = f64();
    return v;
  }
  std::vector<int> ints() {
    std::vector<int> v(count());
    for (int& i : v) i = static_cast<int>(static_cast<std::int64_t>(u64()));
    return v;
  }
  Matrix matrix() {
    const std::size_t rows = count();
    const std::size_t cols = count();
    if (rows != 0 && cols > kMaxCount / rows) throw FormatError("checkpoint: implausible matrix shape");
    Matrix m(rows, cols);
    for (double& d : m.span()) d = f64();
    return m;
  }
  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("checkpoint: unexpected end of data");
  }

 private:
  std::uint64_t le(int n) {
    std::array<unsigned char, 8> buf{};
    bytes(reinterpret_cast<char*>(buf.data()), static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

void write_header(Writer& w, const char (&magic)[8]) {
  for (char c : magic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
}

void read_header(Reader& r, const char (&magic)[8], const char* what) {
  char got[8];
  r.bytes(got, sizeof got);
  if (std::memcmp(got, magic, sizeof got) != 0) throw FormatError(std::string(what) + ": bad magic bytes");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(std::string(what) + ": format version " + std::to_string(version) +
                      " is not supported (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }
}

void write_preprocess(Writer& w, const PreprocessConfig& cfg, const PreprocessStats& s) {
  w.str(cfg.features.name);
  w.ints(cfg.features.sensors);
  w.ints(cfg.features.settings);
  w.boolean(cfg.contextual_norm);
  w.u64(cfg.regimes);
  w.boolean(cfg.normalize_target);
  w.u64(cfg.smooth_window);
  w.f64(cfg.rul_cap);
  w.u64(cfg.seq_len);
  w.u64(cfg.k_val);
  w.u64(cfg.seed);

  w.boolean(s.contextual);
  w.matrix(s.regimes.centroids);
  w.matrix(s.regimes.mean);
  w.matrix(s.regimes.range);
  w.u64(s.regimes.counts.size());
  for (std::uint64_t c : s.regimes.counts) w.u64(c);
  w.doubles(s.x_minmax.min);
  w.doubles(s.x_minmax.max);
  w.doubles(s.z_minmax.min);
  w.doubles(s.z_minmax.max);
  w.f64(s.target.offset);
  w.f64(s.target.scale);
  w.u64(s.smooth_window);
}

void read_preprocess(Reader& r, PreprocessConfig& cfg, PreprocessStats& s) {
  cfg.features.name = r.str();
  cfg.features.sensors = r.ints();
  cfg.features.settings = r.ints();
  cfg.contextual_norm = r.boolean();
  cfg.regimes = r.u64();
  cfg.normalize_target = r.boolean();
  cfg.smooth_window = r.u64();
  cfg.rul_cap = r.f64();
  cfg.seq_len = r.u64();
  cfg.k_val = r.u64();
  cfg.seed = r.u64();

  s.contextual = r.boolean();
  s.regimes.centroids = r.matrix();
  s.regimes.mean = r.matrix();
  s.regimes.range = r.matrix();
  s.regimes.counts.resize(r.count());
  for (std::uint64_t& c : s.regimes.counts) c = r.u64();
  s.x_minmax.min = r.doubles();
  s.x_minmax.max = r.doubles();
  s.z_minmax.min = r.doubles();
  s.z_minmax.max = r.doubles();
  s.target.offset = r.f64();
  s.target.scale = r.f64();
  s.smooth_window = r.u64();
  if (s.x_minmax.min.size() != s.x_minmax.max.size() || s.z_minmax.min.size() != s.z_minmax.max.size() ||
      s.regimes.counts.size() != s.regimes.centroids.rows()) {
    throw FormatError("checkpoint: inconsistent preprocessing statistics");
  }
}

void write_train_config(Writer& w, const TrainConfig& c) {
  w.u64(c.hidden_units);
  w.u64(c.sequence_length);
  w.u64(c.batch_size);
  w.f64(c.learning_rate);
  w.u8(static_cast<std::uint8_t>(c.optimizer));
  w.f64(c.constants.rho);
  w.f64(c.constants.beta1);
  w.f64(c.constants.beta2);
  w.f64(c.constants.epsilon);
  w.u64(c.epochs);
  w.u64(c.patience);
  w.boolean(c.keep_best);
  w.u64(c.seed);
  w.boolean(c.clip_norm.has_value());
  w.f64(c.clip_norm.value_or(0.0));
  w.u8(static_cast<std::uint8_t>(c.loss_scope));
  w.u64(c.basis_degree);
  w.boolean(c.context_features);
  w.u64(c.threads);
  w.f64(c.score_constants.a1);
  w.f64(c.score_constants.a2);
}

void read_train_config(Reader& r, TrainConfig& c) {
  c.hidden_units = r.u64();
  c.sequence_length = r.u64();
  c.batch_size = r.u64();
  c.learning_rate = r.f64();
  const auto opt = r.u8();
  if (opt > 2) throw FormatError("checkpoint: unknown optimizer code");
  c.optimizer = static_cast<OptimizerKind>(opt);
  c.constants.rho = r.f64();
  c.constants.beta1 = r.f64();
  c.constants.beta2 = r.f64();
  c.constants.epsilon = r.f64();
  c.epochs = r.u64();
  c.patience = r.u64();
  c.keep_best = r.boolean();
  c.seed = r.u64();
  const bool has_clip = r.boolean();
  const double clip = r.f64();
  c.clip_norm = has_clip ? std::optional<double>(clip) : std::nullopt;
  const auto scope = r.u8();
  if (scope > 1) throw FormatError("checkpoint: unknown loss scope code");
  c.loss_scope = static_cast<LossScope>(scope);
  c.basis_degree = r.u64();
  c.context_features = r.boolean();
  c.threads = r.u64();
  c.score_constants.a1 = r.f64();
  c.score_constants.a2 = r.f64();
}

template <typename P>
void write_groups(Writer& w, const P& p) {
  for (const ConstParamGroup& g : param_groups(p)) {
    w.u64(g.rows);
    w.u64(g.cols);
    for (double v : g.values) w.f64(v);
  }
}

Matrix read_block(Reader& r, std::size_t rows, std::size_t cols, std::string_view name) {
  const std::size_t got_rows = r.count();
  const std::size_t got_cols = r.count();
  if (got_rows != rows || got_cols != cols) {
    throw FormatError("checkpoint: " + std::string(name) + " is " + std::to_string(got_rows) + "x" +
                      std::to_string(got_cols) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(rows, cols);
  for (double& d : m.span()) d = r.f64();
  return m;
}

Vector read_bias(Reader& r, std::size_t n_y) {
  const Matrix m = read_block(r, n_y, 1, "b_y");
  return Vector(std::vector<double>(m.span().begin(), m.span().end()));
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  Writer w(out);
  write_header(w, kMagic);
  const bool is_cirnn = kind_of(ckpt.model) == ModelKind::cirnn;
  w.u8(is_cirnn ? 1 : 0);
  std::visit(
      [&](const auto& p) {
        w.u64(p.n_x());
        w.u64(ckpt.n_z);
        w.u64(p.n_h());
        w.u64(p.n_y());
      },
      ckpt.model);
  if (is_cirnn) {
    const BasisSpec& b = std::get<CiRnnParams>(ckpt.model).basis;
    w.u8(static_cast<std::uint8_t>(b.kind));
    w.u64(b.degree);
    w.u64(b.n_z);
  } else {
    w.u8(0);
    w.u64(0);
    w.u64(0);
  }
  std::visit([&](const auto& p) { write_groups(w, p); }, ckpt.model);
  write_preprocess(w, ckpt.preprocess, ckpt.stats);
  write_train_config(w, ckpt.train);
  w.str(ckpt.preset);
  if (!out) throw FormatError("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot create " + path.string());
  save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(std::istream& in) {
  Reader r(in);
  read_header(r, kMagic, "checkpoint");
  Checkpoint ckpt;
  const auto kind = r.u8();
  if (kind > 1) throw FormatError("checkpoint: unknown model kind code " + std::to_string(kind));
  const std::size_t n_x = r.count();
  ckpt.n_z = r.count();
  const std::size_t n_h = r.count();
  const std::size_t n_y = r.count();
  const auto basis_kind = r.u8();
  const std::size_t degree = r.count();
  const std::size_t basis_nz = r.count();

  if (kind == 1) {
    if (basis_kind != 0) throw FormatError("checkpoint: unknown basis kind code");
    CiRnnParams p;
    try {
      p.basis = build_spec(BasisKind::polynomial, degree, basis_nz);
    } catch (const ConfigError& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
    const std::size_t cols = n_x * p.basis.m;
    p.As = read_block(r, n_h, cols, "As");
    p.Ah = read_block(r, n_h, cols, "Ah");
    p.Ar = read_block(r, n_h, cols, "Ar");
    p.Us = read_block(r, n_h, n_h, "Us");
    p.Uh = read_block(r, n_h, n_h, "Uh");
    p.Ur = read_block(r, n_h, n_h, "Ur");
    p.V = read_block(r, n_y, n_h, "V");
    p.b_y = read_bias(r, n_y);
    ckpt.model = std::move(p);
  } else {
    GruParams p;
    p.Ws = read_block(r, n_h, n_x, "Ws");
    p.Wh = read_block(r, n_h, n_x, "Wh");
    p.Wr = read_block(r, n_h, n_x, "Wr");
    p.Us = read_block(r, n_h, n_h, "Us");
    p.Uh = read_block(r, n_h, n_h, "Uh");
    p.Ur = read_block(r, n_h, n_h, "Ur");
    p.V = read_block(r, n_y, n_h, "V");
    p.b_y = read_bias(r, n_y);
    ckpt.model = std::move(p);
  }
  read_preprocess(r, ckpt.preprocess, ckpt.stats);
  read_train_config(r, ckpt.train);
  ckpt.preset = r.str();
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return load_checkpoint(in);
}

void save_stats(std::ostream& out, const PreprocessConfig& cfg, const PreprocessStats& stats) {
  Writer w(out);
  write_header(w, kStatsMagic);
  write_preprocess(w, cfg, stats);
  if (!out) throw FormatError("stats: write failed");
}

std::pair<PreprocessConfig, PreprocessStats> load_stats(std::istream& in) {
  Reader r(in);
  read_header(r, kStatsMagic, "stats");
  std::pair<PreprocessConfig, PreprocessStats> out;
  read_preprocess(r, out.first, out.second);
  return out;
}

}  // namespace cirnn
