// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <sstream>
#include <string>

#include "cirnn/checkpoint.hpp"
#include "cirnn/error.hpp"
#include "cirnn/metrics.hpp"
#include "cirnn/presets.hpp"
#include "cirnn/rng.hpp"
#include "cirnn/synthetic.hpp"
#include "doctest.h"

using namespace cirnn;

namespace {

struct Fixture {
  Checkpoint ckpt;
  SequenceBatch test;
};

Fixture fixture(ModelKind kind) {
  SynthSpec spec;
  spec.n_units = 5;
  spec.n_test_units = 3;
  spec.seed = 8;
  spec.noise_std = 0.01;
  const SynthData data = generate(spec);
  PreprocessConfig pre;
  pre.features = custom_features({1, 2, 3, 4}, {1, 2, 3});
  pre.contextual_norm = true;
  pre.regimes = 3;
  pre.seq_len = 10;
  pre.k_val = 10;
  const Prepared p = preprocess(data.train, data.test, data.truth, pre);

  Fixture f;
  Rng rng(3);
  if (kind == ModelKind::cirnn) {
    f.ckpt.model = init_cirnn(4, build_spec(BasisKind::polynomial, 2, 3), 10, 1, rng);
  } else {
    f.ckpt.model = init_gru(4, 10, 1, rng);
  }
  f.ckpt.n_z = 3;
  f.ckpt.preprocess = p.config;
  f.ckpt.stats = p.stats;
  apply_preset(find_preset("CiRNN_D2"), f.ckpt.train);
  f.ckpt.train.clip_norm.reset();
  f.ckpt.preset = "CiRNN_D2";
  f.test = make_windows(p.test, 10, WindowMode::last, p.stats.target);
  return f;
}

std::string bytes_of(const Checkpoint& c) {
  std::ostringstream out;
  save_checkpoint(out, c);
  return out.str();
}

}  // namespace

TEST_CASE("checkpoint round trip is exact") {
  for (ModelKind kind : {ModelKind::cirnn, ModelKind::gru}) {
    CAPTURE(to_string(kind));
    const Fixture f = fixture(kind);
    const std::string bytes = bytes_of(f.ckpt);
    std::istringstream in(bytes);
    const Checkpoint back = load_checkpoint(in);
    CHECK(back == f.ckpt);
    CHECK(bytes_of(back) == bytes);

    const EvalReport a = evaluate_model(f.ckpt.model, f.test, false);
    const EvalReport b = evaluate_model(back.model, f.test, false);
    REQUIRE(a.n_units() == b.n_units());
    for (std::size_t i = 0; i < a.n_units(); ++i) CHECK(a.units[i].rmse == b.units[i].rmse);
    CHECK(a.score_mean == b.score_mean);
  }
}

TEST_CASE("checkpoint rejects bad input") {
  const std::string bytes = bytes_of(fixture(ModelKind::cirnn).ckpt);

  std::string version = bytes;
  version[8] = 2;
  std::istringstream v(version);
  CHECK_THROWS_WITH_AS(load_checkpoint(v), doctest::Contains("format version 2 is not supported"), FormatError);

  std::string magic = bytes;
  magic[0] = 'X';
  std::istringstream m(magic);
  CHECK_THROWS_WITH_AS(load_checkpoint(m), doctest::Contains("bad magic"), FormatError);

  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    CAPTURE(cut);
    std::istringstream t(bytes.substr(0, cut));
    CHECK_THROWS_AS(load_checkpoint(t), FormatError);
  }
  CHECK_THROWS_AS(load_checkpoint(std::filesystem::path("/nonexistent/ckpt.bin")), FormatError);
}

TEST_CASE("stats round trip") {
  const Fixture f = fixture(ModelKind::cirnn);
  std::ostringstream out;
  save_stats(out, f.ckpt.preprocess, f.ckpt.stats);
  std::istringstream in(out.str());
  const auto [cfg, stats] = load_stats(in);
  CHECK(cfg == f.ckpt.preprocess);
  CHECK(stats == f.ckpt.stats);

  std::istringstream wrong(bytes_of(f.ckpt));
  CHECK_THROWS_AS(load_stats(wrong), FormatError);
}
