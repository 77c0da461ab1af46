// SPDX-License-Identifier: Apache-2.0
#include <string>

#include "cirnn/error.hpp"
#include "cirnn/presets.hpp"
#include "doctest.h"

using namespace cirnn;

namespace {

struct Row {
  const char* name;
  std::size_t hidden, seq, batch;
  double lr;
  OptimizerKind opt;
  bool contextual_norm, context_features;
};

constexpr OptimizerKind kAdam = OptimizerKind::adam;
constexpr OptimizerKind kRms = OptimizerKind::rmsprop;

const Row kRows[] = {
    {"CiRNN_D1", 15, 20, 64, 1e-2, kAdam, false, true},
    {"GRU_D1_CxF", 25, 20, 128, 5e-3, kAdam, false, true},
    {"GRU_D1", 10, 15, 64, 9e-3, kAdam, false, false},
    {"CiRNN_D2", 20, 15, 64, 5e-3, kRms, true, true},
    {"CiRNN_D2_CxF", 15, 20, 128, 5e-3, kRms, false, true},
    {"GRU_D2", 25, 15, 128, 1e-2, kAdam, false, false},
    {"GRU_D2_CxF", 30, 15, 128, 5e-3, kAdam, false, true},
    {"GRU_D2_CxN", 20, 10, 64, 8e-3, kRms, true, false},
    {"GRU_D2_CxN_CxF", 15, 10, 64, 9e-3, kRms, true, true},
    {"CiRNN_D3", 30, 10, 64, 8e-3, kRms, false, true},
    {"GRU_D3_CxF", 15, 10, 64, 2e-3, kRms, false, true},
    {"GRU_D3", 20, 10, 64, 5e-3, kRms, false, false},
    {"CiRNN_D4", 15, 10, 128, 8e-3, kRms, true, true},
    {"CiRNN_D4_CxF", 25, 20, 128, 9e-3, kAdam, false, true},
    {"GRU_D4", 25, 20, 128, 8e-3, kAdam, false, false},
    {"GRU_D4_CxF", 25, 15, 256, 5e-3, kAdam, false, true},
    {"GRU_D4_CxN", 20, 15, 256, 1e-2, kRms, true, false},
    {"GRU_D4_CxN_CxF", 15, 15, 256, 9e-3, kAdam, true, true},
};

}  // namespace

TEST_CASE("preset table") {
  REQUIRE(presets().size() == std::size(kRows));
  for (const Row& row : kRows) {
    CAPTURE(row.name);
    const Preset& p = find_preset(row.name);
    CHECK(p.name == row.name);
    CHECK(p.hidden_units == row.hidden);
    CHECK(p.sequence_length == row.seq);
    CHECK(p.batch_size == row.batch);
    CHECK(p.learning_rate == row.lr);
    CHECK(p.optimizer == row.opt);
    CHECK(p.contextual_norm == row.contextual_norm);
    CHECK(p.context_features == row.context_features);
    const std::string name = row.name;
    CHECK(p.kind == (name.rfind("CiRNN", 0) == 0 ? ModelKind::cirnn : ModelKind::gru));
    CHECK(p.subset == "FD00" + name.substr(name.find("_D") + 2, 1));
  }
}

TEST_CASE("apply_preset") {
  TrainConfig cfg;
  cfg.epochs = 7;
  apply_preset(find_preset("GRU_D1"), cfg);
  CHECK(cfg.hidden_units == 10);
  CHECK(cfg.sequence_length == 15);
  CHECK(cfg.batch_size == 64);
  CHECK(cfg.learning_rate == 9e-3);
  CHECK(cfg.optimizer == OptimizerKind::adam);
  CHECK_FALSE(cfg.context_features);
  CHECK(cfg.epochs == 7);

  apply_preset(find_preset("CiRNN_D2"), cfg);
  CHECK(cfg.hidden_units == 20);
  CHECK(cfg.optimizer == OptimizerKind::rmsprop);
  // All grid sizes are legal; preset learning rates only warn.
  for (const Preset& p : presets()) {
    TrainConfig c;
    apply_preset(p, c);
    CHECK_NOTHROW(check_grid(c));
  }
}

TEST_CASE("unknown preset") {
  CHECK_THROWS_WITH_AS(find_preset("CiRNN_D5"), doctest::Contains("CiRNN_D1"), ConfigError);
  CHECK_THROWS_AS(find_preset("cirnn_d1"), ConfigError);
}
