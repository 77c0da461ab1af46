// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "cirnn/tensor.hpp"

namespace cirnn {

/// Affine map between model-space targets and raw RUL cycles:
/// raw = offset + scale * model.
struct TargetScale {
  double offset = 0.0;
  double scale = 1.0;

  double to_raw(double model_value) const noexcept { return offset + scale * model_value; }
  double to_model(double raw_value) const noexcept { return (raw_value - offset) / scale; }

  friend bool operator==(const TargetScale&, const TargetScale&) = default;
};

/// One training/evaluation sequence. Rows of xs/zs are consecutive cycles of
/// a single unit, oldest first.
struct Window {
  Matrix xs;               // T x n_x primary features
  Matrix zs;               // T x n_z context features
  double y = 0.0;          // target at the last step (model space)
  std::vector<double> ys;  // target at every step (model space)
  int unit_id = 0;
  int end_cycle = 0;
  bool padded = false;     // front-padded by repeating the first cycle
};

struct SequenceBatch {
  std::vector<Window> windows;
  std::size_t n_x = 0;
  std::size_t n_z = 0;
  std::size_t seq_len = 0;
  TargetScale target;
};

/// Primary inputs as seen by a model: xs, or [xs | zs] when context features
/// are fed to a plain GRU as extra primary features.
Matrix model_inputs(const Window& w, bool append_context);

}  // namespace cirnn
