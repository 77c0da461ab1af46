// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cirnn/cells.hpp"
#include "cirnn/gradients.hpp"

namespace cirnn {

/// Shape of one random gradient-check instance.
struct GradCheckCase {
  std::size_t n_x = 3;
  std::size_t n_z = 2;
  std::size_t n_h = 4;
  std::size_t steps = 5;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  ModelKind kind = ModelKind::cirnn;
  GradCheckCase shape;
  std::array<GroupError, kParamGroups> groups;
  double max_error = 0.0;
};

/// count random shapes with n_x in 2..6, n_z in 1..3, n_h in 3..8 and
/// T in 1..8 (or fixed_steps when given).
std::vector<GradCheckCase> gradcheck_cases(std::size_t count, std::uint64_t seed,
                                           std::optional<std::size_t> fixed_steps = std::nullopt);

/// Builds a random instance (degree-2 basis for the CiRNN) and compares the
/// analytic gradient with central differences.
GradCheckResult run_gradcheck(ModelKind kind, const GradCheckCase& c, double eps = 1e-5,
                              LossScope scope = LossScope::final_step);

}  // namespace cirnn
