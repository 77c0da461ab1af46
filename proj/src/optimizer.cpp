// SPDX-License-Identifier: Apache-2.0
#include "cirnn/optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cirnn/error.hpp"

namespace cirnn {
namespace {

template <typename P>
void step_impl(OptimizerState& state, P& params, const P& grads) {
  auto theta = param_groups(params);
  const auto g = param_groups(grads);

  for (std::size_t gi = 0; gi < kParamGroups; ++gi) {
    if (theta[gi].values.size() != g[gi].values.size()) {
      throw ShapeError("optimizer_step: gradient shape mismatch in '" + std::string(g[gi].name) + "'");
    }
    for (double v : g[gi].values) {
      if (!std::isfinite(v)) {
        throw TrainingError("non-finite gradient in parameter group '" + std::string(g[gi].name) + "'");
      }
    }
  }

  if (state.first.empty()) {
    state.first.resize(kParamGroups);
    state.second.resize(kParamGroups);
    for (std::size_t gi = 0; gi < kParamGroups; ++gi) {
      const std::size_t n = theta[gi].values.size();
      if (state.kind == OptimizerKind::adam) state.first[gi].assign(n, 0.0);
      if (state.kind != OptimizerKind::sgd) state.second[gi].assign(n, 0.0);
    }
  }

  ++state.step;
  const double lr = state.learning_rate;
  const auto& c = state.constants;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  for (std::size_t gi = 0; gi < kParamGroups; ++gi) {
    auto values = theta[gi].values;
    const auto grad = g[gi].values;
    switch (state.kind) {
      case OptimizerKind::sgd:
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * grad[i];
        break;
      case OptimizerKind::rmsprop: {
        auto& v = state.second[gi];
        for (std::size_t i = 0; i < values.size(); ++i) {
          v[i] = c.rho * v[i] + (1.0 - c.rho) * grad[i] * grad[i];
          values[i] -= lr * grad[i] / std::sqrt(v[i] + c.epsilon);
        }
        break;
      }
      case OptimizerKind::adam: {
        auto& m = state.first[gi];
        auto& v = state.second[gi];
        for (std::size_t i = 0; i < values.size(); ++i) {
          m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
          v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
          const double m_hat = m[i] / bias1;
          const double v_hat = v[i] / bias2;
          values[i] -= lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
        break;
      }
    }
  }
}

}  // namespace

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::rmsprop: return "rmsprop";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "sgd") return OptimizerKind::sgd;
  if (lower == "adam") return OptimizerKind::adam;
  if (lower == "rmsprop") return OptimizerKind::rmsprop;
  throw ConfigError("unknown optimizer '" + name + "' (allowed: sgd, adam, rmsprop)");
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate,
                              const OptimizerConstants& constants) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  OptimizerState state;
  state.kind = kind;
  state.learning_rate = learning_rate;
  state.constants = constants;
  return state;
}

void optimizer_step(OptimizerState& state, GruParams& params, const GruGradients& grads) {
  step_impl(state, params, grads);
}

void optimizer_step(OptimizerState& state, CiRnnParams& params, const CiRnnGradients& grads) {
  step_impl(state, params, grads);
}

}  // namespace cirnn
