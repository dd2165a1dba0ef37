#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecim/params.hpp"

namespace ecim {

// Adam with bias correction. Moment buffers are flat over the block view in
// block order, so the same state can drive any model exposing ParamBlocks.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n, double lr_ = 1e-3)
      : m(n, 0.0), v(n, 0.0), lr(lr_) {}
};

// One update over flat spans. Throws without touching params or state if any
// gradient entry is non-finite; callers treat that as "skip this update".
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: size mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
  }
  state.step_count += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

// Block-view overload: flattens in block order. Validates all gradient
// entries before mutating anything.
inline void adam_step(ParamBlocks params, const ParamBlocks& grads, AdamState& state) {
  if (params.total() != grads.total() || params.total() != state.m.size()) {
    throw std::invalid_argument("adam_step: size mismatch");
  }
  for (const auto& b : grads.blocks) {
    for (double g : b) {
      if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
    }
  }
  state.step_count += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  std::size_t k = 0;
  for (std::size_t bi = 0; bi < params.blocks.size(); ++bi) {
    auto& pb = params.blocks[bi];
    const auto& gb = grads.blocks[bi];
    for (std::size_t i = 0; i < pb.size(); ++i, ++k) {
      const double g = gb[i];
      state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
      state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
      const double mhat = state.m[k] / c1;
      const double vhat = state.v[k] / c2;
      pb[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace ecim
