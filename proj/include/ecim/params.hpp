#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "ecim/mlp.hpp"

namespace ecim {

// Ordered view over the parameter (or gradient) storage of a model, used by
// the optimizer and the finite-difference checks. Block order must match
// between a params view and its grads view: layer 0 weight, layer 0 bias,
// layer 1 weight, ...
struct ParamBlocks {
  std::vector<std::span<double>> blocks;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }

  // Flat index across all blocks in order.
  double& at(std::size_t idx) {
    for (auto& b : blocks) {
      if (idx < b.size()) return b[idx];
      idx -= b.size();
    }
    throw std::out_of_range("ParamBlocks::at");
  }

  std::vector<double> to_flat() const {
    std::vector<double> out;
    out.reserve(total());
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    return out;
  }

  void from_flat(std::span<const double> flat) {
    if (flat.size() != total()) throw std::invalid_argument("ParamBlocks::from_flat: size mismatch");
    std::size_t k = 0;
    for (auto& b : blocks) {
      for (double& v : b) v = flat[k++];
    }
  }
};

inline ParamBlocks param_blocks(MlpParams& params) {
  ParamBlocks view;
  for (auto& l : params.layers) {
    view.blocks.emplace_back(l.weight.data);
    view.blocks.emplace_back(l.bias);
  }
  return view;
}

inline ParamBlocks grad_blocks(MlpGrads& grads) {
  ParamBlocks view;
  for (std::size_t i = 0; i < grads.dweight.size(); ++i) {
    view.blocks.emplace_back(grads.dweight[i].data);
    view.blocks.emplace_back(grads.dbias[i]);
  }
  return view;
}

}  // namespace ecim
