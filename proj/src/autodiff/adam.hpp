#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autodiff/params.hpp"

namespace pcsod::ad {

struct AdamConfig {
  double lr = 5e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

// Bias-corrected Adam with decoupled weight decay: p <- p - lr*wd*p, then the
// Adam delta. `step` is the 1-based step index.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::uint64_t step,
                 const AdamConfig& config);

// One optimizer step over every parameter of the store. Parameters that
// received no gradient are treated as having a zero gradient.
template <typename T>
void adam_step(ParamStore<T>& store, AdamState<T>& state);

}  // namespace pcsod::ad
