#include "autodiff/adam.hpp"

#include <cmath>

#include "common/error.hpp"

namespace pcsod::ad {

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::uint64_t step,
                 const AdamConfig& config) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw_data("adam: shape mismatch between parameter, gradient and moments");
  }
  if (step == 0) throw_usage("adam: step index is 1-based");
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  const double decay = config.lr * config.weight_decay;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    double p = param[i];
    p -= decay * p;
    const double mi = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    const double vi = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    p -= config.lr * (mi / c1) / (std::sqrt(vi / c2) + config.eps);
    param[i] = static_cast<T>(p);
  }
}

template <typename T>
void adam_step(ParamStore<T>& store, AdamState<T>& state) {
  const auto& params = store.parameters();
  if (state.first_moment.empty() && state.second_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.tensor.size(), T(0));
      state.second_moment.emplace_back(p.tensor.size(), T(0));
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw_data("adam: optimizer state does not match parameter list");
  }
  ++state.step;
  std::vector<T> zeros;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T> t = params[i].tensor;
    std::span<const T> g;
    if (t.has_grad()) {
      g = t.grad();
    } else {
      zeros.assign(t.size(), T(0));
      g = zeros;
    }
    adam_update<T>(t.mutable_data(), g, state.first_moment[i], state.second_moment[i], state.step, state.config);
  }
}

template void adam_update<float>(std::span<float>, std::span<const float>, std::span<float>, std::span<float>,
                                 std::uint64_t, const AdamConfig&);
template void adam_update<double>(std::span<double>, std::span<const double>, std::span<double>, std::span<double>,
                                  std::uint64_t, const AdamConfig&);
template void adam_step<float>(ParamStore<float>&, AdamState<float>&);
template void adam_step<double>(ParamStore<double>&, AdamState<double>&);

}  // namespace pcsod::ad
