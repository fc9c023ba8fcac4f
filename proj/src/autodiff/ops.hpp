#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autodiff/tensor.hpp"

namespace pcsod::ad {

// x: [..., K] times w: [K, C] -> [..., C].
template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w);

// Adds b: [C] to every row.
template <typename T>
Tensor<T> add_bias(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& b);

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor);

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x);

// Channel-axis concatenation; all inputs share leading dimensions.
template <typename T>
Tensor<T> concat(Tape<T>& tape, const std::vector<Tensor<T>>& parts);

// Row gather. `leading` gives the output's leading dimensions (their product
// must equal indices.size()); the channel count is x's.
template <typename T>
Tensor<T> gather_rows(Tape<T>& tape, const Tensor<T>& x, std::span<const std::size_t> indices, Shape leading);

// out[i] = sum_j weights[i*per_row + j] * x[indices[i*per_row + j]].
template <typename T>
Tensor<T> weighted_gather(Tape<T>& tape, const Tensor<T>& x, std::span<const std::size_t> indices,
                          std::span<const double> weights, std::size_t per_row);

// Reductions over the neighbor axis of x: [M, k, C] -> [M, C].
template <typename T>
Tensor<T> group_max(Tape<T>& tape, const Tensor<T>& x);
template <typename T>
Tensor<T> group_mean(Tape<T>& tape, const Tensor<T>& x);
template <typename T>
Tensor<T> group_sum(Tape<T>& tape, const Tensor<T>& x);

// Softmax over the neighbor axis, independently per channel: [M,k,C] -> [M,k,C].
template <typename T>
Tensor<T> group_softmax(Tape<T>& tape, const Tensor<T>& x);

// Softmax over the channel axis of every row (max-subtracted).
template <typename T>
Tensor<T> softmax_rows(Tape<T>& tape, const Tensor<T>& x);

// Mean over rows of -log softmax(logits)[label].
template <typename T>
Tensor<T> cross_entropy(Tape<T>& tape, const Tensor<T>& logits, std::span<const std::uint8_t> labels);

template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x);

// sum_i x_i * weights_i with constant weights.
template <typename T>
Tensor<T> weighted_sum(Tape<T>& tape, const Tensor<T>& x, std::span<const T> weights);

// Fingerprint of the branches taken by piecewise-linear ops (rectifier sign,
// neighbor argmax). Finite-difference checks compare fingerprints to tell when
// a perturbation crossed a kink. Collected per thread while installed.
struct BranchTrace {
  std::uint64_t hash = 0;
  void mix(std::uint64_t v) { hash = (hash ^ v) * 0x100000001b3ULL; }
};
void set_branch_trace(BranchTrace* trace);

template <typename T>
struct BatchNormBuffers {
  std::vector<T> running_mean;
  std::vector<T> running_var;
};

inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEps = 1e-5;

// Per-channel normalization over all rows. In training mode batch statistics
// are used and the running averages move as r <- m*r + (1-m)*batch.
template <typename T>
Tensor<T> batch_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     BatchNormBuffers<T>& buffers, bool training, double momentum = kBatchNormMomentum,
                     double eps = kBatchNormEps);

}  // namespace pcsod::ad
