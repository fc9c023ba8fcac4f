#pragma once

#include <string>

#include "autodiff/ops.hpp"

namespace pcsod::ad {

enum class Reduction { Mean, Max, MeanMax, Attentive };

std::string to_string(Reduction r);
Reduction parse_reduction(const std::string& name);

// Output channels of reduce() for C input channels.
std::size_t reduced_width(Reduction mode, std::size_t channels);

// Neighbor-axis reduction of x: [M, k, C].
//   Mean, Max  -> [M, C]
//   MeanMax    -> [M, 2C] as [max ; mean]
//   Attentive  -> [M, C]: scores = x * attention ([C, C]), exponentially
//                 normalized over k per channel, then the score-weighted sum.
template <typename T>
Tensor<T> reduce(Tape<T>& tape, const Tensor<T>& x, Reduction mode, const Tensor<T>* attention = nullptr);

}  // namespace pcsod::ad
