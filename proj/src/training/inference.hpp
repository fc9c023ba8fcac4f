#pragma once

#include <functional>
#include <vector>

#include "data/point_view.hpp"
#include "data/sampling.hpp"
#include "model/network.hpp"

namespace pcsod::training {

// Maps encoded blocks to one salient probability per row, blocks concatenated.
using BlockPredictor = std::function<std::vector<double>(const std::vector<EncodedInput>&)>;

struct InferenceStats {
  std::size_t chunks_per_vote = 0;
  std::size_t forward_passes = 0;  // blocks pushed through the predictor
};

// Points selected by `indices`, in that order.
PointView subset(const PointView& view, const std::vector<std::size_t>& indices);

// Voting inference over every point of `view`. Each vote draws a fresh chunk
// partition; points visited twice within a vote are averaged, then votes are
// averaged. `batch` blocks go through the predictor per call.
std::vector<double> infer_full_view(const PointView& view, const BlockPredictor& predict, std::size_t block_size,
                                    std::size_t votes, Rng& rng, std::size_t batch = 1,
                                    InferenceStats* stats = nullptr);

// Evaluation-mode predictor for a trained network.
BlockPredictor network_predictor(const model::Network<float>& network);

}  // namespace pcsod::training
