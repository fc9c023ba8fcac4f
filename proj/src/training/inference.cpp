#include "training/inference.hpp"

#include "common/error.hpp"

namespace pcsod::training {

PointView subset(const PointView& view, const std::vector<std::size_t>& indices) {
  PointView out;
  out.scene_id = view.scene_id;
  out.view_id = view.view_id;
  out.positions.reserve(indices.size());
  out.colors.reserve(indices.size());
  if (view.labels) out.labels.emplace().reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= view.size()) throw_data("subset index out of range");
    out.positions.push_back(view.positions[i]);
    out.colors.push_back(view.colors[i]);
    if (view.labels) out.labels->push_back((*view.labels)[i]);
  }
  return out;
}

std::vector<double> infer_full_view(const PointView& view, const BlockPredictor& predict, std::size_t block_size,
                                    std::size_t votes, Rng& rng, std::size_t batch, InferenceStats* stats) {
  if (votes == 0) throw_usage("votes must be positive");
  if (batch == 0) throw_usage("inference batch must be positive");
  const std::size_t n = view.size();
  // Means are accumulated as offsets from the first value seen, so equal
  // inputs average to exactly that value.
  std::vector<double> base(n, 0.0), offsets(n, 0.0);
  InferenceStats local;
  const EncodedInput encoded = encode_input(view);
  for (std::size_t vote = 0; vote < votes; ++vote) {
    const ChunkPlan plan = plan_chunks(view, block_size, rng);
    local.chunks_per_vote = plan.blocks.size();
    std::vector<double> first_hit(n, 0.0), vote_offsets(n, 0.0);
    std::vector<std::uint32_t> hits(n, 0);
    for (std::size_t first = 0; first < plan.blocks.size(); first += batch) {
      const std::size_t last = std::min(plan.blocks.size(), first + batch);
      std::vector<EncodedInput> inputs;
      for (std::size_t b = first; b < last; ++b) inputs.push_back(select_rows(encoded, plan.blocks[b]));
      const std::vector<double> probs = predict(inputs);
      local.forward_passes += last - first;
      std::size_t row = 0;
      for (std::size_t b = first; b < last; ++b) {
        for (std::size_t idx : plan.blocks[b]) {
          if (row >= probs.size()) throw_numeric("predictor returned too few probabilities");
          const double p = probs[row++];
          if (hits[idx]++ == 0) first_hit[idx] = p;
          else vote_offsets[idx] += p - first_hit[idx];
        }
      }
      if (row != probs.size()) throw_numeric("predictor returned too many probabilities");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (hits[i] == 0) throw_numeric("chunk plan left a point uncovered");
      const double mean = first_hit[i] + vote_offsets[i] / hits[i];
      if (vote == 0) base[i] = mean;
      else offsets[i] += mean - base[i];
    }
  }
  std::vector<double> total(n);
  for (std::size_t i = 0; i < n; ++i) total[i] = base[i] + offsets[i] / static_cast<double>(votes);
  if (stats) *stats = local;
  return total;
}

BlockPredictor network_predictor(const model::Network<float>& network) {
  return [&network](const std::vector<EncodedInput>& blocks) {
    const auto plan = model::plan_network(network.config(), model::block_positions(blocks));
    ad::Tape<float> tape;
    const auto out = network.forward(tape, plan, model::input_tensor<float>(blocks), false);
    return model::salient_probability(out.logits);
  };
}

}  // namespace pcsod::training
