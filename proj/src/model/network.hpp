#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "data/point_view.hpp"
#include "model/blocks.hpp"

namespace pcsod::model {

template <typename T>
struct Forward {
  std::array<Tensor<T>, kLevels> levels;
  Tensor<T> compact;     // F_c, level 1
  Tensor<T> semantics;   // F_s, level 4
  Tensor<T> multiscale;  // F_m, level 1
  SpbOutput<T> spb;
  Tensor<T> logits;      // [B * N, 2]
};

template <typename T>
class Network {
 public:
  Network(const ModelConfig& config, std::uint64_t seed);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  Forward<T> forward(Tape<T>& tape, const NetworkPlan& plan, const Tensor<T>& input, bool training) const;

  const ModelConfig& config() const { return config_; }
  ParamStore<T>& params() { return store_; }
  const ParamStore<T>& params() const { return store_; }

  const Encoder<T>& encoder() const { return *encoder_; }
  const FeatureAggregation<T>& aggregation() const { return *fab_; }
  const PointPerception<T>& semantic_perception() const { return *ppb_semantics_; }
  const PointPerception<T>& multiscale_perception() const { return *ppb_multiscale_; }
  const SaliencyPerception<T>& saliency() const { return *spb_; }

 private:
  ModelConfig config_;
  ParamStore<T> store_;
  std::unique_ptr<Encoder<T>> encoder_;
  std::unique_ptr<FeatureAggregation<T>> fab_;
  std::unique_ptr<PointPerception<T>> ppb_semantics_;
  std::unique_ptr<PointPerception<T>> ppb_multiscale_;
  std::unique_ptr<SaliencyPerception<T>> spb_;
};

// Batch-stacked [B * N, 9] input; all blocks must have the same size.
template <typename T>
Tensor<T> input_tensor(const std::vector<EncodedInput>& blocks);

// Centered block positions, the frame all neighborhoods are planned in.
std::vector<std::vector<Vec3>> block_positions(const std::vector<EncodedInput>& blocks);

// Salient-class probability per row of two-class logits.
template <typename T>
std::vector<double> salient_probability(const Tensor<T>& logits);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace pcsod::model
