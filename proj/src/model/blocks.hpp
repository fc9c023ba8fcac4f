#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "autodiff/params.hpp"
#include "autodiff/reduce.hpp"
#include "model/config.hpp"
#include "model/plan.hpp"

namespace pcsod::model {

using ad::ParamStore;
using ad::SharedMlp;
using ad::Tape;
using ad::Tensor;

// Four set-abstraction levels: FPS centers, KNN groups against the previous
// level, [relative xyz, neighbor features] through a shared MLP, max over the
// group.
template <typename T>
class Encoder {
 public:
  Encoder(ParamStore<T>& store, const ModelConfig& config, std::mt19937_64& rng);
  std::array<Tensor<T>, kLevels> forward(Tape<T>& tape, const std::array<GroupPlan, kLevels>& plan,
                                         const Tensor<T>& input, bool training) const;

 private:
  std::array<SharedMlp<T>, kLevels> mlps_;
};

// Top-down fusion: upsample, concatenate with the finer level, shared MLP.
template <typename T>
class FeatureAggregation {
 public:
  FeatureAggregation(ParamStore<T>& store, const ModelConfig& config, std::mt19937_64& rng);
  Tensor<T> forward(Tape<T>& tape, const std::array<InterpPlan, 3>& plan, const std::array<Tensor<T>, kLevels>& levels,
                    bool training) const;

 private:
  std::array<SharedMlp<T>, 3> mlps_;
};

// Four KNN branches (relation embedding, center feature, reduction) fused by
// an MLP and summed with an MLP skip branch. Shape-preserving in channels.
// Branches with a single neighbor reduce trivially and carry no attention map.
template <typename T>
class PointPerception {
 public:
  PointPerception(ParamStore<T>& store, const std::string& prefix, std::size_t channels, const PpbConfig& k,
                  ad::Reduction reduction, bool norm, std::mt19937_64& rng);

  Tensor<T> forward(Tape<T>& tape, const PpbPlan& plan, const Tensor<T>& features, bool training) const;

  // Reduced neighborhood features of one branch before its reduction MLP.
  Tensor<T> branch_context(Tape<T>& tape, std::size_t branch, const BranchPlan& plan, const Tensor<T>& features,
                           bool training) const;

  std::size_t channels() const { return channels_; }
  std::size_t embedding_width() const { return embed_; }

 private:
  std::size_t channels_;
  std::size_t embed_;
  ad::Reduction reduction_;
  std::array<SharedMlp<T>, 4> embedding_;
  std::array<SharedMlp<T>, 4> reduction_mlp_;
  std::array<Tensor<T>, 4> attention_;
  SharedMlp<T> fusion_;
  SharedMlp<T> skip_;
};

template <typename T>
struct SpbOutput {
  Tensor<T> semantic;    // MLP of upsampled global semantics
  Tensor<T> multiscale;  // channel softmax of MLP of upsampled multi-scale features
  Tensor<T> enhanced;    // F_e
  Tensor<T> logits;      // two classes per point
};

// Merges upsampled global semantics with softmax-gated multi-scale features and
// predicts two-class logits per input point.
template <typename T>
class SaliencyPerception {
 public:
  SaliencyPerception(ParamStore<T>& store, const ModelConfig& config, std::mt19937_64& rng);
  SpbOutput<T> forward(Tape<T>& tape, const InterpPlan& semantic_plan, const InterpPlan& multiscale_plan,
                       const Tensor<T>& semantics, const Tensor<T>& multiscale, bool training) const;

 private:
  SharedMlp<T> semantic_mlp_;
  SharedMlp<T> multiscale_mlp_;
  SharedMlp<T> fusion_;
  SharedMlp<T> head_;
};

extern template class Encoder<float>;
extern template class Encoder<double>;
extern template class FeatureAggregation<float>;
extern template class FeatureAggregation<double>;
extern template class PointPerception<float>;
extern template class PointPerception<double>;
extern template class SaliencyPerception<float>;
extern template class SaliencyPerception<double>;

}  // namespace pcsod::model
