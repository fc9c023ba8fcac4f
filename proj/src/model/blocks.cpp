#include "model/blocks.hpp"

#include <cmath>

#include "common/error.hpp"

namespace pcsod::model {

using ad::MlpSpec;
using ad::Reduction;

template <typename T>
Encoder<T>::Encoder(ParamStore<T>& store, const ModelConfig& config, std::mt19937_64& rng) {
  std::size_t in = kInputChannels;
  for (std::size_t l = 0; l < kLevels; ++l) {
    const std::size_t out = config.level_dims[l];
    mlps_[l] = SharedMlp<T>(store, "encoder.level" + std::to_string(l + 1),
                            MlpSpec::standard(3 + in, {std::max<std::size_t>(1, out / 2), out}, config.batch_norm),
                            rng);
    in = out;
  }
}

template <typename T>
std::array<Tensor<T>, kLevels> Encoder<T>::forward(Tape<T>& tape, const std::array<GroupPlan, kLevels>& plan,
                                                   const Tensor<T>& input, bool training) const {
  std::array<Tensor<T>, kLevels> levels;
  Tensor<T> prev = input;
  for (std::size_t l = 0; l < kLevels; ++l) {
    const GroupPlan& g = plan[l];
    std::vector<T> rel(g.relative.begin(), g.relative.end());
    const auto relative = Tensor<T>::constant({g.centers, g.k, 3}, std::move(rel));
    const auto neighbors = ad::gather_rows(tape, prev, g.neighbor_rows, {g.centers, g.k});
    const auto grouped = ad::concat<T>(tape, {relative, neighbors});
    levels[l] = ad::group_max(tape, mlps_[l].forward(tape, grouped, training));
    prev = levels[l];
  }
  return levels;
}

template <typename T>
FeatureAggregation<T>::FeatureAggregation(ParamStore<T>& store, const ModelConfig& config, std::mt19937_64& rng) {
  const auto& d = config.level_dims;
  // Stage outputs: level 3 width, level 2 width, then the compact width.
  mlps_[0] = SharedMlp<T>(store, "fab.stage3", MlpSpec::standard(d[2] + d[3], {d[2]}, config.batch_norm), rng);
  mlps_[1] = SharedMlp<T>(store, "fab.stage2", MlpSpec::standard(d[1] + d[2], {d[1]}, config.batch_norm), rng);
  mlps_[2] = SharedMlp<T>(store, "fab.stage1",
                          MlpSpec::standard(d[0] + d[1], {config.fab_channels, config.fab_channels}, config.batch_norm),
                          rng);
}

template <typename T>
Tensor<T> FeatureAggregation<T>::forward(Tape<T>& tape, const std::array<InterpPlan, 3>& plan,
                                         const std::array<Tensor<T>, kLevels>& levels, bool training) const {
  Tensor<T> coarse = levels[3];
  for (std::size_t stage = 0; stage < 3; ++stage) {
    const InterpPlan& ip = plan[stage];
    const auto up = ad::weighted_gather(tape, coarse, ip.indices, ip.weights, ip.per_row);
    const auto& fine = levels[2 - stage];
    coarse = mlps_[stage].forward(tape, ad::concat<T>(tape, {fine, up}), training);
  }
  return coarse;
}

template <typename T>
PointPerception<T>::PointPerception(ParamStore<T>& store, const std::string& prefix, std::size_t channels,
                                    const PpbConfig& k, Reduction reduction, bool norm, std::mt19937_64& rng)
    : channels_(channels), embed_(std::max<std::size_t>(1, channels / 2)), reduction_(reduction) {
  // The center feature is constant along the neighbor axis, so each reduction
  // passes it through unchanged: mean_max sees [max(e), x, mean(e), x].
  const std::size_t reduced = ad::reduced_width(reduction, embed_) + (reduction == Reduction::MeanMax ? 2 : 1) * channels;
  for (std::size_t b = 0; b < 4; ++b) {
    const std::string name = prefix + ".branch" + std::to_string(b + 1);
    embedding_[b] = SharedMlp<T>(store, name + ".embed", MlpSpec::standard(kRelationWidth, {embed_, embed_}, norm), rng);
    if (reduction == Reduction::Attentive && k.k[b] > 1) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(embed_));
      std::uniform_real_distribution<double> u(-bound, bound);
      std::vector<T> w(embed_ * embed_);
      for (auto& v : w) v = static_cast<T>(u(rng));
      attention_[b] = store.add_parameter(name + ".attention", {embed_, embed_}, std::move(w));
    }
    reduction_mlp_[b] = SharedMlp<T>(store, name + ".reduce", MlpSpec::standard(reduced, {channels}, norm), rng);
  }
  fusion_ = SharedMlp<T>(store, prefix + ".fuse", MlpSpec::standard(4 * channels, {channels}, norm), rng);
  skip_ = SharedMlp<T>(store, prefix + ".skip", MlpSpec::standard(channels, {channels}, norm), rng);
}

template <typename T>
Tensor<T> PointPerception<T>::branch_context(Tape<T>& tape, std::size_t branch, const BranchPlan& plan,
                                             const Tensor<T>& features, bool training) const {
  const std::size_t rows = features.rows();
  if (plan.relation.size() != rows * plan.k * kRelationWidth) {
    throw_data("point perception: plan does not match feature rows");
  }
  std::vector<T> rel(plan.relation.begin(), plan.relation.end());
  const auto relation = Tensor<T>::constant({rows, plan.k, kRelationWidth}, std::move(rel));
  const auto embedded = embedding_[branch].forward(tape, relation, training);
  if (reduction_ == Reduction::MeanMax) {
    const auto max_part = ad::group_max(tape, embedded);
    const auto mean_part = ad::group_mean(tape, embedded);
    return ad::concat<T>(tape, {max_part, features, mean_part, features});
  }
  if (reduction_ == Reduction::Attentive && !attention_[branch].defined()) {
    if (plan.k != 1) throw_data("point perception: branch planned with k > 1 has no attention map");
    return ad::concat<T>(tape, {ad::group_mean(tape, embedded), features});
  }
  const auto reduced =
      ad::reduce(tape, embedded, reduction_, attention_[branch].defined() ? &attention_[branch] : nullptr);
  return ad::concat<T>(tape, {reduced, features});
}

template <typename T>
Tensor<T> PointPerception<T>::forward(Tape<T>& tape, const PpbPlan& plan, const Tensor<T>& features,
                                      bool training) const {
  if (features.cols() != channels_) {
    throw_data("point perception: expected " + std::to_string(channels_) + " channels, got " +
               std::to_string(features.cols()));
  }
  if (plan.rows != features.rows()) throw_data("point perception: plan rows do not match features");
  std::vector<Tensor<T>> branches;
  for (std::size_t b = 0; b < 4; ++b) {
    const auto context = branch_context(tape, b, plan.branches[b], features, training);
    branches.push_back(reduction_mlp_[b].forward(tape, context, training));
  }
  const auto fused = fusion_.forward(tape, ad::concat<T>(tape, branches), training);
  return ad::add(tape, fused, skip_.forward(tape, features, training));
}

template <typename T>
SaliencyPerception<T>::SaliencyPerception(ParamStore<T>& store, const ModelConfig& config, std::mt19937_64& rng) {
  const std::size_t w = config.spb_channels;
  semantic_mlp_ = SharedMlp<T>(store, "spb.semantic", MlpSpec::standard(config.level_dims[3], {w}, config.batch_norm), rng);
  multiscale_mlp_ = SharedMlp<T>(store, "spb.multiscale", MlpSpec::standard(config.fab_channels, {w}, config.batch_norm), rng);
  fusion_ = SharedMlp<T>(store, "spb.fuse", MlpSpec::standard(2 * w, {w}, config.batch_norm), rng);
  head_ = SharedMlp<T>(store, "head", MlpSpec::head(w, {config.head_hidden, 2}, config.batch_norm), rng);
}

template <typename T>
SpbOutput<T> SaliencyPerception<T>::forward(Tape<T>& tape, const InterpPlan& semantic_plan,
                                            const InterpPlan& multiscale_plan, const Tensor<T>& semantics,
                                            const Tensor<T>& multiscale, bool training) const {
  SpbOutput<T> out;
  const auto up_s = ad::weighted_gather(tape, semantics, semantic_plan.indices, semantic_plan.weights, semantic_plan.per_row);
  const auto up_m =
      ad::weighted_gather(tape, multiscale, multiscale_plan.indices, multiscale_plan.weights, multiscale_plan.per_row);
  out.semantic = semantic_mlp_.forward(tape, up_s, training);
  out.multiscale = ad::softmax_rows(tape, multiscale_mlp_.forward(tape, up_m, training));
  out.enhanced = fusion_.forward(tape, ad::concat<T>(tape, {out.semantic, out.multiscale}), training);
  out.logits = head_.forward(tape, out.enhanced, training);
  return out;
}

template class Encoder<float>;
template class Encoder<double>;
template class FeatureAggregation<float>;
template class FeatureAggregation<double>;
template class PointPerception<float>;
template class PointPerception<double>;
template class SaliencyPerception<float>;
template class SaliencyPerception<double>;

}  // namespace pcsod::model
