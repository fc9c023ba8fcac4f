#include "model/network.hpp"

#include <cmath>

#include "common/error.hpp"

namespace pcsod::model {

template <typename T>
Network<T>::Network(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  encoder_ = std::make_unique<Encoder<T>>(store_, config_, rng);
  fab_ = std::make_unique<FeatureAggregation<T>>(store_, config_, rng);
  ppb_semantics_ = std::make_unique<PointPerception<T>>(store_, "ppb_semantics", config_.level_dims[3],
                                                        config_.ppb_semantics, config_.reduction, config_.batch_norm, rng);
  ppb_multiscale_ = std::make_unique<PointPerception<T>>(store_, "ppb_multiscale", config_.fab_channels,
                                                         config_.ppb_multiscale, config_.reduction, config_.batch_norm, rng);
  spb_ = std::make_unique<SaliencyPerception<T>>(store_, config_, rng);
}

template <typename T>
Forward<T> Network<T>::forward(Tape<T>& tape, const NetworkPlan& plan, const Tensor<T>& input, bool training) const {
  if (input.cols() != kInputChannels || input.rows() != plan.batch * plan.points) {
    throw_data("network input must be [" + std::to_string(plan.batch * plan.points) + ", " +
               std::to_string(kInputChannels) + "], got " + ad::shape_string(input.shape()));
  }
  Forward<T> out;
  out.levels = encoder_->forward(tape, plan.encoder, input, training);
  out.compact = fab_->forward(tape, plan.fab, out.levels, training);
  out.semantics = ppb_semantics_->forward(tape, plan.semantics, out.levels[3], training);
  out.multiscale = ppb_multiscale_->forward(tape, plan.multiscale, out.compact, training);
  out.spb = spb_->forward(tape, plan.spb_semantics, plan.spb_multiscale, out.semantics, out.multiscale, training);
  out.logits = out.spb.logits;
  return out;
}

template <typename T>
Tensor<T> input_tensor(const std::vector<EncodedInput>& blocks) {
  if (blocks.empty()) throw_data("empty batch");
  const std::size_t n = blocks.front().rows;
  std::vector<T> values;
  values.reserve(blocks.size() * n * kInputChannels);
  for (const auto& b : blocks) {
    if (b.rows != n) throw_data("batch blocks differ in size");
    for (double v : b.features) values.push_back(static_cast<T>(v));
  }
  return Tensor<T>::constant({blocks.size() * n, kInputChannels}, std::move(values));
}

std::vector<std::vector<Vec3>> block_positions(const std::vector<EncodedInput>& blocks) {
  std::vector<std::vector<Vec3>> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) {
    std::vector<Vec3> pos(b.rows);
    for (std::size_t i = 0; i < b.rows; ++i) pos[i] = b.centered_position(i);
    out.push_back(std::move(pos));
  }
  return out;
}

template <typename T>
std::vector<double> salient_probability(const Tensor<T>& logits) {
  if (logits.cols() != 2) throw_data("expected two-class logits");
  const auto d = logits.data();
  std::vector<double> p(logits.rows());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = d[2 * i], b = d[2 * i + 1];
    // softmax(.)[1], written to stay finite for large logit gaps
    p[i] = b >= a ? 1.0 / (1.0 + std::exp(a - b)) : std::exp(b - a) / (1.0 + std::exp(b - a));
  }
  return p;
}

template class Network<float>;
template class Network<double>;
template Tensor<float> input_tensor<float>(const std::vector<EncodedInput>&);
template Tensor<double> input_tensor<double>(const std::vector<EncodedInput>&);
template std::vector<double> salient_probability<float>(const Tensor<float>&);
template std::vector<double> salient_probability<double>(const Tensor<double>&);

}  // namespace pcsod::model
