#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "autodiff/ops.hpp"
#include "autodiff/tensor.hpp"

namespace pcsod::ad {

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
struct NamedBuffers {
  std::string name;
  std::shared_ptr<BatchNormBuffers<T>> buffers;
};

// Every learnable tensor and normalization buffer of a model, in
// registration order.
template <typename T>
class ParamStore {
 public:
  Tensor<T> add_parameter(const std::string& name, Shape shape, std::vector<T> init);
  std::shared_ptr<BatchNormBuffers<T>> add_norm_buffers(const std::string& name, std::size_t channels);

  const std::vector<NamedParameter<T>>& parameters() const { return params_; }
  const std::vector<NamedBuffers<T>>& norm_buffers() const { return buffers_; }
  const Tensor<T>* find(const std::string& name) const;

  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<NamedParameter<T>> params_;
  std::vector<NamedBuffers<T>> buffers_;
};

struct MlpLayer {
  std::size_t width = 0;
  bool norm = true;
  bool relu = true;
};

struct MlpSpec {
  std::size_t input = 0;
  std::vector<MlpLayer> layers;

  // Every layer linear -> normalization -> rectifier.
  static MlpSpec standard(std::size_t input, const std::vector<std::size_t>& widths, bool norm = true);
  // As standard, but the last layer is a plain linear map.
  static MlpSpec head(std::size_t input, const std::vector<std::size_t>& widths, bool norm = true);

  std::size_t output() const { return layers.empty() ? input : layers.back().width; }
  void validate() const;
};

// Point-wise MLP: identical weights applied to every row.
template <typename T>
class SharedMlp {
 public:
  SharedMlp() = default;
  SharedMlp(ParamStore<T>& store, const std::string& prefix, const MlpSpec& spec, std::mt19937_64& rng);

  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, bool training) const;
  const MlpSpec& spec() const { return spec_; }

 private:
  struct Layer {
    Tensor<T> weight;
    Tensor<T> bias;  // only without normalization
    Tensor<T> gamma, beta;
    std::shared_ptr<BatchNormBuffers<T>> buffers;
    bool norm = false;
    bool relu = false;
  };
  MlpSpec spec_;
  std::vector<Layer> layers_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template class SharedMlp<float>;
extern template class SharedMlp<double>;

}  // namespace pcsod::ad
