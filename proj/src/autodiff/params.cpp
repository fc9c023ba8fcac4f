#include "autodiff/params.hpp"

#include <cmath>

#include "common/error.hpp"

namespace pcsod::ad {

template <typename T>
Tensor<T> ParamStore<T>::add_parameter(const std::string& name, Shape shape, std::vector<T> init) {
  if (find(name)) throw_usage("duplicate parameter name " + name);
  Tensor<T> t = Tensor<T>::parameter(std::move(shape), std::move(init));
  params_.push_back({name, t});
  return t;
}

template <typename T>
std::shared_ptr<BatchNormBuffers<T>> ParamStore<T>::add_norm_buffers(const std::string& name, std::size_t channels) {
  auto b = std::make_shared<BatchNormBuffers<T>>();
  b->running_mean.assign(channels, T(0));
  b->running_var.assign(channels, T(1));
  buffers_.push_back({name, b});
  return b;
}

template <typename T>
const Tensor<T>* ParamStore<T>::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p.tensor;
  }
  return nullptr;
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

MlpSpec MlpSpec::standard(std::size_t input, const std::vector<std::size_t>& widths, bool norm) {
  MlpSpec s;
  s.input = input;
  for (auto w : widths) s.layers.push_back({w, norm, true});
  return s;
}

MlpSpec MlpSpec::head(std::size_t input, const std::vector<std::size_t>& widths, bool norm) {
  MlpSpec s = standard(input, widths, norm);
  if (!s.layers.empty()) {
    s.layers.back().norm = false;
    s.layers.back().relu = false;
  }
  return s;
}

void MlpSpec::validate() const {
  if (input == 0) throw_usage("MLP input width must be positive");
  for (const auto& l : layers) {
    if (l.width == 0) throw_usage("MLP layer width must be positive");
  }
}

template <typename T>
SharedMlp<T>::SharedMlp(ParamStore<T>& store, const std::string& prefix, const MlpSpec& spec, std::mt19937_64& rng)
    : spec_(spec) {
  spec.validate();
  std::size_t in = spec.input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& ls = spec.layers[i];
    const std::string name = prefix + ".layer" + std::to_string(i);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<T> w(in * ls.width);
    for (auto& v : w) v = static_cast<T>(u(rng));
    Layer layer;
    layer.norm = ls.norm;
    layer.relu = ls.relu;
    layer.weight = store.add_parameter(name + ".weight", {in, ls.width}, std::move(w));
    if (ls.norm) {
      layer.gamma = store.add_parameter(name + ".norm.scale", {ls.width}, std::vector<T>(ls.width, T(1)));
      layer.beta = store.add_parameter(name + ".norm.shift", {ls.width}, std::vector<T>(ls.width, T(0)));
      layer.buffers = store.add_norm_buffers(name + ".norm", ls.width);
    } else {
      std::vector<T> b(ls.width);
      for (auto& v : b) v = static_cast<T>(u(rng));
      layer.bias = store.add_parameter(name + ".bias", {ls.width}, std::move(b));
    }
    layers_.push_back(std::move(layer));
    in = ls.width;
  }
}

template <typename T>
Tensor<T> SharedMlp<T>::forward(Tape<T>& tape, const Tensor<T>& x, bool training) const {
  if (x.cols() != spec_.input) {
    throw_data("MLP width mismatch: expected " + std::to_string(spec_.input) + " input channels, got " +
               std::to_string(x.cols()));
  }
  Tensor<T> h = x;
  for (const auto& layer : layers_) {
    h = matmul(tape, h, layer.weight);
    if (layer.norm) {
      h = batch_norm(tape, h, layer.gamma, layer.beta, *layer.buffers, training);
    } else {
      h = add_bias(tape, h, layer.bias);
    }
    if (layer.relu) h = relu(tape, h);
  }
  return h;
}

template class ParamStore<float>;
template class ParamStore<double>;
template class SharedMlp<float>;
template class SharedMlp<double>;

}  // namespace pcsod::ad
