#include "autodiff/reduce.hpp"

#include "common/error.hpp"

namespace pcsod::ad {

std::string to_string(Reduction r) {
  switch (r) {
    case Reduction::Mean: return "mean";
    case Reduction::Max: return "max";
    case Reduction::MeanMax: return "mean_max";
    case Reduction::Attentive: return "attentive";
  }
  return "mean_max";
}

Reduction parse_reduction(const std::string& name) {
  if (name == "mean") return Reduction::Mean;
  if (name == "max") return Reduction::Max;
  if (name == "mean_max") return Reduction::MeanMax;
  if (name == "attentive") return Reduction::Attentive;
  throw_usage("unknown reduction '" + name + "' (mean|max|mean_max|attentive)");
}

std::size_t reduced_width(Reduction mode, std::size_t channels) {
  return mode == Reduction::MeanMax ? 2 * channels : channels;
}

template <typename T>
Tensor<T> reduce(Tape<T>& tape, const Tensor<T>& x, Reduction mode, const Tensor<T>* attention) {
  if (x.shape().size() != 3) throw_data("reduce: expected [M,k,C], got " + shape_string(x.shape()));
  if (x.shape()[1] == 0) throw_data("reduce: neighbor count must be positive");
  switch (mode) {
    case Reduction::Mean: return group_mean(tape, x);
    case Reduction::Max: return group_max(tape, x);
    case Reduction::MeanMax: return concat<T>(tape, {group_max(tape, x), group_mean(tape, x)});
    case Reduction::Attentive: {
      if (!attention) throw_usage("attentive reduction requires a score map");
      const Tensor<T> scores = group_softmax(tape, matmul(tape, x, *attention));
      return group_sum(tape, mul(tape, x, scores));
    }
  }
  throw_usage("unknown reduction");
}

template Tensor<float> reduce(Tape<float>&, const Tensor<float>&, Reduction, const Tensor<float>*);
template Tensor<double> reduce(Tape<double>&, const Tensor<double>&, Reduction, const Tensor<double>*);

}  // namespace pcsod::ad
