#include "autodiff/tensor.hpp"

#include <sstream>

#include "common/error.hpp"

namespace pcsod::ad {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << ']';
  return out.str();
}

template <typename T>
Tensor<T> Tensor<T>::constant(Shape shape, std::vector<T> values) {
  if (element_count(shape) != values.size()) {
    throw_usage("tensor data length " + std::to_string(values.size()) + " does not match shape " +
                shape_string(shape));
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::parameter(Shape shape, std::vector<T> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw_usage("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

template <typename T>
Tensor<T> Tape<T>::record(Shape shape, std::vector<T> value, std::vector<Tensor<T>> parents,
                          std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool tracked = false;
  for (const auto& p : parents) tracked = tracked || p.requires_grad();
  if (tracked) {
    node->requires_grad = true;
    node->backward = std::move(backward);
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.shared());
    nodes_.push_back(node);
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (loss.size() != 1) throw_usage("backward requires a scalar loss, got shape " + shape_string(loss.shape()));
  if (consumed_) throw_usage("tape already consumed by backward; call reset()");
  if (!loss.requires_grad()) throw_usage("loss does not depend on any tracked tensor");
  consumed_ = true;
  loss.node()->ensure_grad()[0] += T(1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node<T>& n = **it;
    if (n.grad.empty() || !n.backward) continue;
    n.backward(n);
  }
}

template <typename T>
void Tape<T>::reset() {
  nodes_.clear();
  consumed_ = false;
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace pcsod::ad
