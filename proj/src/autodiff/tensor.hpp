#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcsod::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::function<void(Node&)> backward;
  std::vector<std::shared_ptr<Node>> parents;

  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

// Shared handle to a node. Tensors treat every leading dimension as rows and
// the last dimension as channels.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor constant(Shape shape, std::vector<T> values);
  static Tensor parameter(Shape shape, std::vector<T> values);
  static Tensor zeros(Shape shape) { return constant(shape, std::vector<T>(element_count(shape), T(0))); }

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  std::size_t cols() const { return node_->shape.empty() ? 1 : node_->shape.back(); }
  std::size_t rows() const { return cols() == 0 ? 0 : size() / cols(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const T> data() const { return node_->value; }
  std::span<T> mutable_data() { return node_->value; }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad() { node_->grad.clear(); }
  T item() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Records differentiable operations in creation order. One writer at a time;
// separate tapes are independent.
template <typename T>
class Tape {
 public:
  // Creates an output node. When no parent requires a gradient the result is a
  // constant and `backward` is dropped.
  Tensor<T> record(Shape shape, std::vector<T> value, std::vector<Tensor<T>> parents,
                   std::function<void(Node<T>&)> backward);

  // Seeds d(loss)/d(loss) = 1 and propagates to every tracked tensor.
  // Throws for non-scalar losses or a tape that was already consumed.
  void backward(const Tensor<T>& loss);

  void reset();
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  std::vector<std::shared_ptr<Node<T>>> nodes_;
  bool consumed_ = false;
};

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace pcsod::ad
