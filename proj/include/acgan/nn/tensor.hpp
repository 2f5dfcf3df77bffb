#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "acgan/core/error.hpp"

namespace acgan::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

enum class Mode { train, eval };

/// Dense row-major array that can take part in a reverse-mode graph.
///
/// A Tensor is a cheap handle; copies share the same storage. Values are
/// treated as immutable once an op has produced them. Only the gradient
/// buffer (and parameter values, through the optimizer) change afterwards.
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false)
      : node_(std::make_shared<Node>()) {
    for (auto d : shape) detail::require(d > 0, "tensor dimensions must be positive, got " + to_string(shape));
    detail::require(numel(shape) == values.size(),
                    "tensor data length " + std::to_string(values.size()) + " does not match shape " + to_string(shape));
    node_->shape = std::move(shape);
    node_->data = std::move(values);
    node_->requires_grad = requires_grad;
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }

  static Tensor full(Shape shape, T value, bool requires_grad = false) {
    const auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
  }

  static Tensor scalar(T value, bool requires_grad = false) { return Tensor({1}, {value}, requires_grad); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node().shape; }
  std::size_t dim(std::size_t i) const { return node().shape.at(i); }
  std::size_t rank() const { return node().shape.size(); }
  std::size_t size() const { return node().data.size(); }
  bool requires_grad() const { return node().requires_grad; }

  std::span<const T> data() const { return node().data; }
  /// Write access to the values. Ops use this on freshly created outputs and
  /// optimizers use it on parameters; nothing else should.
  std::span<T> mutable_data() { return node().data; }
  const std::vector<T>& values() const { return node().data; }

  T item() const {
    detail::require(size() == 1, "item() on non-scalar tensor of shape " + to_string(shape()));
    return node().data[0];
  }

  bool has_grad() const { return !node().grad.empty(); }

  /// Gradient buffer, allocated as zeros on first access. Writable through a
  /// const handle: gradients are the one mutable part of a tensor.
  std::span<T> grad() const {
    auto& n = node();
    if (n.grad.empty()) n.grad.assign(n.data.size(), T(0));
    return n.grad;
  }

  void zero_grad() const {
    auto& n = node();
    if (!n.grad.empty()) std::fill(n.grad.begin(), n.grad.end(), T(0));
  }

  void set_requires_grad(bool on) { node().requires_grad = on; }

  /// New leaf holding a copy of the values, outside any graph.
  Tensor detach() const { return Tensor(shape(), node().data, false); }

  bool all_finite() const {
    return std::all_of(node().data.begin(), node().data.end(), [](T v) { return std::isfinite(v); });
  }

  /// Identity of the underlying storage (two handles to one tensor compare equal).
  const void* id() const { return node_.get(); }

 private:
  struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
  };

  Node& node() const {
    if (!node_) throw InvalidArgument("use of undefined tensor");
    return *node_;
  }

  std::shared_ptr<Node> node_;
};

template <class To, class From>
Tensor<To> cast(const Tensor<From>& t) {
  std::vector<To> v(t.data().begin(), t.data().end());
  return Tensor<To>(t.shape(), std::move(v), false);
}

}  // namespace acgan::nn
