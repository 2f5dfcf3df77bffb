#pragma once

#include <functional>
#include <initializer_list>
#include <unordered_map>
#include <utility>
#include <vector>

#include "acgan/nn/tensor.hpp"

namespace acgan::nn {

/// Tape of differentiable operations in execution order.
///
/// Ops append a backward closure after computing their output, so the tape is
/// topologically sorted by construction and cycles cannot be formed.
/// backward() replays the tape once, newest first.
template <class T>
class Graph {
 public:
  /// A disabled graph records nothing; ops run forward-only (inference).
  explicit Graph(bool enabled = true) : enabled_(enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  /// Registers an op. `inputs` are the tensors whose grads the closure may
  /// accumulate into; `output` is the tensor whose grad it reads.
  void record(std::vector<Tensor<T>> inputs, Tensor<T> output, std::function<void()> backward) {
    for (auto& t : inputs) touch(t);
    touch(output);
    ops_.push_back({std::move(backward), output});
  }

  bool enabled() const { return enabled_; }
  std::size_t size() const { return ops_.size(); }
  bool empty() const { return ops_.empty(); }

  /// Reverse sweep from a scalar loss. All gradient buffers of tensors seen by
  /// this graph are reset first, so afterwards each holds exactly d(loss)/d(t)
  /// and tensors the loss does not depend on hold zeros.
  void backward(Tensor<T> loss) {
    detail::require(loss.size() == 1, "backward() needs a scalar loss, got shape " + to_string(loss.shape()));
    detail::require(loss.requires_grad(), "loss does not depend on any tensor that requires grad");
    for (auto& [id, t] : seen_) {
      if (t.requires_grad()) t.zero_grad();
    }
    loss.grad()[0] = T(1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      // Ops whose output never received gradient contribute nothing.
      if (!it->output.has_grad()) continue;
      it->backward();
    }
  }

  /// Drops the tape, releasing saved intermediates.
  void clear() {
    ops_.clear();
    seen_.clear();
  }

 private:
  struct Op {
    std::function<void()> backward;
    Tensor<T> output;
  };

  void touch(const Tensor<T>& t) {
    if (t.requires_grad()) seen_.try_emplace(t.id(), t);
  }

  bool enabled_ = true;
  std::vector<Op> ops_;
  std::unordered_map<const void*, Tensor<T>> seen_;
};

}  // namespace acgan::nn

namespace acgan::nn {

/// True when an op over `inputs` must be recorded on `g`.
template <class T>
bool tracks(const Graph<T>& g, std::initializer_list<const Tensor<T>*> inputs) {
  if (!g.enabled()) return false;
  for (const auto* t : inputs)
    if (t && t->defined() && t->requires_grad()) return true;
  return false;
}

}  // namespace acgan::nn
