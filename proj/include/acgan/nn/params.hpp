#pragma once

#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "acgan/core/rng.hpp"
#include "acgan/nn/tensor.hpp"

namespace acgan::nn {

/// Named parameters, iterated in lexicographic name order.
template <class T>
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor<T>>;

  void add(const std::string& name, Tensor<T> t) {
    acgan::detail::require(!name.empty(), "parameter name must not be empty");
    t.set_requires_grad(true);
    const bool inserted = params_.emplace(name, std::move(t)).second;
    acgan::detail::require(inserted, "duplicate parameter name: " + name);
  }

  const Tensor<T>& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw InvalidArgument("unknown parameter: " + name);
    return it->second;
  }
  Tensor<T>& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw InvalidArgument("unknown parameter: " + name);
    return it->second;
  }

  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t size() const { return params_.size(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params_) n += t.size();
    return n;
  }

  void zero_grad() {
    for (auto& [name, t] : params_) t.zero_grad();
  }

  /// Deep copy: values only, fresh grad buffers.
  ParamSet clone() const {
    ParamSet out;
    for (const auto& [name, t] : params_) out.add(name, Tensor<T>(t.shape(), t.values(), true));
    return out;
  }

  /// Bitwise equality of names, shapes and values.
  bool same_values(const ParamSet& other) const {
    if (params_.size() != other.params_.size()) return false;
    auto a = params_.begin();
    auto b = other.params_.begin();
    for (; a != params_.end(); ++a, ++b) {
      if (a->first != b->first || a->second.shape() != b->second.shape()) return false;
      if (std::memcmp(a->second.data().data(), b->second.data().data(), a->second.size() * sizeof(T)) != 0)
        return false;
    }
    return true;
  }

 private:
  Map params_;
};

/// Turns off requires_grad for a parameter set for the lifetime of the guard,
/// so ops downstream of it skip weight gradients.
template <class T>
class FrozenParams {
 public:
  explicit FrozenParams(ParamSet<T>& params) : params_(params) {
    for (auto& [name, t] : params_) t.set_requires_grad(false);
  }
  ~FrozenParams() {
    for (auto& [name, t] : params_) t.set_requires_grad(true);
  }
  FrozenParams(const FrozenParams&) = delete;
  FrozenParams& operator=(const FrozenParams&) = delete;

 private:
  ParamSet<T>& params_;
};

enum class ParamRole { weight, bias, bn_gamma, bn_beta };

struct ParamSpec {
  std::string name;
  Shape shape;
  ParamRole role;
};

/// Weights ~ N(0, weight_std^2); biases and batch-norm shifts 0; batch-norm scales 1.
/// Each tensor draws from its own stream keyed by name, so the result does not
/// depend on declaration order.
template <class T>
ParamSet<T> init_params(const std::vector<ParamSpec>& specs, const Rng& rng, double weight_std = 0.02) {
  ParamSet<T> params;
  for (const auto& s : specs) {
    std::vector<T> v(numel(s.shape), T(0));
    switch (s.role) {
      case ParamRole::weight: {
        Rng stream = rng.split(s.name);
        stream.fill_normal(std::span<T>(v), weight_std);
        break;
      }
      case ParamRole::bn_gamma:
        std::fill(v.begin(), v.end(), T(1));
        break;
      case ParamRole::bias:
      case ParamRole::bn_beta:
        break;
    }
    params.add(s.name, Tensor<T>(s.shape, std::move(v), true));
  }
  return params;
}

}  // namespace acgan::nn
