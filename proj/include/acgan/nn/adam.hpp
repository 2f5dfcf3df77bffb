#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "acgan/nn/params.hpp"

namespace acgan::nn {

struct AdamConfig {
  double alpha = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    acgan::detail::require(alpha >= 0.0, "adam: alpha must be non-negative");
    acgan::detail::require(beta1 >= 0.0 && beta1 < 1.0, "adam: beta1 must be in [0, 1)");
    acgan::detail::require(beta2 >= 0.0 && beta2 < 1.0, "adam: beta2 must be in [0, 1)");
    acgan::detail::require(epsilon > 0.0, "adam: epsilon must be positive");
  }
};

/// First/second moment buffers keyed by parameter name, plus the step count.
template <class T>
struct AdamState {
  AdamConfig config;
  std::map<std::string, std::vector<T>> m;
  std::map<std::string, std::vector<T>> v;
  std::uint64_t t = 0;

  static AdamState fresh(const ParamSet<T>& params, AdamConfig config) {
    config.validate();
    AdamState s;
    s.config = config;
    for (const auto& [name, p] : params) {
      s.m.emplace(name, std::vector<T>(p.size(), T(0)));
      s.v.emplace(name, std::vector<T>(p.size(), T(0)));
    }
    return s;
  }
};

/// One bias-corrected Adam descent step on every parameter, using its grad buffer.
template <class T>
void adam_step(ParamSet<T>& params, AdamState<T>& state) {
  const auto& cfg = state.config;
  for (auto& [name, p] : params) {
    acgan::detail::require(p.has_grad(), "adam: parameter " + name + " has no gradient");
    auto mi = state.m.find(name);
    auto vi = state.v.find(name);
    acgan::detail::require(mi != state.m.end() && vi != state.v.end() && mi->second.size() == p.size() &&
                               vi->second.size() == p.size(),
                           "adam: optimizer state does not match parameter " + name);
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(cfg.beta1, t)));
  const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(cfg.beta2, t)));
  const T alpha = static_cast<T>(cfg.alpha), eps = static_cast<T>(cfg.epsilon);
  for (auto& [name, p] : params) {
    auto& m = state.m[name];
    auto& v = state.v[name];
    auto w = p.mutable_data();
    const auto gr = p.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const T gi = gr[i];
      m[i] = b1 * m[i] + (T(1) - b1) * gi;
      v[i] = b2 * v[i] + (T(1) - b2) * gi * gi;
      const T m_hat = m[i] * c1;
      const T v_hat = v[i] * c2;
      w[i] -= alpha * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

}  // namespace acgan::nn
