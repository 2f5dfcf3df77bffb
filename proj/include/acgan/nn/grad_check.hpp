#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "acgan/nn/graph.hpp"
#include "acgan/nn/params.hpp"

namespace acgan::nn {

/// Scalar-valued function under test. It must be deterministic: stochastic
/// ops inside it should use a stream constructed afresh on every call.
using ScalarFn = std::function<Tensor<double>(Graph<double>&)>;

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t worst_index = 0;
  double analytic = 0;
  double numeric = 0;
};

namespace impl {

inline double rel_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

inline void check_into(const ScalarFn& f, Tensor<double>& x, std::span<const double> analytic, double eps,
                       double floor, GradCheckResult& r, std::size_t offset) {
  auto values = x.mutable_data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double orig = values[i];
    Graph<double> off(false);
    values[i] = orig + eps;
    const double fp = f(off).item();
    values[i] = orig - eps;
    const double fm = f(off).item();
    values[i] = orig;
    const double numeric = (fp - fm) / (2 * eps);
    const double e = rel_error(analytic[i], numeric, floor);
    if (e > r.max_rel_error) r = {e, offset + i, analytic[i], numeric};
  }
}

inline Tensor<double> scalar_of(const ScalarFn& f, Graph<double>& g) {
  auto loss = f(g);
  acgan::detail::require(loss.size() == 1, "grad_check: function is not scalar-valued");
  return loss;
}

}  // namespace impl

/// Max over coordinates of |analytic - central difference| / max(|analytic|, |numeric|, floor)
/// for d f / d x, where f reads `x` (the handle is perturbed in place). Below
/// `floor` the check is effectively absolute; raise it when f is O(1) and many
/// gradients sit near the roundoff of the difference quotient (~1e-16 |f| / eps).
inline GradCheckResult grad_check(const ScalarFn& f, Tensor<double> x, double eps = 1e-6, double floor = 1e-8) {
  x.set_requires_grad(true);
  Graph<double> g;
  auto loss = impl::scalar_of(f, g);
  g.backward(loss);
  std::vector<double> analytic(x.grad().begin(), x.grad().end());
  GradCheckResult r;
  impl::check_into(f, x, analytic, eps, floor, r, 0);
  return r;
}

/// Same check over every tensor of a parameter set (coordinates numbered in name order).
inline GradCheckResult grad_check(const ScalarFn& f, ParamSet<double>& params, double eps = 1e-6,
                                  double floor = 1e-8) {
  Graph<double> g;
  auto loss = impl::scalar_of(f, g);
  params.zero_grad();
  g.backward(loss);
  GradCheckResult r;
  std::size_t offset = 0;
  for (auto& [name, p] : params) {
    std::vector<double> analytic(p.size(), 0.0);
    if (p.has_grad()) std::copy(p.grad().begin(), p.grad().end(), analytic.begin());
    impl::check_into(f, p, analytic, eps, floor, r, offset);
    offset += p.size();
  }
  return r;
}

}  // namespace acgan::nn
