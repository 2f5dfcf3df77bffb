#pragma once

#include <span>
#include <string>

#include "acgan/model/networks.hpp"

namespace acgan {

/// Log arguments are clamped to [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-7;

namespace impl {

template <class T>
nn::Tensor<T> safe_log(nn::Graph<T>& g, const nn::Tensor<T>& p) {
  return nn::clamped_log(g, p, static_cast<T>(kProbFloor), static_cast<T>(1.0 - kProbFloor));
}

template <class T>
const nn::Tensor<T>& source_of(const HeadOutput<T>& out) {
  detail::require(out.source_prob.has_value(), "objective: head has no source unit");
  return *out.source_prob;
}

}  // namespace impl

/// mean log P(S = real | X) when `real` is true, else mean log P(S = fake | X).
template <class T>
nn::Tensor<T> source_log_likelihood(nn::Graph<T>& g, const HeadOutput<T>& out, bool real) {
  const auto& p = impl::source_of(out);
  return nn::mean(g, impl::safe_log(g, real ? p : nn::one_minus(g, p)));
}

/// mean log P(C = labels[i] | X_i).
template <class T>
nn::Tensor<T> class_log_likelihood(nn::Graph<T>& g, const HeadOutput<T>& out, std::span<const int> labels) {
  const std::size_t n = out.class_probs.dim(0), k = out.class_probs.dim(1);
  detail::require(labels.size() == n, "objective: " + std::to_string(labels.size()) + " labels for a batch of " +
                                          std::to_string(n));
  for (int c : labels)
    detail::require(c >= 0 && static_cast<std::size_t>(c) < k,
                    "objective: label " + std::to_string(c) + " out of range for " + std::to_string(k) + " classes");
  return nn::mean(g, impl::safe_log(g, nn::pick(g, out.class_probs, labels)));
}

/// L_S = mean log P(S=real | X_real) + mean log P(S=fake | X_fake).
template <class T>
nn::Tensor<T> source_loss(nn::Graph<T>& g, const HeadOutput<T>& real, const HeadOutput<T>& fake) {
  return nn::add(g, source_log_likelihood(g, real, true), source_log_likelihood(g, fake, false));
}

/// L_C = mean log P(C=c | X_real) + mean log P(C=c | X_fake).
template <class T>
nn::Tensor<T> class_loss(nn::Graph<T>& g, const HeadOutput<T>& real, std::span<const int> real_labels,
                         const HeadOutput<T>& fake, std::span<const int> fake_labels) {
  return nn::add(g, class_log_likelihood(g, real, real_labels), class_log_likelihood(g, fake, fake_labels));
}

enum class GeneratorLoss {
  non_saturating,  // maximize mean log P(S=real | X_fake) + mean log P(C=c | X_fake)
  minimax,         // maximize mean log P(C=c | X_fake) - mean log P(S=fake | X_fake)
};

inline const char* generator_loss_name(GeneratorLoss l) {
  return l == GeneratorLoss::non_saturating ? "non_saturating" : "minimax";
}

}  // namespace acgan
