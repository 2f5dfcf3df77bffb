#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace acgan {

/// Counter-based random stream.
///
/// The n-th draw of a stream is a pure function of (key, n): output is the
/// SplitMix64 finalizer applied to key + n * golden-gamma. Streams are split
/// by hashing a tag into the key, so a child stream never shares state with
/// its parent and a stochastic op can be handed its own stream without
/// perturbing anybody else's draws. The full state is two 64-bit words.
class Rng {
 public:
  constexpr Rng() = default;
  constexpr explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr Rng from_state(std::uint64_t key, std::uint64_t counter) {
    Rng r;
    r.key_ = key;
    r.counter_ = counter;
    return r;
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

  /// Child stream identified by an integer tag (iteration, epoch, class id...).
  constexpr Rng split(std::uint64_t tag) const {
    return from_state(mix(key_ ^ mix(tag + 0x9e3779b97f4a7c15ULL)), 0);
  }

  /// Child stream identified by a name ("init.g", "latent", ...).
  constexpr Rng split(std::string_view name) const { return split(fnv1a(name)); }

  constexpr std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Same values as out.size() successive next_u64() calls, in a loop the
  /// compiler can vectorize.
  void fill_u64(std::span<std::uint64_t> out) {
    const std::uint64_t base = counter_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mix(key_ + (base + 1 + i) * 0x9e3779b97f4a7c15ULL);
    counter_ += out.size();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Uses rejection so the result is exactly uniform.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal via Box-Muller. Consumes two draws; the sine branch is discarded.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Fills `out` with N(0, sigma^2) samples, using both Box-Muller branches.
  template <class T>
  void fill_normal(std::span<T> out, double sigma = 1.0) {
    std::size_t i = 0;
    for (; i + 1 < out.size(); i += 2) {
      const double u1 = 1.0 - uniform();
      const double u2 = uniform();
      const double r = sigma * std::sqrt(-2.0 * std::log(u1));
      const double th = 2.0 * std::numbers::pi * u2;
      out[i] = static_cast<T>(r * std::cos(th));
      out[i + 1] = static_cast<T>(r * std::sin(th));
    }
    if (i < out.size()) out[i] = static_cast<T>(sigma * normal());
  }

  friend constexpr bool operator==(const Rng&, const Rng&) = default;

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_ = mix(0x6a09e667f3bcc909ULL);
  std::uint64_t counter_ = 0;
};

/// In-place Fisher-Yates shuffle driven by `rng`.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace acgan
