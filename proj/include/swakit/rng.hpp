#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

namespace swakit {

/// 64-bit finalizer (SplitMix64 constants). Bijective, so distinct inputs
/// never collide.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based generator: draw i of a stream is mix64(key + GOLDEN*i),
/// i.e. SplitMix64 keyed by a stream id. Streams are split by hashing a
/// name or index into the key, which keeps the init / data / hutchinson
/// randomness of one root seed independent of each other.
///
/// The raw u64 stream is reproducible bit-for-bit from (root seed, stream
/// path); derived doubles go through libm (log/cos) and are reproducible
/// on a fixed platform.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  /// Named top-level stream under a root seed.
  static CounterRng stream(std::uint64_t root_seed, std::string_view name) noexcept {
    return CounterRng(mix64(root_seed ^ fnv1a64(name)));
  }

  /// Child stream. Children with distinct indices/names are independent of
  /// each other and of the parent's own draws.
  CounterRng fork(std::uint64_t index) const noexcept {
    return CounterRng(mix64(key_ ^ mix64(index + golden)));
  }
  CounterRng fork(std::string_view name) const noexcept {
    return CounterRng(mix64(key_ ^ fnv1a64(name)));
  }

  std::uint64_t next_u64() noexcept {
    counter_ += golden;
    return mix64(key_ + counter_);
  }

  /// Stream id; feeding it back into CounterRng(key) resumes a fresh stream.
  std::uint64_t key() const noexcept { return key_; }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe to feed into log().
  double next_double_open() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller; consumes exactly two draws per value,
  /// no cached state.
  double next_gaussian() noexcept {
    const double u1 = next_double_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Unbiased integer in [0, n), n >= 1 (Lemire rejection).
  std::uint64_t next_below(std::uint64_t n) noexcept {
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Rademacher draw: +1 or -1 with equal probability.
  double next_sign() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[next_below(i)]);
    }
  }

private:
  static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace swakit
