#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace veritas {

/// Seeded random stream. Uniform and Bernoulli draws are computed from the raw
/// 64-bit engine output so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Derives an independent seed for a named sub-stream of a master seed.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    std::swap(items[i - 1], items[j]);
  }
}

// Stream identifiers used with split_seed.
namespace streams {
inline constexpr std::uint64_t kShuffle = 1;
inline constexpr std::uint64_t kGibbs = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kPretrain = 4;
}  // namespace streams

}  // namespace veritas
