#pragma once

#include <cmath>
#include <cstdint>

namespace fedmax {

// Counter-based stream: draw i is a pure function of (key, i), so a stream
// can be reconstructed anywhere from its derivation path and replayed. Two
// streams with the same (root_seed, path) produce identical sequences no
// matter which thread runs them.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = key_ + counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe under log().
  double next_unit_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform index in [0, n). n must be >= 1.
  std::uint64_t next_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {

inline std::uint64_t mix_fold(std::uint64_t h, std::uint64_t x) {
  h += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = h ^ (x + 0x2545f4914f6cdd1dULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Derives the stream for a (stage, round, client, iter) path. Stages of the
// training algorithms are 1-based; stage 0 is reserved for non-training
// draws (see rng_purpose).
inline RngStream derive_stream(std::uint64_t root_seed, std::uint64_t stage,
                               std::uint64_t round, std::uint64_t client,
                               std::uint64_t iter) {
  std::uint64_t key = detail::mix_fold(root_seed, 0x66656d6178ULL);
  key = detail::mix_fold(key, stage);
  key = detail::mix_fold(key, round);
  key = detail::mix_fold(key, client);
  key = detail::mix_fold(key, iter);
  return RngStream(key);
}

// Reserved `round` values under stage 0, keeping every consumer on a
// distinct path for one root seed.
namespace rng_purpose {
inline constexpr std::uint64_t kSynthClusters = 0;
inline constexpr std::uint64_t kSynthSamples = 1;
inline constexpr std::uint64_t kSynthShuffle = 2;
inline constexpr std::uint64_t kPartitionHet = 3;
inline constexpr std::uint64_t kPartitionHom = 4;
inline constexpr std::uint64_t kTrainTestSplit = 5;
inline constexpr std::uint64_t kRoundSelect = 6;
}  // namespace rng_purpose

}  // namespace fedmax
