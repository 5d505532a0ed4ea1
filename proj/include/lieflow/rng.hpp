#pragma once

#include <cmath>
#include <cstdint>

namespace lieflow {

/// Counter-based random stream built on the SplitMix64 finalizer.
///
/// Each draw hashes (key, counter), so the stream is a pure function of the
/// seed and the substream path. Substreams derived from (seed, index) are
/// independent of evaluation order, which is what makes dataset generation
/// and batch-pair construction reproducible across thread counts and
/// platforms. Distributions are implemented here rather than through
/// <random> because libstdc++/libc++ do not promise identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x5851F42D4C957F2DULL)) {}

  /// Independent child stream; `tag` identifies the purpose or index.
  Rng substream(std::uint64_t tag) const {
    Rng r(0);
    r.key_ = mix(key_ ^ mix(tag + 0x9E3779B97F4A7C15ULL));
    r.counter_ = 0;
    r.spare_valid_ = false;
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform integer in [0, n). floor(u*n); bias is < 2^-53 per draw.
  std::int64_t uniform_index(std::int64_t n) {
    return static_cast<std::int64_t>(uniform() * static_cast<double>(n));
  }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (spare_valid_) {
      spare_valid_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // Guard against log(0).
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    spare_valid_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool spare_valid_ = false;
};

/// Order-free 64-bit hash of (a, b); used for index-keyed decisions such as
/// the train/test split.
inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Fixed substream tags so independent pipeline stages never collide.
namespace stream {
constexpr std::uint64_t kDataset = 0x01;
constexpr std::uint64_t kShuffle = 0x02;
constexpr std::uint64_t kTrainPair = 0x03;
constexpr std::uint64_t kInit = 0x04;
constexpr std::uint64_t kSample = 0x05;
constexpr std::uint64_t kEval = 0x06;
constexpr std::uint64_t kJitter = 0x07;
constexpr std::uint64_t kPosterior = 0x08;
constexpr std::uint64_t kScalar = 0x09;
}  // namespace stream

}  // namespace lieflow
