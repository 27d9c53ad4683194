// Copyright 2026 The fidcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <utility>

namespace fidcal {

/// Deterministic pseudo-random generator (xoshiro256** seeded via splitmix64)
/// with Box-Muller normals. The standard library distributions are not
/// bit-stable across libstdc++ versions, and every sampled value in the
/// pipeline must replay exactly from (seed, stream path), so the generator
/// is pinned here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = split(x);
  }

  /// Derives an independent substream from a base seed and a path of
  /// indices, e.g. stream(seed, {kPurposeNoise, epoch, image_index}).
  /// Identical (seed, path) pairs always produce identical streams.
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t x = mix(seed ^ 0xa076'1d64'78bd'642fULL);
    for (std::uint64_t p : path) x = mix(x ^ mix(p ^ 0xe703'7ed1'a0b4'28dbULL));
    return Rng(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  /// Fisher-Yates shuffle.
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = uniform_int(static_cast<int>(i + 1));
      std::swap(first[i], first[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58'476d'1ce4'e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d0'49bb'1331'11ebULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t split(std::uint64_t& state) {
    state += 0x9e37'79b9'7f4a'7c15ULL;
    return mix(state);
  }

  std::uint64_t s_[4] = {};
  double cached_ = 0.0;
  bool have_cached_ = false;
};

/// Stream purpose tags, so independent consumers of the same base seed can
/// never collide even when their other path indices coincide.
namespace stream_tag {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kDegrade = 2;
inline constexpr std::uint64_t kAugment = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kBatchOrder = 5;
inline constexpr std::uint64_t kValDegrade = 6;
inline constexpr std::uint64_t kSynth = 7;
inline constexpr std::uint64_t kEval = 8;
inline constexpr std::uint64_t kStage = 9;
}  // namespace stream_tag

}  // namespace fidcal
