// Copyright 2026 The oilbid Authors
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

#ifndef OILBID_RNG_HPP_
#define OILBID_RNG_HPP_

#include <cstdint>
#include <limits>

namespace oilbid {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent 64-bit seed from a parent seed and a key.
inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) {
  return splitmix64(parent ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

// SplitMix64 stream satisfying UniformRandomBitGenerator. Cheap to construct,
// so the simulator opens one stream per (step, IO) instead of threading a
// single engine through the episode.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed) : state_(seed) {}
  StreamRng(std::uint64_t seed, int t, int i)
      : state_(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(t)),
                           static_cast<std::uint64_t>(i))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace oilbid

#endif  // OILBID_RNG_HPP_
