#pragma once

#include <cmath>
#include <cstdint>

namespace hdqkd {

// splitmix64 step; used to spread (seed, stream) pairs into generator state.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with counter-derived state. Every random draw in the
// simulator comes from a stream keyed by (seed, stream id), so results do
// not depend on scheduling or thread count. The raw transforms below avoid
// std::<random> distributions, whose output is not bit-portable.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t x = seed;
    (void)splitmix64(x);
    x ^= 0xd2b74407b1ce6e93ULL * (stream_id + 1);
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform over {0, ..., n-1}. Exact for the power-of-two counts used here.
  std::uint32_t uniform_index(std::uint32_t n) {
    if ((n & (n - 1)) == 0) return static_cast<std::uint32_t>(next_u64() & (n - 1));
    return static_cast<std::uint32_t>(uniform() * n);
  }

  bool coin() { return (next_u64() & 1) != 0; }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double sigma) { return sigma * normal(); }

  // Poisson count by cumulative inversion; intended for small means.
  int poisson(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cum = p;
    int k = 0;
    while (u >= cum && k < 1024) {
      ++k;
      p *= mean / k;
      cum += p;
    }
    return k;
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace hdqkd
