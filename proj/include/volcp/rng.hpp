#pragma once

#include <array>
#include <cstdint>

namespace volcp {

// SplitMix64 finalizer. Used for seed derivation and stream splitting.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic per-stream seed: hash of (master seed, stream index).
// Replication r of a Monte Carlo run draws from its own stream, so results
// do not depend on how work is scheduled across threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// xoshiro256++ (Blackman & Vigna). Fully specified, platform independent.
class Xoshiro256pp {
public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    // Fill state with successive SplitMix64 outputs, the seeding the
    // authors recommend.
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
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

  // Uniform on (0,1), strictly inside: ((x >> 11) + 0.5) * 2^-53.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse CDF; bit-reproducible everywhere.
  double gaussian();

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_;
};

// Inverse standard normal CDF, Wichura's AS 241 (PPND16) rational
// approximation, accurate to ~1e-15. p must lie in (0,1).
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

inline double Xoshiro256pp::gaussian() { return normal_quantile(uniform01()); }

}  // namespace volcp
