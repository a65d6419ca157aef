#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace aoi {

/// Deterministic 64-bit generator (xoshiro256** seeded through splitmix64).
///
/// std::mt19937_64 would do, but the standard distributions are
/// implementation-defined, and reproducibility of simulation output across
/// toolchains is part of the contract here. All draws below are fully
/// specified bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  /// Next 64 random bits.
  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Bias is O(n / 2^64), negligible here.
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Independent child stream. Derivation uses only the construction seed
  /// and the stream id, never the parent's draw position, so adding draws
  /// to one stream cannot perturb another.
  Rng split(std::uint64_t stream) const {
    std::uint64_t x = seed_ + (stream + 1) * 0x9e3779b97f4a7c15ULL;
    splitmix64(x);
    return Rng(splitmix64(x));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

/// Samples an index from a fixed finite distribution by CDF inversion.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("empty distribution");
    cdf_.reserve(probs.size());
    double acc = 0.0;
    for (double p : probs) {
      if (p < 0.0) throw std::invalid_argument("negative probability");
      acc += p;
      cdf_.push_back(acc);
    }
    cdf_.back() = 1.0;  // guard against accumulated round-off
  }

  std::size_t operator()(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    return std::min(i, cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace aoi
