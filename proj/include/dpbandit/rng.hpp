#pragma once

#include <cstdint>
#include <unordered_map>

namespace dpbandit {

// Finalizer from SplitMix64; bijective avalanche on 64 bits.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// SplitMix64 step; used to expand seeds, not as the main engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  return mix64(state);
}

// xoshiro256++ (Blackman & Vigna reference implementation).
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    for (auto& word : state_) word = splitmix64(seed);
  }

  std::uint64_t next() {
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

  // Uniform on the open interval (0,1); endpoints excluded so inverse-CDF
  // transforms stay finite.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double bernoulli(double p) { return uniform01() < p ? 1.0 : 0.0; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// Substream purposes. Rewards and mechanism noise never share a stream, so a
// policy that draws extra noise cannot perturb the reward sequence of any arm.
enum class Stream : std::uint32_t { kReward = 0, kMechanism = 1, kTree = 2 };

// Splittable per-run RNG: every (seed, run, purpose, arm) tuple owns an
// independent engine. Identical seeds give bit-identical runs.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t run_id)
      : seed_(seed), run_id_(run_id) {}

  Xoshiro256pp& stream(Stream purpose, std::uint32_t arm = 0) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(purpose) << 32) | arm;
    auto it = streams_.find(key);
    if (it == streams_.end()) {
      std::uint64_t s = mix64(seed_ + 0x9e3779b97f4a7c15ULL * (run_id_ + 1));
      s ^= mix64(key + 0x632be59bd9b4e019ULL);
      it = streams_.emplace(key, Xoshiro256pp(mix64(s))).first;
    }
    return it->second;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t run_id() const { return run_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t run_id_;
  std::unordered_map<std::uint64_t, Xoshiro256pp> streams_;
};

}  // namespace dpbandit
