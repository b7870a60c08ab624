#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace qlim {

// What a random stream is used for. Combined with a salt (usually the server
// count n) into the purpose tag of a StreamKey.
enum class Purpose : std::uint64_t {
  events = 1,
  init = 2,
  vwait = 3,
  diffusion = 4,
  stationary = 5,
  reference = 6,
  property = 7,
};

constexpr std::uint64_t purpose_tag(Purpose p, std::uint64_t salt = 0) {
  return (static_cast<std::uint64_t>(p) << 48) ^ salt;
}

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t purpose = 0;
};

// Counter-based stream: draw i is a pure function of (key, i), so results do
// not depend on which worker runs a replication or in what order.
// Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(StreamKey key)
      : key_(splitmix64(splitmix64(splitmix64(key.seed) ^ key.replication) ^
                        key.purpose)) {}
  Stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t purpose)
      : Stream(StreamKey{seed, replication, purpose}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal() { return normal_(*this); }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qlim
