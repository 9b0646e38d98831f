#pragma once

#include <cstdint>
#include <string_view>

namespace csic {

// Counter-based, splittable generator ("SplitMix64 counter streams").
//
// A stream is identified by a 64-bit key. Draw number i of a stream is
// mix64(key + (i + 1) * kGolden), where mix64 is the SplitMix64 finalizer.
// Child streams are derived with key' = mix64(key ^ mix64(id + kGolden)), so
// any (seed, path of ids) names a reproducible sequence independent of how
// many draws other streams have consumed. Draw i can be computed directly
// with at(i), which lets parallel loops produce the same noise as a serial one.
class Rng {
public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t seed) : key_(mix64(seed)) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  Rng child(std::uint64_t id) const {
    Rng r(0);
    r.key_ = mix64(key_ ^ mix64(id + kGolden));
    return r;
  }
  Rng child(std::string_view name) const { return child(fnv1a(name)); }

  std::uint64_t at(std::uint64_t i) const { return mix64(key_ + (i + 1) * kGolden); }
  std::uint64_t next_u64() { return at(counter_++); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased (rejection on the top range).
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p = 0.5) { return uniform() < p; }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal();

  // Standard normal at a fixed counter position (draws 2i and 2i+1).
  double normal_at(std::uint64_t i) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace csic
