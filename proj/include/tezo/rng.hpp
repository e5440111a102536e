#ifndef TEZO_RNG_HPP
#define TEZO_RNG_HPP

#include <cstdint>
#include <vector>

namespace tezo {

// Counter-based deterministic RNG. Every draw is a pure function of
// (seed, index), so streams are seekable and replay is exact on any
// platform with IEEE-754 doubles.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Steele, Lea, Flood). Bijective on uint64.
constexpr std::uint64_t splitmix_finalize(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Per-iteration seed: zeta_t = finalize(base XOR golden-scrambled t).
// Injective in t for fixed base (the finalizer is a bijection and
// kGoldenGamma is odd), so no collisions over any horizon.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t t) {
  return splitmix_finalize(base_seed ^ (t * kGoldenGamma) ^ kGoldenGamma);
}

// Independent sub-stream seed, used to key per-layer / per-purpose streams
// off one run seed without overlapping counters.
constexpr std::uint64_t derive_substream(std::uint64_t seed, std::uint64_t tag) {
  return splitmix_finalize(splitmix_finalize(seed) ^ (tag * kGoldenGamma));
}

struct SeedSchedule {
  std::uint64_t base_seed = 0;
  std::uint64_t derive(std::uint64_t t) const { return derive_seed(base_seed, t); }
};

// Standard-normal stream via Box-Muller on counter-indexed uniforms.
// Both outputs of each pair are consumed in order; draw i depends only on
// (seed, i), so a stream can be re-created and split arbitrarily.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t cursor() const { return cursor_; }

  double next() { return normal_at(cursor_++); }

  void skip(std::uint64_t k) { cursor_ += k; }

  std::vector<double> sample(std::size_t k) {
    std::vector<double> out(k);
    for (auto& x : out) x = next();
    return out;
  }

  // Draw i of the stream, without touching the cursor.
  double normal_at(std::uint64_t i) const;

 private:
  double uniform_at(std::uint64_t j) const;

  std::uint64_t seed_;
  std::uint64_t cursor_ = 0;
};

}  // namespace tezo

#endif  // TEZO_RNG_HPP
