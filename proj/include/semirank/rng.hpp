#pragma once

#include <cstdint>
#include <initializer_list>

namespace semirank {

// SplitMix64 (Steele, Lea & Flood 2014). Chosen because substreams can be
// derived by key folding, so every (trial, edge, ...) tuple owns an
// independent stream and results do not depend on iteration order or on how
// work is split across threads. No std:: distributions are used anywhere:
// their output is implementation-defined and would break byte-identical
// reproducibility.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps the
  // distribution exact and platform-independent.
  std::uint64_t uniform_int(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

// Stream ids separating the independent uses of one root seed.
namespace stream_tag {
inline constexpr std::uint64_t er = 0x45;
inline constexpr std::uint64_t clique_a = 0xA1;
inline constexpr std::uint64_t clique_b = 0xB1;
inline constexpr std::uint64_t cluster = 0xC1;
inline constexpr std::uint64_t compare = 0xD1;
inline constexpr std::uint64_t jl = 0x71;
}  // namespace stream_tag

// Derives a substream seed from a root seed and a list of stream ids by
// folding each id through the mixer. substream(s, {a, b}) for distinct
// (a, b) pairs yields statistically independent streams.
inline std::uint64_t substream(std::uint64_t seed,
                               std::initializer_list<std::uint64_t> ids) {
  SplitMix64 g(seed);
  std::uint64_t s = g.next();
  for (std::uint64_t id : ids) {
    SplitMix64 h(s ^ (id * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
    s = h.next();
  }
  return s;
}

}  // namespace semirank
