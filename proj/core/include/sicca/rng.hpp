#pragma once

#include <cstdint>

namespace sicca {

namespace detail {

// Ziggurat layer tables for the standard normal (256 layers), built once at
// load time. x[k] is the right edge of layer k, y[k] the density there.
struct ZigTables {
  double x[256];
  double y[256];
  double base_width;
};

extern const ZigTables kZig;

}  // namespace detail

/**
 * Deterministic 64-bit random generator (SplitMix64).
 *
 * The state advances by a fixed odd constant and each output is a bijective
 * hash of the counter, so fixed seeds give identical byte streams on every
 * platform. Stream discipline: one Rng per dataset or sample stream, seeded
 * directly with the user seed; independent internal streams are derived with
 * Rng::derive(seed, tag).
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via a 256-layer ziggurat. The interior-of-layer case
  // (around 98% of draws) stays inline: one u64, two table reads, a multiply
  // and a compare. Everything else (base layer, wedges, tail) is out of line.
  double next_normal() {
    const std::uint64_t bits = next_u64();
    const std::size_t layer = bits & 0xff;
    if (layer != 0) {
      const double m = static_cast<double>(bits >> 11) * 0x1.0p-53;
      const double cand = m * detail::kZig.x[layer - 1];
      if (cand < detail::kZig.x[layer]) {
        return (bits & 0x100) ? -cand : cand;
      }
    }
    return normal_slow(bits);
  }

  // Uniform integer in {1, ..., n}, n >= 1, via rejection-free scaling.
  std::uint64_t next_index_one_based(std::uint64_t n);

  // Derives a decorrelated child seed for a named purpose.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag);

 private:
  double normal_slow(std::uint64_t bits);
  double normal_tail();

  std::uint64_t state_;
};

}  // namespace sicca
