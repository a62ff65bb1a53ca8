#include "sicca/rng.hpp"

#include <cassert>
#include <cmath>

namespace sicca {

namespace detail {

namespace {

// Classic table constants for 256 layers: the area of every layer (and of the
// base strip including the tail) is zig_v, and the recursion below closes at
// the peak (x[255] ~ 0, y[255] ~ 1) only for this pair, which is asserted.
constexpr double zig_r = 3.6541528853610088;
constexpr double zig_v = 0.00492867323399;

ZigTables make_tables() {
  ZigTables t;
  t.x[0] = zig_r;
  t.y[0] = std::exp(-0.5 * zig_r * zig_r);
  for (int k = 1; k < 256; ++k) {
    t.y[k] = t.y[k - 1] + zig_v / t.x[k - 1];
    const double arg = -2.0 * std::log(t.y[k]);
    t.x[k] = arg > 0.0 ? std::sqrt(arg) : 0.0;
  }
  assert(std::abs(t.y[255] - 1.0) < 1e-7);
  assert(t.x[255] < 1e-3);
  t.x[255] = 0.0;
  t.y[255] = 1.0;
  t.base_width = zig_v / t.y[0];
  return t;
}

}  // namespace

const ZigTables kZig = make_tables();

}  // namespace detail

double Rng::normal_tail() {
  // Marsaglia tail method for |x| > zig_r.
  for (;;) {
    double u1 = next_uniform();
    while (u1 <= 0.0) u1 = next_uniform();
    double u2 = next_uniform();
    while (u2 <= 0.0) u2 = next_uniform();
    const double xt = -std::log(u1) / detail::zig_r;
    const double yt = -std::log(u2);
    if (yt + yt >= xt * xt) return detail::zig_r + xt;
  }
}

double Rng::normal_slow(std::uint64_t bits) {
  for (;;) {
    const std::size_t layer = bits & 0xff;
    const double sign = (bits & 0x100) ? -1.0 : 1.0;
    const double m = static_cast<double>(bits >> 11) * 0x1.0p-53;
    if (layer == 0) {
      const double cand = m * detail::kZig.base_width;
      if (cand < detail::zig_r) return sign * cand;
      return sign * normal_tail();
    }
    const double cand = m * detail::kZig.x[layer - 1];
    if (cand < detail::kZig.x[layer]) return sign * cand;
    const double yl = detail::kZig.y[layer - 1];
    const double yh = detail::kZig.y[layer];
    if (yl + next_uniform() * (yh - yl) < std::exp(-0.5 * cand * cand)) {
      return sign * cand;
    }
    bits = next_u64();
  }
}

std::uint64_t Rng::next_index_one_based(std::uint64_t n) {
  // Scaling by the 53-bit uniform is exact enough for the index ranges used
  // here (n far below 2^53) and keeps the draw count per call fixed.
  const double u = next_uniform();
  std::uint64_t k = static_cast<std::uint64_t>(u * static_cast<double>(n));
  if (k >= n) k = n - 1;
  return k + 1;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t tag) {
  Rng mixer(seed ^ (0xd1b54a32d192ed03ULL * (tag + 1)));
  return mixer.next_u64();
}

}  // namespace sicca
