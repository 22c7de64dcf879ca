#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace uhop {

// Seedable generator with a fully specified stream.
//
// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
// standard. The distribution layer is written out here because the standard
// library distributions are implementation-defined:
//   uniform():  top 53 bits of one draw, scaled to [0, 1)
//   gaussian(): Box-Muller on two uniform() draws (u1 mapped to (0, 1]);
//               the first call of a pair returns r*cos, the second r*sin.
// The same seed therefore produces the same doubles on every platform that
// implements IEEE-754 log/sqrt/cos/sin to within an ulp.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Independent child stream, e.g. one per restart or per worker.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace uhop
