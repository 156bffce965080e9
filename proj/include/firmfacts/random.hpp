#ifndef FIRMFACTS_RANDOM_HPP
#define FIRMFACTS_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace firmfacts {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; decorrelates nearby seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of substream `index` under master `seed`. Replicates and firms draw
/// from their own substream so results do not depend on scheduling.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0) {
  return Rng(stream_seed(seed, index));
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return ((rng() >> 11) + 0.5) * scale;
}

/// Standard normal by inverse-free Marsaglia polar method; portable across
/// standard library implementations, unlike std::normal_distribution.
class NormalSource {
 public:
  double operator()(Rng& rng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_open(rng) - 1.0;
      v = 2.0 * uniform_open(rng) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace firmfacts

#endif  // FIRMFACTS_RANDOM_HPP
