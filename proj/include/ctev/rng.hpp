#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ctev {

// SplitMix64 step (Steele/Lea/Flood). Used both as a seed mixer and as the
// basis of the stream-derivation scheme below.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed of sub-stream `id` of a master seed. The scheme is fixed and
// documented so that consumers can rely on it: stream ids are stable, and
// drawing more streams never perturbs an existing one.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t id) {
  std::uint64_t s = seed + 0x9E3779B97F4A7C15ull * (id + 1);
  return splitmix64(s);
}

// Deterministic double-precision generator. The uniform/normal/exponential
// mappings are spelled out here instead of using <random> distributions,
// whose algorithms differ between standard libraries; a seed therefore pins
// the output stream bit for bit.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Strictly inside (0,1): ((r >> 11) + 0.5) * 2^-53.
  double uniform01() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential() { return -std::log(uniform01()); }

  std::uint64_t raw() { return eng_(); }

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ctev
