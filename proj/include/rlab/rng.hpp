#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace rlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform in [0,1): the value depends only on (key, counter).
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) {
  return double(splitmix64(splitmix64(key) ^ counter) >> 11) * 0x1.0p-53;
}

// Per-trial stream seeded from (seed, trial); the draws avoid std
// distributions so the sequence is identical across standard libraries.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial) : eng_(splitmix64(splitmix64(seed) + trial)) {}

  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = uniform(), v = uniform();
    if (u < 0x1.0p-60) u = 0x1.0p-60;
    double r = std::sqrt(-2.0 * std::log(u));
    double t = 6.283185307179586476925 * v;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }
  std::complex<double> cnormal() {
    double a = normal();
    return {a, normal()};
  }
  int sign() { return (eng_() >> 63) ? 1 : -1; }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rlab
