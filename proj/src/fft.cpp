#include "fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace rlab::detail {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::complex<double> cis_turns(double x) {
  double r = x - std::nearbyint(x);
  double ang = 2.0 * std::numbers::pi * r;
  return {std::cos(ang), std::sin(ang)};
}

double frac_product(double a, double b) {
  const double p = a * b;
  const double e = std::fma(a, b, -p);
  return (p - std::nearbyint(p)) + e;
}

double frac_product(double j, double a, double b) {
  const double c = a * b;
  const double e = std::fma(a, b, -c);
  return frac_product(j, c) + j * e;
}

Radix2::Radix2(std::size_t n, int sign) : n_(n), w_(n / 2) {
  if (!is_pow2(n)) throw std::invalid_argument("fft length must be a power of two");
  for (std::size_t k = 0; k < n / 2; ++k) w_[k] = cis_turns(double(sign) * double(k) / double(n));
}

void Radix2::operator()(std::complex<double>* a) const {
  const std::size_t n = n_;
  if (n < 2) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        auto u = a[i + k];
        auto v = a[i + k + half] * w_[k * step];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

}  // namespace rlab::detail
