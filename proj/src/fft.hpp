#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace rlab::detail {

// exp(2 pi i x) with the argument reduced mod 1 first.
std::complex<double> cis_turns(double x);

// a * b and j * a * b mod 1, with the rounding error of the products kept, so
// large phases keep their fractional part.
double frac_product(double a, double b);
double frac_product(double j, double a, double b);

bool is_pow2(std::size_t n);

// In-place radix-2 DFT, out_k = sum_j a_j exp(sign * 2 pi i jk/N).
class Radix2 {
 public:
  Radix2(std::size_t n, int sign);
  void operator()(std::complex<double>* a) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> w_;
};

}  // namespace rlab::detail
