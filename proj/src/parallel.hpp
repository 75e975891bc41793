#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

namespace rlab::detail {

// Sum of f(0..n-1) over fixed-size blocks, combined in block order, so the
// rounding does not depend on the number of threads.
template <class F>
std::complex<double> blocked_sum(std::size_t n, F&& f, std::size_t block = 2048) {
  const std::size_t nb = (n + block - 1) / block;
  std::vector<std::complex<double>> part(nb);
  const long long total = (long long)nb;
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < total; ++b) {
    std::complex<double> acc = 0;
    const std::size_t end = std::min(n, std::size_t(b + 1) * block);
    for (std::size_t j = std::size_t(b) * block; j < end; ++j) acc += f(j);
    part[b] = acc;
  }
  std::complex<double> s = 0;
  for (const auto& p : part) s += p;
  return s;
}

}  // namespace rlab::detail
