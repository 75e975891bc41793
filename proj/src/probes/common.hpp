#pragma once

#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <vector>

#include "rlab/probes.hpp"
#include "rlab/rng.hpp"

namespace rlab::probe_detail {

inline constexpr double kSkip = std::numeric_limits<double>::quiet_NaN();

inline std::uint64_t trial_key(std::size_t scale_index, int trial) {
  return (std::uint64_t(scale_index) << 32) | std::uint64_t(unsigned(trial));
}

// f(t) for t < n, run concurrently; NaN marks a skipped trial. The first
// exception (by trial index) is rethrown after the loop.
template <class F>
std::vector<double> parallel_trials(int n, F&& f) {
  std::vector<double> out(std::size_t(std::max(n, 0)));
  std::vector<std::exception_ptr> err(out.size());
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < n; ++t) {
    try {
      out[t] = f(t);
    } catch (...) {
      err[t] = std::current_exception();
    }
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

// Records the trials of one scale and returns their max (or mean); NaN when
// every trial was skipped.
double record_trials(ProbeReport& r, double scale, const std::vector<double>& values, bool mean = false);

void add_row(ProbeReport& r, double scale, double measured);
void add_check(ProbeReport& r, const std::string& name, double value, double limit);

// Slope of measured vs abscissa(scale) over non-skipped rows; no fit with
// fewer than two points.
void fit_rows(ProbeReport& r, const std::function<double(double)>& abscissa = {});

void require(bool ok, const char* message);

ProbeReport start_report(const ProbeConfig& c, ProbeKind kind);

// Individual probes.
ProbeReport hausdorff_young(const ProbeConfig& c);
ProbeReport khintchine(const ProbeConfig& c);
ProbeReport knapp(const ProbeConfig& c);
ProbeReport stein_tomas(const ProbeConfig& c);
ProbeReport reverse_square(const ProbeConfig& c);
ProbeReport transverse_packet(const ProbeConfig& c);
ProbeReport bilinear(const ProbeConfig& c);
ProbeReport whitney_assembly(const ProbeConfig& c);
ProbeReport superposition(const ProbeConfig& c);
ProbeReport loomis_whitney(const ProbeConfig& c);
ProbeReport lattice_partition(const ProbeConfig& c);
ProbeReport commutation(const ProbeConfig& c);
ProbeReport mr_growth(const ProbeConfig& c);

}  // namespace rlab::probe_detail
