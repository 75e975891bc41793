#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlab/spectral.hpp"

namespace rlab {

enum class ProbeKind { slope, bound };

struct ProbeConfig {
  std::string id;       // report id, unique within a manifest
  std::string probe;    // registry name
  std::string surface;  // probe-specific surface label ("" = probe default)
  std::string variant;  // probe-specific test family ("" = probe default)
  int dim = 2;
  // 0 = not set / probe default.
  double p = 0, q = 0, p_prime = 0, q_prime = 0;
  std::vector<double> scales;
  int trials = 1;
  std::uint64_t seed = 0;
  double slope_tol = 0.1;
  double defect_tol = 1e-6;
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const;
};

struct ScaleResult {
  double scale = 0.0;
  double measured = 0.0;
  bool skipped = false;
};

struct TrialRecord {
  double scale = 0.0;
  int trial = 0;
  double value = 0.0;
  std::string status;  // ok, skipped, rejected
};

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;  // value <= limit
};

struct ProbeReport {
  std::string id;
  std::string probe;
  ProbeKind kind = ProbeKind::slope;
  std::uint64_t seed = 0;
  std::vector<ScaleResult> rows;
  std::optional<SlopeFit> fit;
  std::optional<double> target;  // exponent, slope probes only
  bool one_sided = false;        // slope probes: pass iff fitted <= target + slope_tol
  std::string target_note;
  double slope_tol = 0.0;
  double defect_tol = 0.0;
  double constant = 0.0;  // largest measured ratio
  double bound = 1.0;     // boundedness probes: constant <= bound (1 + defect_tol)
  std::vector<Check> checks;
  std::map<std::string, double> metrics;
  std::vector<TrialRecord> trials;
  int rejected = 0;
  bool pass = false;
  std::string error;  // non-empty when the probe could not run
  double runtime_ms = 0.0;
};

struct ProbeInfo {
  std::string name;
  ProbeKind kind;
  std::string summary;
};

const std::vector<ProbeInfo>& probe_catalog();
bool is_probe(const std::string& name);

// Defaults for one probe, id = probe name.
ProbeConfig default_config(const std::string& probe);

// Throws precondition_error on structural problems (unknown probe, scales not
// strictly monotone, trials < 1, non-positive tolerances).
void validate_config(const ProbeConfig& c);

// Never throws: failures become a failed report with `error` set. runtime_ms
// stays 0 unless record_time is set, so reports are reproducible.
ProbeReport run_probe(const ProbeConfig& c, bool record_time = false);

// Recomputes `pass` from fit, constant, checks and the stored tolerances.
void finalize_verdict(ProbeReport& r);

// ||sum f||_s^s / sum ||f||_s^s for 0 < s <= 1 (all fields on one grid).
double superposition_ratio(const std::vector<SampledField>& family, double s);

// Tensor window chi_0 = chi_1^{x n}, chi_1 = |a-check|^2 normalized, a an order-m
// B-spline on [-1/2, 1/2]; chi_q(x) = chi_0(T x / r - q).
struct LatticeWindow {
  int dim = 2;
  int order = 4;
  double r = 1.0;
  double theta = 0.0;  // rotation in the (x_1, x_2) plane

  double chi1(double t) const;
  Point lattice_coords(const Point& x) const;  // T x / r
};

LatticeWindow make_lattice_window(int dim, int order, double r, double theta);
// sum over |q_k - y_k| <= truncation of chi_q(x)
double lattice_partition_sum(const LatticeWindow& w, const Point& x, int truncation);
// sum_q <y - q>^{2N} chi_0(y - q)^2 at y = T x / r
double lattice_weight(const LatticeWindow& w, const Point& x, int N, int truncation);
// sum_q || <(x - c(q))/r>^N chi_q g ||_2^2 by direct summation on g's grid
double weighted_window_sum(const LatticeWindow& w, const SampledField& g, int N, int truncation);

}  // namespace rlab
