#include <algorithm>
#include <chrono>
#include <cmath>

#include "common.hpp"

namespace rlab {

using namespace probe_detail;

double ProbeConfig::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace {

using Runner = ProbeReport (*)(const ProbeConfig&);

struct Entry {
  ProbeInfo info;
  Runner run;
  ProbeConfig defaults;
};

ProbeConfig make(const char* name, std::vector<double> scales, int trials, double slope_tol, double defect_tol) {
  ProbeConfig c;
  c.id = c.probe = name;
  c.scales = std::move(scales);
  c.trials = trials;
  c.slope_tol = slope_tol;
  c.defect_tol = defect_tol;
  return c;
}

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> v;
  for (int k = lo; k <= hi; ++k) v.push_back(std::ldexp(1.0, k));
  return v;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    auto add = [&](const char* name, ProbeKind kind, const char* summary, Runner run, ProbeConfig c) {
      t.push_back({{name, kind, summary}, run, std::move(c)});
    };
    add("hausdorff_young", ProbeKind::bound, "max ||f^||_{p'} / ||f||_p over random fields; scales are p values",
        hausdorff_young, make("hausdorff_young", {1, 1.25, 1.5, 1.75, 2}, 100, 0.05, 1e-6));
    {
      auto c = make("khintchine", {4, 8, 16, 32, 64}, 200, 0.05, 1e-6);
      c.dim = 1;
      c.p_prime = 4;
      add("khintchine", ProbeKind::slope, "mean ||f^||_{p'} for random-sign bump sums vs the bump count m",
          khintchine, c);
    }
    {
      auto c = make("knapp", {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}, 1, 0.05, 1e-6);
      c.surface = "parabola";
      c.p_prime = 4;
      c.q_prime = 4;
      add("knapp", ProbeKind::slope, "||E 1_cap||_{L^{p'}(B_{1/delta^2})} / ||1_cap||_{q'} vs cap width delta",
          knapp, c);
    }
    add("stein_tomas", ProbeKind::slope, "sup of the dyadic pieces K_j of the measure transform vs 2^j",
        stein_tomas, make("stein_tomas", {2, 3, 4, 5, 6, 7}, 1, 0.1, 1e-12));
    add("reverse_square", ProbeKind::slope, "bilinear L^4 norm over the cap square function vs delta",
        reverse_square, make("reverse_square", {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 20, 0.1, 1e-6));
    {
      auto c = make("transverse_packet", {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 4, 0.15, 1e-6);
      c.params["nu"] = kPi / 4;
      add("transverse_packet", ProbeKind::slope, "||f1 f2||_2^{1/2} for packets in transverse delta x delta^2 boxes",
          transverse_packet, c);
    }
    {
      auto c = make("bilinear", powers_of_two(4, 9), 20, 0.1, 1e-6);
      c.p = 4;
      add("bilinear", ProbeKind::slope, "empirical bilinear constant on B(0,R) for separated arcs vs R", bilinear, c);
    }
    add("whitney_assembly", ProbeKind::bound, "(Ef)^2 vs the sum over diagonal Whitney pairs, against the strip bound",
        whitney_assembly, make("whitney_assembly", {3, 4, 5, 6}, 1, 0.1, 1e-9));
    {
      auto c = make("superposition", {0.25, 0.5, 0.75, 1.0}, 50, 0.1, 1e-12);
      c.variant = "quasi_norm";
      add("superposition", ProbeKind::bound, "s-power subadditivity, or sums of Fourier-separated pieces",
          superposition, c);
    }
    add("loomis_whitney", ProbeKind::bound, "brute-force discrete projection inequality on a k^(n+1) lattice",
        loomis_whitney, make("loomis_whitney", {4}, 1000, 0.1, 1e-12));
    add("lattice_partition", ProbeKind::bound, "lattice partition of unity and its weighted square sums",
        lattice_partition, make("lattice_partition", {0.5, 1, 2}, 20, 0.1, 1e-6));
    add("commutation", ProbeKind::bound, "multiplier commutation identity for the extension operator, N = scale",
        commutation, make("commutation", {1, 2}, 20, 0.1, 1e-6));
    {
      auto c = make("mr_growth", powers_of_two(4, 8), 20, 0.1, 1e-6);
      c.dim = 3;
      c.surface = "affine";
      c.params["delta"] = 0.25;
      add("mr_growth", ProbeKind::slope, "empirical multilinear constant for transverse patches vs R", mr_growth, c);
    }
    return t;
  }();
  return table;
}

const Entry& find(const std::string& name) {
  for (const auto& e : entries())
    if (e.info.name == name) return e;
  throw precondition_error("unknown probe id '" + name + "'");
}

}  // namespace

const std::vector<ProbeInfo>& probe_catalog() {
  static const std::vector<ProbeInfo> cat = [] {
    std::vector<ProbeInfo> v;
    for (const auto& e : entries()) v.push_back(e.info);
    return v;
  }();
  return cat;
}

bool is_probe(const std::string& name) {
  return std::any_of(entries().begin(), entries().end(), [&](const Entry& e) { return e.info.name == name; });
}

ProbeConfig default_config(const std::string& probe) { return find(probe).defaults; }

void validate_config(const ProbeConfig& c) {
  find(c.probe);
  if (c.id.empty()) throw precondition_error("probe id must not be empty");
  if (c.scales.empty()) throw precondition_error(c.id + ": empty scale list");
  for (double s : c.scales)
    if (!std::isfinite(s)) throw precondition_error(c.id + ": non-finite scale");
  if (c.scales.size() > 1) {
    const bool up = c.scales[1] > c.scales[0];
    for (std::size_t k = 1; k < c.scales.size(); ++k)
      if (up ? !(c.scales[k] > c.scales[k - 1]) : !(c.scales[k] < c.scales[k - 1]))
        throw precondition_error(c.id + ": scale list must be strictly monotone");
  }
  if (c.trials < 1) throw precondition_error(c.id + ": trials must be at least 1");
  if (!(c.slope_tol > 0) || !(c.defect_tol > 0)) throw precondition_error(c.id + ": tolerances must be positive");
}

void finalize_verdict(ProbeReport& r) {
  bool ok = r.error.empty();
  if (ok && r.kind == ProbeKind::slope) {
    if (!r.fit || !r.target) {
      ok = false;
    } else {
      const double d = r.fit->exponent - *r.target;
      ok = r.one_sided ? d <= r.slope_tol : std::abs(d) <= r.slope_tol;
    }
  }
  if (ok && r.kind == ProbeKind::bound) ok = r.constant <= r.bound * (1 + r.defect_tol);
  for (const auto& c : r.checks) ok = ok && c.pass;
  r.pass = ok;
}

ProbeReport run_probe(const ProbeConfig& c, bool record_time) {
  const auto t0 = std::chrono::steady_clock::now();
  ProbeReport r;
  try {
    validate_config(c);
    r = find(c.probe).run(c);
  } catch (const std::exception& e) {
    r = ProbeReport{};
    r.id = c.id;
    r.probe = c.probe;
    r.kind = is_probe(c.probe) ? find(c.probe).info.kind : ProbeKind::slope;
    r.seed = c.seed;
    r.slope_tol = c.slope_tol;
    r.defect_tol = c.defect_tol;
    r.error = e.what();
  }
  finalize_verdict(r);
  if (record_time)
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace probe_detail {

ProbeReport start_report(const ProbeConfig& c, ProbeKind kind) {
  ProbeReport r;
  r.id = c.id;
  r.probe = c.probe;
  r.kind = kind;
  r.seed = c.seed;
  r.slope_tol = c.slope_tol;
  r.defect_tol = c.defect_tol;
  return r;
}

double record_trials(ProbeReport& r, double scale, const std::vector<double>& values, bool mean) {
  double best = -INFINITY, sum = 0;
  int used = 0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    const bool skip = std::isnan(values[t]);
    r.trials.push_back({scale, int(t), skip ? 0.0 : values[t], skip ? "skipped" : "ok"});
    if (skip) {
      ++r.rejected;
      continue;
    }
    best = std::max(best, values[t]);
    sum += values[t];
    ++used;
  }
  if (used == 0) return kSkip;
  return mean ? sum / used : best;
}

void add_row(ProbeReport& r, double scale, double measured) {
  const bool skip = !std::isfinite(measured);
  r.rows.push_back({scale, skip ? 0.0 : measured, skip});
}

void add_check(ProbeReport& r, const std::string& name, double value, double limit) {
  r.checks.push_back({name, value, limit, value <= limit});
}

void fit_rows(ProbeReport& r, const std::function<double(double)>& abscissa) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows)
    if (!row.skipped && row.measured > 0) pts.emplace_back(abscissa ? abscissa(row.scale) : row.scale, row.measured);
  if (pts.size() >= 2) r.fit = fit_slope(pts);
}

void require(bool ok, const char* message) {
  if (!ok) throw precondition_error(message);
}

}  // namespace probe_detail

}  // namespace rlab
