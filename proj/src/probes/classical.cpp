#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "rlab/extension.hpp"
#include "rlab/surface.hpp"

namespace rlab::probe_detail {

namespace {

double conjugate_exponent(double p) { return p == 1.0 ? INFINITY : p / (p - 1.0); }

std::size_t pow2_at_least(double v) {
  std::size_t n = 1;
  while (double(n) < v) n <<= 1;
  return n;
}

}  // namespace

ProbeReport hausdorff_young(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::bound);
  for (double p : c.scales) require(p >= 1.0 && p <= 2.0, "hausdorff_young: p must lie in [1, 2]");
  const bool gaussian = c.variant == "gaussian";
  require(gaussian || c.variant.empty() || c.variant == "random", "hausdorff_young: unknown variant");
  const std::size_t n = std::size_t(c.param("samples", 32));
  const Grid grid = make_grid({{-4.0, 4.0}, {-4.0, 4.0}}, {n, n});
  r.bound = 1.0;
  r.target_note = "||f^||_{p'} <= ||f||_p; the Riemann-sum transform satisfies it exactly";

  double worst = 0;
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const double p = c.scales[si], pp = conjugate_exponent(p);
    auto vals = parallel_trials(c.trials, [&](int t) {
      SampledField f(grid);
      if (gaussian) {
        for (std::size_t i = 0; i < f.values.size(); ++i) {
          const Point x = grid.point(i);
          f.values[i] = std::exp(-kPi * (x[0] * x[0] + x[1] * x[1]));
        }
      } else {
        TrialRng rng(c.seed, trial_key(si, t));
        if (t % 2 == 0) {
          // Few spikes: near-extremal for p close to 1.
          const int k = 1 + int(rng.uniform() * 8);
          for (int j = 0; j < k; ++j) f.values[std::size_t(rng.uniform() * double(f.values.size()))] += rng.cnormal();
        } else {
          for (auto& v : f.values) v = rng.cnormal();
        }
      }
      const double den = lp_norm(f, p);
      if (!(den > 0)) return kSkip;
      return lp_norm(transform(f, Direction::forward), pp) / den;
    });
    const double m = record_trials(r, p, vals);
    add_row(r, p, m);
    if (std::isfinite(m)) worst = std::max(worst, m);
  }
  r.constant = worst;
  return r;
}

ProbeReport khintchine(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::slope);
  const double pp = c.p_prime > 0 ? c.p_prime : 4.0;
  require(pp > 2.0, "khintchine: need p' > 2");
  const double p = pp / (pp - 1.0);
  const double spacing = c.param("spacing", 4.0), radius = 1.0;
  require(spacing >= 2.0 * radius, "khintchine: bump spacing must be at least 2");
  double m_max = 0;
  for (double m : c.scales) {
    require(m >= 1 && m == std::floor(m), "khintchine: bump counts must be positive integers");
    m_max = std::max(m_max, m);
  }
  const double L = double(pow2_at_least(spacing * m_max + 4 * radius));
  const std::size_t N = std::size_t(L) * 8;
  const Grid grid = make_grid({{-L / 2, L / 2}}, {N});
  r.target = 0.5;
  r.target_note = "mean ||f^||_{p'} ~ m^{1/2} for random signs";

  std::vector<std::pair<double, double>> norm_p;
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const int m = int(c.scales[si]);
    const double start = -spacing * double(m - 1) / 2;
    auto build = [&](const std::vector<int>& eps) {
      SampledField f(grid);
      for (std::size_t i = 0; i < N; ++i) {
        const double x = grid.coord(0, i);
        const int j = std::clamp(int(std::lround((x - start) / spacing)), 0, m - 1);
        f.values[i] = double(eps[j]) * bump_profile((x - start - spacing * j) / radius);
      }
      return f;
    };
    auto vals = parallel_trials(c.trials, [&](int t) {
      TrialRng rng(c.seed, trial_key(si, t));
      std::vector<int> eps(m);
      for (auto& e : eps) e = rng.sign();
      return lp_norm(transform(build(eps), Direction::forward), pp);
    });
    add_row(r, m, record_trials(r, m, vals, true));
    norm_p.emplace_back(m, lp_norm(build(std::vector<int>(m, 1)), p));
  }
  fit_rows(r);
  if (norm_p.size() >= 2) {
    const double e = fit_slope(norm_p).exponent;
    r.metrics["norm_p_exponent"] = e;
    add_check(r, "norm_p_exponent_error", std::abs(e - 1.0 / p), 0.02);
  }
  return r;
}

ProbeReport knapp(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::slope);
  require(c.surface.empty() || c.surface == "parabola", "knapp: only the parabola in R^2 is implemented");
  const double pp = c.p_prime > 0 ? c.p_prime : 4.0, qq = c.q_prime > 0 ? c.q_prime : 4.0;
  require(pp >= 1 && qq >= 1, "knapp: need p', q' >= 1");
  for (std::size_t k = 1; k < c.scales.size(); ++k)
    require(c.scales[k] < c.scales[k - 1], "knapp: delta list must be decreasing");
  for (double d : c.scales) require(d > 0 && d <= 0.5, "knapp: need 0 < delta <= 1/2");

  const Hypersurface s = make_paraboloid(2, {{-1.0, 1.0}});
  const double slope = 1.0 - 3.0 / pp - 1.0 / qq;
  r.target = slope;
  r.target_note = "tube computation: slope 1 - 3/p' - 1/q'";
  r.metrics["admissible"] = 3.0 / pp + 1.0 / qq <= 1.0 + 1e-12 ? 1.0 : 0.0;

  for (double delta : c.scales) {
    const double R = 1.0 / (delta * delta);
    const std::size_t nodes = std::size_t(std::ceil(16.0 / delta));
    const Density f = make_density_on(s, {{0.0, delta}}, {nodes}, [](const double*) { return cplx(1.0); });
    // |Ef| varies on the scale 1/delta in x_1 and R in x_2.
    const std::size_t n1 = std::size_t(std::llround(32.0 / delta)), n2 = 64;
    const double d1 = 2 * R / double(n1), d2 = 2 * R / double(n2);
    EvalSet pts;
    for (std::size_t a = 0; a < n1; ++a)
      for (std::size_t b = 0; b < n2; ++b) {
        const double x1 = -R + (double(a) + 0.5) * d1, x2 = -R + (double(b) + 0.5) * d2;
        if (x1 * x1 + x2 * x2 <= R * R) pts.push_back({x1, x2});
      }
    const auto E = extend(f, pts);
    long double acc = 0;
    for (const auto& v : E) acc += std::pow(std::abs(v), pp);
    const double lhs = std::pow(double(acc) * d1 * d2, 1.0 / pp);
    long double fn = 0;
    for (std::size_t i = 0; i < f.size(); ++i) fn += f.weights[i] * std::pow(std::abs(f.values[i]), qq);
    const double ratio = lhs / std::pow(double(fn), 1.0 / qq);
    r.trials.push_back({delta, 0, ratio, "ok"});
    add_row(r, delta, ratio);
    r.constant = std::max(r.constant, ratio);
  }
  fit_rows(r);
  return r;
}

ProbeReport stein_tomas(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::slope);
  const int n = c.dim;
  require(n == 2 || n == 3, "stein_tomas: n must be 2 or 3");
  int jmax = 0;
  for (double j : c.scales) {
    require(j >= 1 && j <= 9 && j == std::floor(j), "stein_tomas: j must be an integer in [1, 9]");
    jmax = std::max(jmax, int(j));
  }
  r.target = -(n - 1) / 2.0;
  r.one_sided = true;
  r.target_note = "||K_j||_inf <~ 2^{-j(n-1)/2}";

  auto phi0 = [](double t) { return plateau_profile(t, 0.5, 1.0); };
  auto phi = [&](int j, double t) {
    return j == 0 ? phi0(t) : phi0(t / std::ldexp(1.0, j)) - phi0(t / std::ldexp(1.0, j - 1));
  };
  {
    double worst = 0;
    const double top = std::ldexp(1.0, jmax + 1);
    for (int i = 0; i <= 4096; ++i) {
      const double t = top * i / 4096.0;
      double sum = 0;
      for (int j = 0; j <= jmax; ++j) sum += phi(j, t);
      worst = std::max(worst, std::abs(sum - phi0(t / std::ldexp(1.0, jmax))));
    }
    r.metrics["telescoping_defect"] = worst;
    add_check(r, "telescoping_defect", worst, 1e-12);
  }

  auto w = [](double rho) { return plateau_profile(rho, 0.5, 1.0); };
  std::vector<std::pair<double, double>> khat;
  for (double jd : c.scales) {
    const int j = int(jd);
    const double S = std::ldexp(1.0, j);
    double sup = 0;
    if (n == 2) {
      const std::size_t per = std::size_t(16 * S);
      const Grid grid = make_grid({{-S, S}, {-S, S}}, {per, per});
      const Hypersurface s = make_paraboloid(2, {{-1.0, 1.0}});
      const Density wd = make_density(s, {std::size_t(32 * S)}, [&](const double* xi) { return cplx(w(std::abs(xi[0]))); });
      // For real w the measure transform is the conjugate of E w.
      SampledField K = extend_on_grid(wd, grid);
      for (std::size_t i = 0; i < K.values.size(); ++i) {
        const Point x = grid.point(i);
        K.values[i] = std::conj(K.values[i]) * phi(j, std::hypot(x[0], x[1]));
        sup = std::max(sup, std::abs(K.values[i]));
      }
      khat.emplace_back(S, lp_norm(transform(K, Direction::forward), INFINITY));
    } else {
      const double dr = 0.25;
      std::vector<double> rr, xn;
      for (double v = 0; v <= S + 1e-12; v += dr) rr.push_back(v);
      for (double v = -S; v <= S + 1e-12; v += dr) xn.push_back(v);
      const auto vals = radial_measure_ft(3, w, rr, xn, std::size_t(16 * S));
      for (std::size_t a = 0; a < rr.size(); ++a)
        for (std::size_t b = 0; b < xn.size(); ++b)
          sup = std::max(sup, std::abs(vals[a * xn.size() + b]) * std::abs(phi(j, std::hypot(rr[a], xn[b]))));
    }
    r.trials.push_back({jd, 0, sup, "ok"});
    add_row(r, jd, sup);
    r.constant = std::max(r.constant, sup);
  }
  fit_rows(r, [](double j) { return std::ldexp(1.0, int(j)); });
  if (khat.size() >= 2) {
    const double e = fit_slope(khat).exponent;
    r.metrics["khat_exponent"] = e;
    add_check(r, "khat_exponent", e, 1.0 + c.slope_tol);
  }
  return r;
}

}  // namespace rlab::probe_detail
