#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "rlab/surface.hpp"

namespace rlab {

using namespace probe_detail;

double superposition_ratio(const std::vector<SampledField>& family, double s) {
  require(s > 0 && s <= 1, "superposition: need 0 < s <= 1");
  require(!family.empty(), "superposition: empty family");
  const auto& g = family.front().grid;
  std::vector<cplx> sum(family.front().values.size(), 0);
  double rhs = 0;
  for (const auto& f : family) {
    require(f.grid.box == g.box && f.grid.samples == g.samples, "superposition: fields on different grids");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += f.values[i];
    rhs += std::pow(lp_norm(f, s), s);
  }
  require(rhs > 0, "superposition: zero family");
  return std::pow(lp_norm(sum, g.cell_volume(), s), s) / rhs;
}

namespace {

// Cardinal B-spline of order k (sum of k uniforms on [-1/2, 1/2]) at 0.
double bspline_at_zero(int k) {
  double s = 0, binom = 1, fact = 1;
  for (int i = 1; i < k; ++i) fact *= i;
  for (int j = 0; j <= k; ++j) {
    const double t = k / 2.0 - j;
    if (t > 0) s += (j % 2 ? -1 : 1) * binom * std::pow(t, k - 1);
    binom = binom * (k - j) / (j + 1);
  }
  return s / fact;
}

double sinc(double x) { return x == 0 ? 1.0 : std::sin(x) / x; }

// sum_q (1 + |y - q|^2)^N chi_0(y - q)^2 over the box |q_k - y_k| <= trunc.
double weight_at(const LatticeWindow& w, const Point& y, int N, int trunc) {
  const int n = w.dim;
  std::vector<std::vector<std::pair<double, double>>> axis(n);
  for (int k = 0; k < n; ++k) {
    const auto base = (long long)std::floor(y[k]);
    for (long long q = base - trunc; q <= base + trunc; ++q) {
      const double t = y[k] - double(q), v = w.chi1(t);
      axis[k].emplace_back(t * t, v * v);
    }
  }
  const std::size_t m = axis[0].size();
  std::vector<std::size_t> idx(n, 0);
  long double acc = 0;
  while (true) {
    double r2 = 0, prod = 1;
    for (int k = 0; k < n; ++k) {
      r2 += axis[k][idx[k]].first;
      prod *= axis[k][idx[k]].second;
    }
    acc += std::pow(1 + r2, N) * prod;
    int k = n - 1;
    while (k >= 0 && ++idx[k] == m) idx[k--] = 0;
    if (k < 0) break;
  }
  return double(acc);
}

}  // namespace

double LatticeWindow::chi1(double t) const {
  const double wd = 1.0 / order;
  return wd * std::pow(sinc(kPi * wd * t), 2 * order) / bspline_at_zero(2 * order);
}

Point LatticeWindow::lattice_coords(const Point& x) const {
  Point y(x);
  if (dim >= 2) {
    const double c = std::cos(theta), s = std::sin(theta);
    y[0] = c * x[0] - s * x[1];
    y[1] = s * x[0] + c * x[1];
  }
  for (auto& v : y) v /= r;
  return y;
}

LatticeWindow make_lattice_window(int dim, int order, double r, double theta) {
  require(dim >= 1 && dim <= 3, "lattice window: dimension 1, 2 or 3");
  require(order >= 2 && order <= 12, "lattice window: B-spline order in [2, 12]");
  require(r > 0 && std::isfinite(theta), "lattice window: need r > 0");
  return {dim, order, r, theta};
}

double lattice_partition_sum(const LatticeWindow& w, const Point& x, int truncation) {
  require(int(x.size()) == w.dim, "lattice window: dimension mismatch");
  const Point y = w.lattice_coords(x);
  double prod = 1;
  for (int k = 0; k < w.dim; ++k) {
    const auto base = (long long)std::floor(y[k]);
    long double s = 0;
    for (long long q = base - truncation; q <= base + truncation; ++q) s += w.chi1(y[k] - double(q));
    prod *= double(s);
  }
  return prod;
}

double lattice_weight(const LatticeWindow& w, const Point& x, int N, int truncation) {
  require(int(x.size()) == w.dim, "lattice window: dimension mismatch");
  return weight_at(w, w.lattice_coords(x), N, truncation);
}

double weighted_window_sum(const LatticeWindow& w, const SampledField& g, int N, int truncation) {
  require(g.grid.dim() == w.dim, "lattice window: dimension mismatch");
  long double acc = 0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double a = std::norm(g.values[i]);
    if (a != 0) acc += a * lattice_weight(w, g.grid.point(i), N, truncation);
  }
  return double(acc) * g.grid.cell_volume();
}

namespace probe_detail {

ProbeReport superposition(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::bound);
  const std::string variant = c.variant.empty() ? "quasi_norm" : c.variant;
  const int members = int(c.param("members", 6));
  require(members >= 1 && members <= 64, "superposition: members in [1, 64]");
  r.bound = 1.0;

  if (variant == "quasi_norm") {
    for (double s : c.scales) require(s > 0 && s <= 1, "superposition: need 0 < s <= 1");
    r.target_note = "||sum f||_s^s <= sum ||f||_s^s";
    const Grid grid = make_grid({{-8.0, 8.0}}, {256});
    for (std::size_t si = 0; si < c.scales.size(); ++si) {
      const double s = c.scales[si];
      auto vals = parallel_trials(c.trials, [&](int t) {
        TrialRng rng(c.seed, trial_key(si, t));
        std::vector<SampledField> fam;
        for (int k = 0; k < members; ++k) {
          SampledField f(grid);
          for (auto& v : f.values) {
            const cplx g = rng.cnormal();
            v = rng.uniform() < 0.3 ? g : cplx(0);
          }
          fam.push_back(std::move(f));
        }
        return superposition_ratio(fam, s);
      });
      const double m = record_trials(r, s, vals);
      add_row(r, s, m);
      r.metrics["slack_s" + std::to_string(si)] = 1 - m;
      r.constant = std::max(r.constant, m);
    }
    return r;
  }

  require(variant == "fourier_disjoint", "superposition: unknown variant");
  for (double s : c.scales) require(s >= 1, "superposition: need s >= 1 for Fourier-separated families");
  const double hw = c.param("half_width", 0.2), gap = c.param("spacing", 1.0);
  const Grid grid = make_grid({{-32.0, 32.0}}, {1024});
  const Grid freq = reciprocal_grid(grid);
  std::vector<double> centres;
  for (int k = 0; k < members; ++k) centres.push_back(gap * (k - (members - 1) / 2.0));
  for (int a = 0; a < members; ++a)
    for (int b = a + 1; b < members; ++b)
      require(std::abs(centres[a] - centres[b]) >= 4 * hw, "superposition: dilated Fourier supports overlap");
  const double fmax = freq.coord(0, freq.samples[0] - 1), fmin = freq.coord(0, 0);
  require(centres.front() - 2 * hw >= fmin && centres.back() + 2 * hw <= fmax, "superposition: boxes leave the grid");

  // phi_k: 1 on R_k, 0 outside 2 R_k; A = max ||phi_k||_1.
  double A = 0;
  for (double ck : centres) {
    SampledField w(freq);
    for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] = plateau_profile(std::abs(freq.coord(0, i) - ck), hw, 2 * hw);
    w.conjugate = grid;
    A = std::max(A, lp_norm(transform(w, Direction::inverse), 1));
  }
  r.metrics["window_l1"] = A;
  r.target_note = "C <= A^|1 - 2/s|, A = max ||phi_R||_1; l^s sum for s <= 2, l^{s'} for s >= 2";

  auto family = [&](std::uint64_t key) {
    TrialRng rng(c.seed, key);
    std::vector<SampledField> fam;
    for (double ck : centres) {
      SampledField F(freq);
      for (std::size_t i = 0; i < F.values.size(); ++i)
        if (std::abs(freq.coord(0, i) - ck) <= hw) F.values[i] = rng.cnormal();
      F.conjugate = grid;
      fam.push_back(transform(F, Direction::inverse));
    }
    return fam;
  };
  auto constant_for = [&](const std::vector<SampledField>& fam, double s) {
    std::vector<cplx> sum(grid.cell_count(), 0);
    for (const auto& f : fam)
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += f.values[i];
    const double star = s <= 2 ? s : (std::isinf(s) ? 1.0 : s / (s - 1));
    double acc = 0;
    for (const auto& f : fam) acc += std::pow(lp_norm(f, s), star);
    return lp_norm(sum, grid.cell_volume(), s) / std::pow(acc, 1 / star);
  };

  for (std::size_t si = 0; si <= c.scales.size(); ++si) {
    const bool inf = si == c.scales.size();
    const double s = inf ? INFINITY : c.scales[si];
    auto vals = parallel_trials(c.trials, [&](int t) { return constant_for(family(trial_key(si, t)), s); });
    const double bound = std::pow(A, inf ? 1.0 : std::abs(1 - 2 / s));
    if (inf) {
      double m = 0;
      for (double v : vals) m = std::max(m, v);
      r.metrics["constant_inf"] = m;
      r.constant = std::max(r.constant, m / bound);
      continue;
    }
    const double m = record_trials(r, s, vals);
    add_row(r, s, m);
    r.metrics["bound_s" + std::to_string(si)] = bound;
    r.constant = std::max(r.constant, m / bound);
    if (s == 2) {
      double dev = 0;
      for (double v : vals) dev = std::max(dev, std::abs(v - 1));
      add_check(r, "plancherel_equality", dev, 1e-10);
    }
  }
  return r;
}

ProbeReport loomis_whitney(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::bound);
  const int n = c.dim;
  require(n >= 1 && n <= 3, "loomis_whitney: n must be 1, 2 or 3");
  const std::string variant = c.variant.empty() ? "random" : c.variant;
  require(variant == "random" || variant == "indicator", "loomis_whitney: unknown variant");
  r.bound = 1.0;
  r.target_note = "coordinate projections, sharp constant 1";
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const double kd = c.scales[si];
    require(kd >= 1 && kd == std::floor(kd), "loomis_whitney: extent must be a positive integer");
    const int k = int(kd);
    require(std::pow(double(k), n + 1) <= 1e7, "loomis_whitney: lattice too large for brute force");
    std::size_t face = 1, total = 1;
    for (int i = 0; i < n; ++i) face *= std::size_t(k);
    total = face * std::size_t(k);
    auto vals = parallel_trials(c.trials, [&](int t) {
      TrialRng rng(c.seed, trial_key(si, t));
      std::vector<std::vector<double>> g(n + 1, std::vector<double>(face, 1.0));
      if (variant == "random")
        for (auto& gj : g)
          for (auto& v : gj) {
            const double u = rng.uniform();
            v = rng.uniform() < 0.3 ? 0.0 : u * u;
          }
      long double lhs = 0;
      std::vector<int> z(n + 1, 0);
      for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t q = flat;
        for (int a = n; a >= 0; --a) {
          z[a] = int(q % std::size_t(k));
          q /= std::size_t(k);
        }
        double prod = 1;
        for (int j = 0; j <= n && prod != 0; ++j) {
          std::size_t idx = 0;
          for (int a = 0; a <= n; ++a)
            if (a != j) idx = idx * std::size_t(k) + std::size_t(z[a]);
          prod *= g[j][idx];
        }
        lhs += std::pow(prod, 2.0 / n);
      }
      double rhs = 1;
      for (const auto& gj : g) {
        long double s = 0;
        for (double v : gj) s += v * v;
        rhs *= std::sqrt(double(s));
      }
      if (!(rhs > 0)) return kSkip;
      return std::pow(double(lhs), n / 2.0) / rhs;
    });
    const double m = record_trials(r, kd, vals);
    add_row(r, kd, m);
    if (std::isfinite(m)) r.constant = std::max(r.constant, m);
  }
  return r;
}

ProbeReport lattice_partition(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::bound);
  const int n = c.dim, order = int(c.param("order", 4)), points = int(c.param("points", 10000));
  const double theta = c.param("theta", 0.3);
  require(points >= 1, "lattice_partition: need sample points");
  for (double rr : c.scales) require(rr > 0, "lattice_partition: r must be positive");
  make_lattice_window(n, order, 1.0, theta);
  const std::string variant = c.variant.empty() ? "random" : c.variant;
  require(variant == "random" || variant == "zero", "lattice_partition: unknown variant");
  r.bound = 1.0;
  r.target_note = "weighted square sums / C_N, C_N = sup_y sum_q <y-q>^{2N} chi_0(y-q)^2";

  // C_N from a fine sample of the unit cell (the weight is 1-periodic in y).
  const int per = n == 1 ? 1024 : n == 2 ? 64 : 16, trunc = 16;
  const LatticeWindow unit = make_lattice_window(n, order, 1.0, 0.0);
  double CN[3] = {0, 0, 0};
  {
    std::size_t cells = 1;
    for (int k = 0; k < n; ++k) cells *= std::size_t(per);
    for (int N = 1; N <= 2; ++N) {
      std::vector<double> v(cells);
      const long long total = (long long)cells;
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < total; ++i) {
        Point y(n);
        long long q = i;
        for (int k = n - 1; k >= 0; --k) {
          y[k] = double(q % per) / per;
          q /= per;
        }
        v[i] = weight_at(unit, y, N, trunc);
      }
      CN[N] = *std::max_element(v.begin(), v.end());
      r.metrics["C_" + std::to_string(N)] = CN[N];
    }
  }

  double worst_dev = 0;
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const double rr = c.scales[si];
    const LatticeWindow w = make_lattice_window(n, order, rr, theta);
    double dev = 0;
    for (int i = 0; i < points; ++i) {
      Point x(n);
      for (int k = 0; k < n; ++k)
        x[k] = 5 * rr * (2 * counter_uniform(c.seed ^ 0x51a7ULL, std::uint64_t(i) * n + k) - 1);
      dev = std::max(dev, std::abs(lattice_partition_sum(w, x, 100) - 1));
    }
    r.metrics["deviation_r" + std::to_string(si)] = dev;
    worst_dev = std::max(worst_dev, dev);

    Box box(n, {-4 * rr, 4 * rr});
    const Grid grid = make_grid(box, std::vector<std::size_t>(n, n == 1 ? 256 : n == 2 ? 32 : 8));
    auto vals = parallel_trials(c.trials, [&](int t) {
      TrialRng rng(c.seed, trial_key(si, t));
      SampledField g(grid);
      if (variant == "random")
        for (auto& v : g.values) v = rng.cnormal();
      const double g2 = std::pow(lp_norm(g, 2), 2);
      double worst = 0;
      for (int N = 1; N <= 2; ++N) {
        const double s = weighted_window_sum(w, g, N, trunc);
        if (g2 == 0) {
          worst = std::max(worst, s);
          continue;
        }
        worst = std::max(worst, s / (CN[N] * g2));
      }
      return worst;
    });
    const double m = record_trials(r, rr, vals);
    add_row(r, rr, m);
    r.constant = std::max(r.constant, m);
  }
  add_check(r, "partition_deviation", worst_dev, c.defect_tol);
  return r;
}

ProbeReport commutation(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::bound);
  const std::string surface = c.surface.empty() ? "parabola" : c.surface;
  Hypersurface s;
  if (surface == "parabola")
    s = make_paraboloid(2, {{-0.5, 0.5}});
  else if (surface == "hemisphere")
    s = make_hemisphere(2, {{-0.5, 0.5}});
  else
    throw precondition_error("commutation: surface must be parabola or hemisphere");
  const std::string variant = c.variant.empty() ? "random" : c.variant;
  require(variant == "random" || variant == "xj_zero", "commutation: unknown variant");
  for (double N : c.scales) require(N == 1 || N == 2, "commutation: N must be 1 or 2");
  const double sign = c.param("sign", 1.0);
  require(sign == 1.0 || sign == -1.0, "commutation: sign must be +1 or -1");

  const std::size_t M = std::size_t(c.param("samples", 512));
  const Grid xi = make_grid({{-0.5, 0.5}}, {M});
  const Grid xg = reciprocal_grid(xi);
  const double h = xi.spacing[0], band = 0.25 / h;
  std::vector<double> psi(M), dpsi(M);
  double gmax = 0;
  for (std::size_t j = 0; j < M; ++j) {
    const auto e = surface_eval(s, {xi.coord(0, j)});
    psi[j] = e.value;
    dpsi[j] = e.gradient[0];
    gmax = std::max(gmax, std::abs(dpsi[j]));
  }
  std::vector<double> rows;
  if (variant == "xj_zero")
    rows = {0.0};
  else
    for (int k = -8; k <= 8; ++k) rows.push_back(8.0 * k);
  for (double x2 : rows) require(std::abs(x2) * gmax < band, "commutation: band guard leaves no evaluation points");

  auto to_x = [&](std::vector<cplx> v) {
    SampledField F(xi, std::move(v));
    F.conjugate = xg;
    return transform(F, Direction::inverse).values;
  };
  auto to_xi = [&](std::vector<cplx> v) {
    SampledField F(xg, std::move(v));
    F.conjugate = xi;
    return transform(F, Direction::forward).values;
  };
  auto extend_row = [&](const std::vector<cplx>& f, double x2) {
    std::vector<cplx> v(M);
    for (std::size_t j = 0; j < M; ++j) v[j] = f[j] * std::polar(1.0, kTwoPi * x2 * psi[j]);
    return to_x(std::move(v));
  };

  r.bound = 1.0;
  r.target_note = "relative defect / (defect_tol 10^{N-1})";
  auto defect = [&](std::size_t si, int t, int N, double sgn) {
    TrialRng rng(c.seed, trial_key(si, t));
    const double x0 = rng.uniform(-4, 4);
    std::vector<cplx> coef(7);
    for (auto& v : coef) v = rng.cnormal();
    std::vector<cplx> f(M);
    for (std::size_t j = 0; j < M; ++j) {
      const double x = xi.coord(0, j);
      cplx acc = 0;
      for (int k = -3; k <= 3; ++k) acc += coef[k + 3] * std::polar(1.0, kTwoPi * k * x);
      f[j] = bump_profile(x / 0.45) * acc;
    }
    // Right side: E of F((y - x0)^N F^{-1} f).
    auto g = to_x(f);
    for (std::size_t k = 0; k < M; ++k) g[k] *= std::pow(xg.coord(0, k) - x0, N);
    const auto ft = to_xi(std::move(g));
    long double num = 0, den = 0;
    for (double x2 : rows) {
      auto u = extend_row(f, x2);
      for (int it = 0; it < N; ++it) {
        // (x1 - x0) u + sign x2 phi'(D/i) u, the multiplier applied on the xi side.
        auto uh = to_xi(u);
        for (std::size_t j = 0; j < M; ++j) uh[j] *= dpsi[j];
        const auto mu = to_x(std::move(uh));
        for (std::size_t k = 0; k < M; ++k) u[k] = (xg.coord(0, k) - x0) * u[k] + sgn * x2 * mu[k];
      }
      const auto rhs = extend_row(ft, x2);
      for (std::size_t k = 0; k < M; ++k) {
        if (std::abs(xg.coord(0, k)) + std::abs(x2) * gmax > band) continue;
        num += std::norm(u[k] - rhs[k]);
        den += std::norm(rhs[k]);
      }
    }
    return den > 0 ? std::sqrt(double(num / den)) : kSkip;
  };
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const int N = int(c.scales[si]);
    auto vals = parallel_trials(c.trials, [&](int t) { return defect(si, t, N, sign); });
    const double m = record_trials(r, N, vals);
    add_row(r, N, m);
    if (std::isfinite(m)) r.constant = std::max(r.constant, m / (c.defect_tol * std::pow(10.0, N - 1)));
  }
  // The opposite sign in front of the multiplier term, for comparison.
  if (variant == "random") r.metrics["opposite_sign_defect"] = defect(0, 0, int(c.scales[0]), -sign);
  return r;
}

namespace {

std::size_t pow2_at_least(double v) {
  std::size_t n = 1;
  while (double(n) < v) n <<= 1;
  return n;
}

struct Patch {
  int normal = 0;
  std::vector<double> tilt;  // affine slope
  bool curved = false;

  double phi(const double* xi, int m) const {
    double v = 0;
    for (int k = 0; k < m; ++k) v += curved ? xi[k] * xi[k] : tilt[k] * xi[k];
    return v;
  }
  std::vector<double> grad(const double* xi, int m) const {
    std::vector<double> g(m);
    for (int k = 0; k < m; ++k) g[k] = curved ? 2 * xi[k] : tilt[k];
    return g;
  }
};

// Unit normal of patch j in ambient coordinates at local parameter xi.
Point patch_normal(const Patch& p, const double* xi, int d) {
  const auto g = p.grad(xi, d - 1);
  Point nvec(d, 0.0);
  nvec[p.normal] = 1;
  int k = 0;
  for (int a = 0; a < d; ++a)
    if (a != p.normal) nvec[a] = -g[k++];
  double len = 0;
  for (double v : nvec) len += v * v;
  for (double& v : nvec) v /= std::sqrt(len);
  return nvec;
}

double min_transversality(const std::vector<Patch>& patches, int d, double radius) {
  const int m = d - 1;
  std::vector<std::vector<double>> samples{std::vector<double>(m, 0.0)};
  for (int k = 0; k < m; ++k)
    for (double sgn : {-1.0, 1.0}) {
      std::vector<double> v(m, 0.0);
      v[k] = sgn * radius;
      samples.push_back(v);
    }
  const std::size_t S = samples.size();
  std::size_t combos = 1;
  for (int j = 0; j < d; ++j) combos *= S;
  double best = INFINITY;
  for (std::size_t t = 0; t < combos; ++t) {
    std::vector<double> mat(d * d);
    std::size_t q = t;
    for (int j = 0; j < d; ++j) {
      const Point nv = patch_normal(patches[j], samples[q % S].data(), d);
      q /= S;
      for (int a = 0; a < d; ++a) mat[a * d + j] = nv[a];
    }
    best = std::min(best, std::abs(determinant(mat, d)));
  }
  return best;
}

}  // namespace

ProbeReport mr_growth(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::slope);
  const int d = c.dim;
  require(d == 2 || d == 3, "mr_growth: ambient dimension must be 2 or 3");
  const std::string surface = c.surface.empty() ? "affine" : c.surface;
  require(surface == "affine" || surface == "parabolic", "mr_growth: surface must be affine or parabolic");
  const double delta = c.param("delta", 0.25), nu_min = c.param("nu_min", 0.5), tilt = c.param("tilt", 0.2);
  require(delta > 0 && delta <= 0.5, "mr_growth: need 0 < delta <= 1/2");
  for (double R : c.scales) require(R * delta * delta >= 1 - 1e-12, "mr_growth: need R >= delta^-2");
  const int m = d - 1, n = d - 1;  // n: the multilinear exponent is 2/n

  std::vector<Patch> patches(d);
  const double pattern[3][2] = {{1.0, -0.5}, {-0.5, 1.0}, {0.5, 0.5}};
  for (int j = 0; j < d; ++j) {
    patches[j].normal = j;
    patches[j].curved = surface == "parabolic";
    for (int k = 0; k < m; ++k) patches[j].tilt.push_back(tilt * (d == 2 ? (j ? -1.0 : 1.0) : pattern[j][k]));
  }
  const double nu = min_transversality(patches, d, delta);
  r.metrics["transversality"] = nu;
  r.metrics["ambient_dim"] = d;
  r.metrics["linearity"] = d;
  require(nu >= nu_min, "mr_growth: patches are not transverse enough");
  r.target = 0.0;
  r.one_sided = true;
  r.target_note = "lower bound MR^(R) from finitely many trials; R^eps growth allowed";

  int violations = 0;
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const double R = c.scales[si], rho_max = 1 / std::sqrt(R);
    // Draw support radii first; a draw with margin below delta - R^{-1/2} is rejected.
    std::vector<int> accepted;
    const int attempts = c.trials * int(c.param("attempt_factor", 10));
    for (int a = 0; a < attempts && int(accepted.size()) < c.trials; ++a) {
      TrialRng rng(c.seed, trial_key(si, a));
      bool ok = true;
      for (int j = 0; j < d; ++j) ok = ok && rng.uniform(0.5, 1.25) * rho_max <= rho_max;
      if (ok) {
        accepted.push_back(a);
      } else {
        r.trials.push_back({R, a, 0.0, "rejected"});
        ++r.rejected;
      }
    }
    const std::size_t G = pow2_at_least(6 * std::sqrt(R));
    const Grid xg = make_grid(Box(m, {-R / 2, R / 2}), std::vector<std::size_t>(m, G));
    const Grid fg = reciprocal_grid(xg);
    std::size_t slice = 1;
    for (int k = 0; k < m; ++k) slice *= G;
    const std::size_t total = slice * G;
    const double cell = std::pow(R / double(G), d);

    std::vector<int> bad(accepted.size(), 0);
    auto vals = parallel_trials(int(accepted.size()), [&](int t) {
      TrialRng rng(c.seed, trial_key(si, accepted[t]));
      std::vector<double> radius(d);
      for (auto& v : radius) v = rng.uniform(0.5, 1.25) * rho_max;
      std::vector<double> prod(total, 1.0);
      double norms = 1;
      for (int j = 0; j < d; ++j) {
        std::vector<cplx> coef(slice, 0);
        long double e = 0;
        double reach = 0;
        for (std::size_t i = 0; i < slice; ++i) {
          const Point xi = fg.point(i);
          double r2 = 0;
          for (double v : xi) r2 += v * v;
          if (std::sqrt(r2) > radius[j]) continue;
          coef[i] = rng.cnormal();
          e += std::norm(coef[i]);
          reach = std::max(reach, std::sqrt(r2));
        }
        if (delta - reach < delta - rho_max - 1e-15) bad[t] = 1;
        if (e == 0) return kSkip;
        norms *= std::sqrt(double(e) * fg.cell_volume());
        // Slices x_j = const: E_j f_j is the inverse transform of f_j exp(2 pi i x_j phi_j).
        for (std::size_t sl = 0; sl < G; ++sl) {
          const double xj = xg.coord(0, sl);
          SampledField F(fg);
          for (std::size_t i = 0; i < slice; ++i)
            if (coef[i] != cplx(0)) {
              const Point xi = fg.point(i);
              F.values[i] = coef[i] * std::polar(1.0, kTwoPi * xj * patches[j].phi(xi.data(), m));
            }
          F.conjugate = xg;
          const auto E = transform(F, Direction::inverse);
          for (std::size_t i = 0; i < slice; ++i) {
            // Insert the slice coordinate at position j of the ambient index.
            std::size_t rest = i, idx = 0, stride = total;
            std::vector<std::size_t> sub(m);
            for (int k = m - 1; k >= 0; --k) {
              sub[k] = rest % G;
              rest /= G;
            }
            int k = 0;
            for (int a = 0; a < d; ++a) {
              stride /= G;
              idx += stride * (a == j ? sl : sub[k++]);
            }
            prod[idx] *= std::pow(std::abs(E.values[i]), 2.0 / n);
          }
        }
      }
      long double acc = 0;
      for (double v : prod) acc += v;
      return std::pow(double(acc) * cell, n / 2.0) / norms;
    });
    for (int b : bad) violations += b;
    std::vector<double> per_trial(vals);
    double best = -INFINITY;
    for (std::size_t t = 0; t < vals.size(); ++t) {
      const bool skip = std::isnan(vals[t]);
      r.trials.push_back({R, accepted[t], skip ? 0.0 : vals[t], skip ? "skipped" : "ok"});
      if (skip) {
        ++r.rejected;
        continue;
      }
      best = std::max(best, vals[t]);
    }
    add_row(r, R, std::isfinite(best) ? best : kSkip);
    r.metrics["accepted_R" + std::to_string(si)] = double(accepted.size());
    if (std::isfinite(best)) r.constant = std::max(r.constant, best);
  }
  r.metrics["accepted_violations"] = violations;
  add_check(r, "accepted_margin_violations", violations, 0);
  fit_rows(r);
  return r;
}

}  // namespace probe_detail

}  // namespace rlab
