#include <algorithm>
#include <cmath>
#include <cstdint>

#include "common.hpp"
#include "rlab/dyadic.hpp"
#include "rlab/extension.hpp"
#include "rlab/packets.hpp"
#include "rlab/surface.hpp"

namespace rlab::probe_detail {

namespace {

std::size_t pow2_at_least(double v) {
  std::size_t n = 1;
  while (double(n) < v) n <<= 1;
  return n;
}

bool is_whole(double v) { return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v)); }

// Frequency-lattice coefficient: xi = a dxi, eta = b deta.
struct LatticeCoef {
  std::int64_t a, b;
  cplx c;
};

// sum_k |(A * B)_k|^2 for the discrete convolution of two sparse sets.
double convolution_energy(const std::vector<LatticeCoef>& A, const std::vector<LatticeCoef>& B) {
  constexpr std::int64_t off = std::int64_t(1) << 30;
  std::vector<std::pair<std::uint64_t, cplx>> terms;
  terms.reserve(A.size() * B.size());
  for (const auto& p : A)
    for (const auto& q : B)
      terms.emplace_back((std::uint64_t(p.a + q.a + off) << 32) | std::uint64_t(p.b + q.b + off), p.c * q.c);
  std::stable_sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  long double e = 0;
  for (std::size_t i = 0; i < terms.size();) {
    cplx s = 0;
    std::size_t j = i;
    for (; j < terms.size() && terms[j].first == terms[i].first; ++j) s += terms[j].second;
    e += std::norm(s);
    i = j;
  }
  return double(e);
}

Interval param_interval(const ProbeConfig& c, const char* lo, const char* hi, double dlo, double dhi) {
  return {c.param(lo, dlo), c.param(hi, dhi)};
}

}  // namespace

ProbeReport reverse_square(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::slope);
  const Interval J1 = param_interval(c, "j1_lo", "j1_hi", -1.0, -0.5);
  const Interval J2 = param_interval(c, "j2_lo", "j2_hi", 0.5, 1.0);
  require(J1.length() > 0 && J2.length() > 0, "reverse_square: degenerate interval");
  require(interval_distance(J1, J2) > 0, "reverse_square: J1 and J2 must be separated");
  const std::string variant = c.variant.empty() ? "random" : c.variant;
  require(variant == "random" || variant == "single_cap" || variant == "zero", "reverse_square: unknown variant");
  for (double d : c.scales) {
    require(d > 0 && d < 1, "reverse_square: need 0 < delta < 1");
    require(is_whole(J1.length() / d) && is_whole(J2.length() / d), "reverse_square: delta must divide |J1| and |J2|");
    require(is_whole(J1.lo / d) && is_whole(J2.lo / d), "reverse_square: interval ends must be multiples of delta");
  }
  r.target = 0.0;
  r.target_note = "bilinear L^4 norm bounded by the cap square function, uniformly in delta";

  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const double delta = c.scales[si], dxi = delta / 4, deta = delta * delta / 2;
    // Lattice points of each cap |eta - xi^2| <= delta^2, xi in [lo, lo + delta).
    auto caps_of = [&](const Interval& J) {
      std::vector<std::vector<LatticeCoef>> caps;
      const int count = int(std::llround(J.length() / delta));
      for (int i = 0; i < count; ++i) {
        std::vector<LatticeCoef> cap;
        const std::int64_t a0 = std::llround((J.lo + i * delta) / dxi);
        for (std::int64_t a = a0; a < a0 + 4; ++a) {
          const double xi = double(a) * dxi;
          const double lo = (xi * xi - delta * delta) / deta, hi = (xi * xi + delta * delta) / deta;
          for (auto b = std::int64_t(std::ceil(lo - 1e-9)); b <= std::int64_t(std::floor(hi + 1e-9)); ++b)
            cap.push_back({a, b, 0.0});
        }
        caps.push_back(std::move(cap));
      }
      return caps;
    };
    const auto base1 = caps_of(J1), base2 = caps_of(J2);
    auto vals = parallel_trials(c.trials, [&](int t) {
      TrialRng rng(c.seed, trial_key(si, t));
      auto c1 = base1, c2 = base2;
      for (auto* caps : {&c1, &c2})
        for (std::size_t i = 0; i < caps->size(); ++i)
          for (auto& p : (*caps)[i]) {
            const cplx g = rng.cnormal();
            p.c = variant == "zero" || (variant == "single_cap" && i != 0) ? cplx(0) : g;
          }
      double rhs = 0;
      for (const auto& a : c1)
        for (const auto& b : c2) rhs += convolution_energy(a, b);
      if (!(rhs > 0)) return kSkip;
      std::vector<LatticeCoef> all1, all2;
      for (const auto& a : c1) all1.insert(all1.end(), a.begin(), a.end());
      for (const auto& b : c2) all2.insert(all2.end(), b.begin(), b.end());
      return std::pow(convolution_energy(all1, all2) / rhs, 0.25);
    });
    const double m = record_trials(r, delta, vals);
    add_row(r, delta, m);
    if (std::isfinite(m)) r.constant = std::max(r.constant, m);
  }
  fit_rows(r);
  return r;
}

ProbeReport transverse_packet(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::slope);
  const double nu = c.param("nu", kPi / 4), margin = c.param("margin", 4.0);
  require(nu > 0 && nu <= kPi / 2, "transverse_packet: need 0 < nu <= pi/2");
  const std::string variant = c.variant.empty() ? "random" : c.variant;
  require(variant == "random" || variant == "single_packet", "transverse_packet: unknown variant");
  for (double d : c.scales) {
    require(d > 0 && d <= 0.25 && is_whole(std::log2(d)), "transverse_packet: delta must be 2^-k <= 1/4");
    require(nu >= margin * d, "transverse_packet: nu below the transversality margin");
  }
  r.target = (2 + 2) / 4.0;
  r.target_note = "(n+2)/4 for n = 2";
  const double cn = std::cos(nu), sn = std::sin(nu);

  double worst_prediction = 0;
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const double d = c.scales[si], d2 = d * d, L = 8 / d2;
    // Difference set of the product spectrum must not alias on the grid.
    const double X = d + std::abs(cn) * d + sn * d2, Y = d2 + sn * d + std::abs(cn) * d2;
    const std::size_t N = pow2_at_least(2 * std::max(X, Y) * L * (1 + 1e-9) + 1);
    const Grid grid = make_grid({{-L / 2, L / 2}, {-L / 2, L / 2}}, {N, N});
    const Grid freq = reciprocal_grid(grid);
    const double a1 = 1 / (2 * d), a2 = 1 / (2 * d2), amp = std::sqrt(a1 * a2);
    auto window = [&](double u, double v) {
      const double au = std::abs(u), av = std::abs(v);
      return au >= d || av >= d2 ? 0.0 : plateau_profile(au, d / 2, d) * plateau_profile(av, d2 / 2, d2);
    };
    auto build = [&](bool rotated, const std::vector<cplx>& coef) {
      SampledField F(freq);
      for (std::size_t i = 0; i < F.values.size(); ++i) {
        const Point xi = freq.point(i);
        const double u = rotated ? cn * xi[0] + sn * xi[1] : xi[0], v = rotated ? -sn * xi[0] + cn * xi[1] : xi[1];
        const double w = window(u, v);
        if (w == 0) continue;
        cplx acc = 0;
        int k = 0;
        for (int ti = -1; ti <= 1; ++ti)
          for (int tk = -1; tk <= 1; ++tk, ++k) {
            if (coef[k] == cplx(0)) continue;
            // Tile centre in the box frame; u, v are the frame coordinates of xi.
            acc += coef[k] * std::polar(1.0, -kTwoPi * (ti * a1 * u + tk * a2 * v));
          }
        F.values[i] = amp * w * acc;
      }
      F.conjugate = grid;
      return transform(F, Direction::inverse);
    };
    auto ratio_of = [&](const SampledField& f1, const SampledField& f2) {
      std::vector<cplx> prod(f1.values.size());
      for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = f1.values[i] * f2.values[i];
      const double num = lp_norm(prod, grid.cell_volume(), 2);
      return std::sqrt(num / std::sqrt(lp_norm(f1, 2) * lp_norm(f2, 2)));
    };
    const bool single = variant == "single_packet";
    auto vals = parallel_trials(c.trials, [&](int t) {
      TrialRng rng(c.seed, trial_key(si, t));
      std::vector<cplx> k1(9), k2(9);
      for (int k = 0; k < 9; ++k) {
        k1[k] = single ? cplx(k == 4) : rng.cnormal();
        k2[k] = single ? cplx(k == 4) : rng.cnormal();
      }
      return ratio_of(build(false, k1), build(true, k2));
    });
    const double m = record_trials(r, d, vals);
    add_row(r, d, m);
    r.constant = std::max(r.constant, m);

    if (single) {
      // Effective boxes: side = int of |W|^2 along the axis over its peak value.
      const auto W = build(false, std::vector<cplx>{0, 0, 0, 0, 1, 0, 0, 0, 0});
      const std::size_t i0 = N / 2;
      const double peak = std::norm(W.values[i0 * N + i0]);
      double lw = 0, ll = 0;
      for (std::size_t k = 0; k < N; ++k) {
        lw += std::norm(W.values[k * N + i0]);
        ll += std::norm(W.values[i0 * N + k]);
      }
      const double h = grid.spacing[0];
      lw *= h / peak;
      ll *= h / peak;
      const auto t1 = make_box_2d({0, 0}, 0, lw, ll), t2 = make_box_2d({0, 0}, nu, lw, ll);
      const auto ov = overlap_volume(t1, t2, 400000, c.seed);
      const double predicted = std::pow(ov.volume / (t1.volume() * t2.volume()), 0.25);
      r.metrics["predicted_ratio_" + std::to_string(si)] = predicted;
      worst_prediction = std::max(worst_prediction, std::abs(m / predicted - 1));
    }
  }
  if (variant == "single_packet") add_check(r, "overlap_prediction_error", worst_prediction, 0.2);
  fit_rows(r);
  return r;
}

namespace {

// Smooth random density at resolution 1/R on J, vanishing near the ends.
std::vector<cplx> random_profile(const Density& f, const Interval& J, double R, TrialRng& rng) {
  const int bumps = std::max(1, int(std::ceil(J.length() * R)));
  std::vector<cplx> coef(bumps);
  for (auto& v : coef) v = rng.cnormal();
  std::vector<cplx> out(f.size());
  const double mid = J.midpoint(), half = J.length() / 2;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double xi = f.node(i)[0];
    cplx acc = 0;
    for (int k = 0; k < bumps; ++k) {
      const double u = (xi - (J.lo + (k + 0.5) * J.length() / bumps)) * R;
      if (std::abs(u) < 8) acc += coef[k] * std::exp(-kPi * u * u);
    }
    out[i] = acc * plateau_profile(std::abs(xi - mid), 0.8 * half, half);
  }
  return out;
}

double quadrature_l2(const Density& f) {
  long double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.weights[i] * std::norm(f.values[i]);
  return std::sqrt(double(s));
}

// ||E f1 E f2||_{L^{p/2}(B(0,R))}^{1/2} on a grid with spacing 1/2.
double bilinear_norm(const Density& f1, const Density& f2, double R, double p) {
  const std::size_t per = std::size_t(std::llround(4 * R));
  const Grid grid = make_grid({{-R, R}, {-R, R}}, {per, per});
  const auto E1 = extend_on_grid(f1, grid), E2 = extend_on_grid(f2, grid);
  long double acc = 0;
  for (std::size_t i = 0; i < E1.values.size(); ++i) {
    const Point x = grid.point(i);
    if (x[0] * x[0] + x[1] * x[1] > R * R) continue;
    acc += std::pow(std::abs(E1.values[i] * E2.values[i]), p / 2);
  }
  return std::pow(double(acc) * grid.cell_volume(), 1 / p);
}

Density density_on(const Interval& J, double h, const DensityFn& fn = {}) {
  const std::size_t nodes = std::size_t(std::floor(J.length() / h + 1e-9));
  require(nodes >= 4, "bilinear: interval too short for the quadrature");
  return make_density_on(make_paraboloid(2, {{J.lo, J.hi}}), {{J.lo, J.lo + double(nodes) * h}}, {nodes}, fn);
}

}  // namespace

ProbeReport bilinear(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::slope);
  const Interval J1 = param_interval(c, "j1_lo", "j1_hi", -1.0, -0.5);
  const Interval J2 = param_interval(c, "j2_lo", "j2_hi", 0.5, 1.0);
  require(interval_distance(J1, J2) > 0, "bilinear: need d(J1, J2) > 0");
  for (const auto& J : {J1, J2})
    require(J.lo >= -1 && J.hi <= 1 && J.length() > 0, "bilinear: intervals must lie in [-1, 1]");
  const double p = c.p > 0 ? c.p : 4.0;
  require(p >= 2, "bilinear: need p >= 2");
  const std::string variant = c.variant.empty() ? "random" : c.variant;
  require(variant == "random" || variant == "zero", "bilinear: unknown variant");
  for (double R : c.scales) require(R >= 4 && is_whole(std::log2(R)), "bilinear: R must be a power of two >= 4");
  r.target = 0.0;
  r.target_note = "bilinear constant bounded uniformly in R";

  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const double R = c.scales[si], h = 1 / (16 * R);
    auto vals = parallel_trials(c.trials, [&](int t) {
      TrialRng rng(c.seed, trial_key(si, t));
      Density f1 = density_on(J1, h), f2 = density_on(J2, h);
      f1.values = random_profile(f1, J1, R, rng);
      f2.values = random_profile(f2, J2, R, rng);
      if (variant == "zero") {
        std::fill(f1.values.begin(), f1.values.end(), cplx(0));
        std::fill(f2.values.begin(), f2.values.end(), cplx(0));
      }
      const double den = std::sqrt(quadrature_l2(f1) * quadrature_l2(f2));
      if (!(den > 0)) return kSkip;
      return bilinear_norm(f1, f2, R, p) / den;
    });
    const double m = record_trials(r, R, vals);
    add_row(r, R, m);
    if (std::isfinite(m)) r.constant = std::max(r.constant, m);
  }
  fit_rows(r);

  if (c.param("sweep", 0) != 0) {
    // Knapp pair at distance D: bumps of width D on [-3D/2, -D/2] and [D/2, 3D/2].
    const double Rs = c.param("sweep_radius", 256), h = 1 / (16 * Rs);
    require(Rs >= 16 && is_whole(std::log2(Rs)), "bilinear: sweep_radius must be a power of two >= 16");
    const double q = c.q > 0 ? c.q : 2.0, qp = q == 1 ? INFINITY : q / (q - 1);
    const double predicted = 1 / qp - 3 / p;
    std::vector<std::pair<double, double>> pts;
    for (double D : {0.5, 0.25, 0.125}) {
      const Interval I1{-1.5 * D, -0.5 * D}, I2{0.5 * D, 1.5 * D};
      auto f1 = density_on(I1, h, [&](const double* xi) { return cplx(bump_profile((xi[0] + D) / (D / 2))); });
      auto f2 = density_on(I2, h, [&](const double* xi) { return cplx(bump_profile((xi[0] - D) / (D / 2))); });
      auto qnorm = [&](const Density& f) {
        long double s = 0;
        for (std::size_t i = 0; i < f.size(); ++i) s += f.weights[i] * std::pow(std::abs(f.values[i]), q);
        return std::pow(double(s), 1 / q);
      };
      const double ratio = bilinear_norm(f1, f2, Rs, p) / std::sqrt(qnorm(f1) * qnorm(f2));
      r.metrics["sweep_ratio_D" + std::to_string(pts.size())] = ratio;
      pts.emplace_back(D, ratio);
    }
    const double e = fit_slope(pts).exponent;
    r.metrics["sweep_exponent"] = e;
    r.metrics["sweep_predicted"] = predicted;
    add_check(r, "sweep_exponent_error", std::abs(e - predicted), c.slope_tol);
  }
  return r;
}

ProbeReport whitney_assembly(const ProbeConfig& c) {
  ProbeReport r = start_report(c, ProbeKind::bound);
  const std::string variant = c.variant.empty() ? "one" : c.variant;
  require(variant == "one" || variant == "random" || variant == "zero", "whitney_assembly: unknown variant");
  int K = 0;
  for (double k : c.scales) {
    require(k >= 1 && k <= 10 && k == std::floor(k), "whitney_assembly: k_max must be an integer in [1, 10]");
    K = std::max(K, int(k));
  }
  const double h = std::ldexp(1.0, -K) / 8;
  const std::size_t count = std::size_t(std::llround(2 / h));
  std::vector<double> nodes(count);
  for (std::size_t j = 0; j < count; ++j) nodes[j] = -1 + (double(j) + 0.5) * h;
  std::vector<Point> xs{{0.0, 0.0}};
  for (std::uint64_t i = 0; i < 64; ++i) {
    const double rad = 4 * std::sqrt(counter_uniform(c.seed ^ 0x3779ULL, 2 * i)),
                 th = kTwoPi * counter_uniform(c.seed ^ 0x3779ULL, 2 * i + 1);
    xs.push_back({rad * std::cos(th), rad * std::sin(th)});
  }
  // Phase resolution of the common node set at the farthest point.
  for (const auto& x : xs) require((std::abs(x[0]) + 2 * std::abs(x[1])) * h <= 0.25, "whitney_assembly: phase guard");
  auto index = [&](double v) { return std::size_t(std::llround((v + 1) / h)); };

  r.bound = 1.0;
  r.target_note = "defect / strip bound, strip bound = sum over truncated pairs of |Q1||Q2| sup|f|^2";
  std::vector<std::pair<int, double>> by_k;
  for (std::size_t si = 0; si < c.scales.size(); ++si) {
    const int k = int(c.scales[si]);
    const auto dd = diagonal_decompose(1, -k);
    std::vector<std::pair<std::size_t, std::size_t>> I1, I2;
    for (const auto& pr : dd.pairs) {
      const double s = pr.first.side();
      I1.emplace_back(index(double(pr.first.corner[0]) * s), index(double(pr.first.corner[0] + 1) * s));
      I2.emplace_back(index(double(pr.second.corner[0]) * s), index(double(pr.second.corner[0] + 1) * s));
    }
    double strip = 0;
    for (const auto& q : dd.whitney.truncated) strip += q.side() * q.side();
    auto vals = parallel_trials(c.trials, [&](int t) {
      TrialRng rng(c.seed, trial_key(si, t));
      std::vector<cplx> f(count, variant == "one" ? 1.0 : 0.0);
      if (variant == "random")
        for (auto& v : f) v = rng.cnormal();
      double sup = 0;
      for (const auto& v : f) sup = std::max(sup, std::abs(v));
      if (sup == 0) return 0.0;
      double worst = 0;
      std::vector<cplx> P(count + 1);
      for (const auto& x : xs) {
        P[0] = 0;
        for (std::size_t j = 0; j < count; ++j)
          P[j + 1] = P[j] + h * f[j] * std::polar(1.0, kTwoPi * (x[0] * nodes[j] + x[1] * nodes[j] * nodes[j]));
        cplx sum = 0;
        for (std::size_t i = 0; i < I1.size(); ++i)
          sum += (P[I1[i].second] - P[I1[i].first]) * (P[I2[i].second] - P[I2[i].first]);
        worst = std::max(worst, std::abs(P[count] * P[count] - sum) / (sup * sup));
      }
      return worst;
    });
    const double m = record_trials(r, k, vals);
    add_row(r, k, m);
    r.metrics["strip_bound_k" + std::to_string(k)] = strip;
    r.constant = std::max(r.constant, m / strip);
    by_k.emplace_back(k, m);
  }
  std::sort(by_k.begin(), by_k.end());
  double rise = 0;
  for (std::size_t i = 1; i < by_k.size(); ++i) rise = std::max(rise, by_k[i].second - by_k[i - 1].second);
  add_check(r, "defect_increase_in_k_max", rise, 1e-12);
  return r;
}

}  // namespace rlab::probe_detail
