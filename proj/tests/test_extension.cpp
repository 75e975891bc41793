#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rlab/extension.hpp"

using namespace rlab;

namespace {

// Smooth, compactly supported inside (-1,1): random trig polynomial times a bump.
DensityFn random_smooth(std::uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  std::vector<cplx> c(4 * dim);
  for (auto& v : c) v = oracle::cnormal(rng);
  return [c, dim](const double* xi) {
    cplx acc = 0;
    double r2 = 0;
    for (int k = 0; k < dim; ++k) {
      r2 += xi[k] * xi[k];
      for (int q = 0; q < 4; ++q) acc += c[4 * k + q] * std::polar(1.0, (q + 1) * xi[k]);
    }
    return r2 < 0.81 ? acc * std::exp(-1.0 / (1 - r2 / 0.81)) : cplx(0);
  };
}

SampledField windowed_noise(const Grid& g, double a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampledField f(g);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    auto x = g.point(i);
    double r2 = 0;
    for (double v : x) r2 += v * v;
    f.values[i] = oracle::cnormal(rng) * std::exp(-a * oracle::pi * r2);
  }
  return f;
}

}  // namespace

TEST(Extend, UnitDensityAtOrigin) {
  auto d = make_density(make_paraboloid(2, {{-1, 1}}), {64});
  EXPECT_NEAR(std::abs(extend(d, {{0, 0}})[0] - cplx(2.0)), 0.0, 1e-14);
  EXPECT_THROW(extend(d, {}), precondition_error);
  EXPECT_THROW(extend(d, {{0, 1000}}), precondition_error);
}

TEST(Extend, ModulationLaw) {
  auto s = make_paraboloid(3, {{-1, 1}, {-1, 1}});
  auto fn = random_smooth(3, 2);
  const Point a{1.25, -0.75};
  auto f = make_density(s, {64, 64}, fn);
  auto fa = make_density(s, {64, 64}, [&](const double* xi) {
    return fn(xi) * std::polar(1.0, -2 * oracle::pi * (a[0] * xi[0] + a[1] * xi[1]));
  });
  EvalSet xs{{0.5, 1, 2}, {-2, 0.3, -1}, {3, 3, 0}};
  EvalSet shifted;
  for (auto x : xs) shifted.push_back({x[0] - a[0], x[1] - a[1], x[2]});
  auto lhs = extend(fa, xs), rhs = extend(f, shifted);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(std::abs(lhs[i] - rhs[i]), 0.0, 1e-10);
}

TEST(Extend, SmoothDensityAgreesWithGaussLegendreOracle) {
  auto s = make_paraboloid(2, {{-1, 1}});
  auto fn = random_smooth(11, 1);
  auto d = make_density(s, {512}, fn);
  EvalSet xs{{0, 0}, {3.5, -2}, {-7, 12}, {10, 20}};
  auto got = extend(d, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto x = xs[i];
    auto integrand = [&](double xi) { return fn(&xi) * std::polar(1.0, 2 * oracle::pi * (x[0] * xi + x[1] * xi * xi)); };
    cplx want = oracle::gauss_legendre(integrand, -1, 1, 200);
    EXPECT_NEAR(std::abs(got[i] - want), 0.0, 1e-6 * std::max(1.0, std::abs(want)));
  }
}

TEST(Extend, SurfaceDensityAgreesWithDoubleResolution) {
  auto s = make_hemisphere(3, {{-0.6, 0.6}, {-0.6, 0.6}});
  auto fn = [](const double* xi) {
    double r2 = (xi[0] * xi[0] + xi[1] * xi[1]) / 0.36;
    return r2 < 1 ? cplx(std::exp(-1 / (1 - r2)), xi[0]) * std::exp(-1 / (1 - r2)) : cplx(0);
  };
  auto coarse = make_density(s, {96, 96}, fn);
  EvalSet xs{{0, 0, 0}, {2, -1, 4}, {-5, 3, 8}};
  auto got = extend(coarse, xs);
  // Independent midpoint sum on a 192 x 192 grid, written out here.
  const int n = 192;
  const double h = 1.2 / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cplx want = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double xi[2] = {-0.6 + (a + 0.5) * h, -0.6 + (b + 0.5) * h};
        double z = std::sqrt(1 - xi[0] * xi[0] - xi[1] * xi[1]);
        want += h * h * fn(xi) * std::polar(1.0, 2 * oracle::pi * (xs[i][0] * xi[0] + xs[i][1] * xi[1] + xs[i][2] * z));
      }
    EXPECT_NEAR(std::abs(got[i] - want), 0.0, 1e-6);
  }
}

TEST(Extend, LinearityAndTriangleBound) {
  auto s = make_paraboloid(3, {{-1, 1}, {-1, 1}});
  auto f = make_density(s, {48, 48}, random_smooth(1, 2));
  auto g = make_density(s, {48, 48}, random_smooth(2, 2));
  const cplx alpha(0.3, -1.2), beta(2.0, 0.5);
  auto fg = f;
  for (std::size_t j = 0; j < f.size(); ++j) fg.values[j] = alpha * f.values[j] + beta * g.values[j];
  EvalSet xs{{0.1, 0.2, 0.3}, {-1, 2, -2}, {2.5, -2.5, 1}};
  auto ef = extend(f, xs), eg = extend(g, xs), efg = extend(fg, xs);
  double l1 = 0;
  for (std::size_t j = 0; j < f.size(); ++j) l1 += f.weights[j] * std::abs(f.values[j]);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cplx lin = alpha * ef[i] + beta * eg[i];
    EXPECT_LE(std::abs(efg[i] - lin), 1e-12 * std::abs(lin));
    EXPECT_LE(std::abs(ef[i]), l1 * (1 + 1e-12));
  }
}

TEST(Extend, FlatSurfaceMatchesInverseTransform) {
  const std::size_t N = 128;
  const double h = 2.0 / N;
  auto s = make_affine({0}, 0, {{-1, 1}});
  auto fn = random_smooth(4, 1);
  auto d = make_density(s, {N}, fn);
  // Midpoint nodes as a spectral grid shifted by h/2.
  auto g = make_grid({{-1 + h / 2, 1 + h / 2}}, {N});
  SampledField f(g);
  for (std::size_t j = 0; j < N; ++j) f.values[j] = d.values[j];
  auto inv = transform(f, Direction::inverse);
  EvalSet xs;
  std::vector<cplx> want;
  for (std::size_t k = 0; k < N; ++k) {
    double x = inv.grid.coord(0, k);
    if (std::abs(x) * h > 0.25) continue;
    xs.push_back({x, 0});
    want.push_back(inv.values[k]);
  }
  auto got = extend(d, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(std::abs(got[i] - want[i]), 0.0, 1e-8);
}

TEST(Extend, ParallelMatchesSerialExactly) {
  auto s = make_paraboloid(3, {{-1, 1}, {-1, 1}});
  auto f = make_density(s, {64, 64}, random_smooth(8, 2));
  EvalSet xs;
  for (int i = 0; i < 100; ++i) xs.push_back({0.04 * i, -0.025 * i, 0.016 * i});
  EXPECT_EQ(extend(f, xs), serial::extend(f, xs));
}

TEST(Extend, GridPathMatchesDirectSum) {
  auto s = make_paraboloid(2, {{-1, 1}});
  const std::size_t nodes = 256;
  auto f = make_density(s, {nodes}, random_smooth(5, 1));
  // M = 1/(h dx1) = 512 with h = 2/256: dx1 = 1/4.
  auto g = make_grid({{-16, 16}, {-8, 8}}, {128, 32});
  auto fast = extend_on_grid(f, g);
  EvalSet pts;
  for (std::size_t i = 0; i < g.cell_count(); ++i) pts.push_back(g.point(i));
  auto direct = extend(f, pts);
  double worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, std::abs(fast.values[i] - direct[i]));
  EXPECT_LE(worst, 1e-10);
  EXPECT_THROW(extend_on_grid(f, make_grid({{-16, 16}, {-8, 8}}, {32, 32})), precondition_error);
}

TEST(Restrict, ZeroFieldAndGaussian) {
  auto s = make_paraboloid(2, {{-1, 1}});
  auto g = make_grid({{-6, 6}, {-6, 6}}, {64, 64});
  SampledField zero(g);
  for (const auto& v : restrict_field(zero, s, {32}).values) EXPECT_EQ(v, cplx(0));

  SampledField gauss(g);
  std::vector<std::vector<double>> xs;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    auto x = g.point(i);
    gauss.values[i] = std::exp(-oracle::pi * (x[0] * x[0] + x[1] * x[1]));
    xs.push_back(x);
  }
  auto r = restrict_field(gauss, s, {32});
  for (std::size_t j = 0; j < r.size(); ++j) {
    double xi = r.node(j)[0], psi = xi * xi;
    EXPECT_NEAR(std::abs(r.values[j] - std::exp(-oracle::pi * (xi * xi + psi * psi))), 0.0, 1e-6);
    cplx direct = oracle::direct_ft(xs, gauss.values, g.cell_volume(), {xi, psi}, -1);
    EXPECT_NEAR(std::abs(r.values[j] - direct), 0.0, 1e-13);
  }
}

TEST(Restrict, LinearityAndGuards) {
  auto s = make_paraboloid(3, {{-0.7, 0.7}, {-0.7, 0.7}});
  auto g = make_grid({{-3, 3}, {-3, 3}, {-3, 3}}, {16, 16, 16});
  auto a = windowed_noise(g, 1.0, 1), b = windowed_noise(g, 1.0, 2);
  SampledField ab(g);
  for (std::size_t i = 0; i < ab.values.size(); ++i) ab.values[i] = a.values[i] + b.values[i];
  auto ra = restrict_field(a, s, {8, 8}), rb = restrict_field(b, s, {8, 8}), rab = restrict_field(ab, s, {8, 8});
  for (std::size_t j = 0; j < ra.size(); ++j)
    EXPECT_LE(std::abs(rab.values[j] - ra.values[j] - rb.values[j]), 1e-12 * std::abs(rab.values[j]) + 1e-300);
  auto serial_rab = serial::restrict_field(ab, make_density(s, {8, 8}));
  EXPECT_EQ(serial_rab.values, rab.values);

  auto wide = windowed_noise(g, 0.01, 3);
  EXPECT_THROW(restrict_field(wide, s, {8, 8}), precondition_error);
}

TEST(Adjoint, MatchedQuadratureIsTransposeExact) {
  auto s = make_paraboloid(3, {{-0.7, 0.7}, {-0.7, 0.7}});
  auto g = windowed_noise(make_grid({{-3, 3}, {-3, 3}, {-3, 3}}, {16, 16, 16}), 1.0, 5);
  std::mt19937_64 rng(6);
  auto f = make_density(s, {48, 48});
  for (auto& v : f.values) v = oracle::cnormal(rng);
  EXPECT_LE(adjoint_defect(g, f), 1e-8);
  auto zero = make_density(s, {48, 48}, [](const double*) { return cplx(0); });
  EXPECT_EQ(adjoint_defect(g, zero), 0.0);
}

TEST(Adjoint, MismatchedResolutionConvergesAtLeastFirstOrder) {
  auto s = make_paraboloid(2, {{-1, 1}});
  auto g = windowed_noise(make_grid({{-2, 2}, {-2, 2}}, {32, 32}), 4.0, 9);
  auto fn = [](const double* xi) { return cplx(std::cos(2 * xi[0]), xi[0] * xi[0]); };
  std::vector<std::pair<double, double>> sweep;
  for (std::size_t n : {64, 128, 256, 512}) {
    double d = adjoint_defect(g, make_density(s, {n}, fn), make_density(s, {3 * n}, fn));
    sweep.push_back({double(n), d});
  }
  for (std::size_t i = 1; i < sweep.size(); ++i) EXPECT_LT(sweep[i].second, sweep[i - 1].second);
  EXPECT_LE(fit_slope(sweep).exponent, -1.0);
}

TEST(Rescale, IdentityAndExactChangeOfVariables) {
  auto s = make_paraboloid(3, {{-1, 1}, {-1, 1}});
  std::mt19937_64 rng(12);
  auto f = make_density(s, {64, 64});
  for (auto& v : f.values) v = oracle::cnormal(rng);
  EvalSet xs{{0.3, -0.2, 0.5}, {2, 1, -1.5}, {-1.5, 2.5, 1}};
  EXPECT_EQ(rescale_defect(f, {{-1, 1}, {-1, 1}}, {0, 0}, 1.0, xs), 0.0);

  const Point xi0{0.25, -0.5};
  const double D = 0.25;
  Box omega{{0.0, 0.5}, {-0.75, -0.25}};
  EXPECT_LE(rescale_defect(f, omega, xi0, D, xs), 1e-8);
  EXPECT_THROW(rescale_defect(f, {{0, 0.75}, {-0.75, -0.25}}, xi0, D, xs), precondition_error);
}

TEST(Rescale, IndependentQuadratureConvergesUnderRefinement) {
  auto s = make_paraboloid(3, {{-1, 1}, {-1, 1}});
  auto fn = [](const double* xi) { return cplx(1 + xi[0], std::sin(3 * xi[1])); };
  const Point xi0{0.25, -0.5};
  const double D = 0.25;
  Box omega{{0.0, 0.5}, {-0.75, -0.25}};
  EvalSet xs{{0.3, -0.2, 0.5}, {2, 1, -1.5}, {-1.5, 2.5, 1}};
  double prev = INFINITY;
  for (std::size_t n : {16, 32, 64, 128}) {
    double d = rescale_defect(s, fn, omega, xi0, D, xs, {n, n}, {2 * n + 1, 2 * n + 1});
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LE(prev, 1e-3);
}
