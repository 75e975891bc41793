#include "rlab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fft.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace rlab {

using detail::cis_turns;

namespace {

void require_in_domain(const Hypersurface& s, const Point& xi) {
  if (int(xi.size()) != s.param_dim()) throw precondition_error("surface: point dimension mismatch");
  if (!s.contains(xi.data())) throw precondition_error("surface: point outside the domain");
  if (s.kind == SurfaceKind::hemisphere) {
    double r2 = 0;
    for (double v : xi) r2 += v * v;
    if (r2 >= 1.0) throw precondition_error("surface: hemisphere needs |xi| < 1");
  }
}

SurfacePoint eval_unchecked(const Hypersurface& s, const double* xi) {
  const int m = s.param_dim();
  SurfacePoint p;
  p.gradient.assign(m, 0.0);
  p.hessian.assign(m * m, 0.0);
  switch (s.kind) {
    case SurfaceKind::paraboloid:
      for (int k = 0; k < m; ++k) {
        p.value += xi[k] * xi[k];
        p.gradient[k] = 2 * xi[k];
        p.hessian[k * m + k] = 2;
      }
      break;
    case SurfaceKind::hemisphere: {
      double r2 = 0;
      for (int k = 0; k < m; ++k) r2 += xi[k] * xi[k];
      const double q = 1 - r2, root = std::sqrt(q), sg = s.sign;
      p.value = sg * root;
      for (int k = 0; k < m; ++k) p.gradient[k] = -sg * xi[k] / root;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          p.hessian[a * m + b] = -sg * ((a == b ? q : 0.0) + xi[a] * xi[b]) / (q * root);
      break;
    }
    case SurfaceKind::polynomial_curve: {
      const auto& c = s.coefficients;
      const double x = xi[0];
      for (std::size_t i = c.size(); i-- > 0;) p.value = p.value * x + c[i];
      for (std::size_t i = c.size(); i-- > 1;) p.gradient[0] = p.gradient[0] * x + double(i) * c[i];
      for (std::size_t i = c.size(); i-- > 2;) p.hessian[0] = p.hessian[0] * x + double(i * (i - 1)) * c[i];
      break;
    }
    case SurfaceKind::affine:
      p.value = s.offset;
      for (int k = 0; k < m; ++k) {
        p.value += s.slope[k] * xi[k];
        p.gradient[k] = s.slope[k];
      }
      break;
  }
  return p;
}

// Dense sample of U (box corners included) for the smoothness and gradient bounds.
void fill_bounds(Hypersurface& s) {
  const int m = s.param_dim();
  const int per = m == 1 ? 4097 : (m == 2 ? 129 : 17);
  std::size_t total = 1;
  for (int k = 0; k < m; ++k) total *= per;
  s.gradient_bound.assign(m, 0.0);
  double sup = 0.0;
  std::vector<double> xi(m);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t t = i;
    for (int k = 0; k < m; ++k) {
      auto [lo, hi] = s.domain[k];
      xi[k] = lo + (hi - lo) * double(t % per) / double(per - 1);
      t /= per;
    }
    auto p = eval_unchecked(s, xi.data());
    double h2 = 0;
    for (double v : p.hessian) h2 += v * v;
    double g2 = 0;
    for (int k = 0; k < m; ++k) {
      g2 += p.gradient[k] * p.gradient[k];
      s.gradient_bound[k] = std::max(s.gradient_bound[k], std::abs(p.gradient[k]));
    }
    sup = std::max({sup, std::abs(p.value), std::sqrt(g2), std::sqrt(h2)});
  }
  s.smoothness_bound = sup * (1 + 1e-9);
}

void check_domain(const Box& domain, int m) {
  if (int(domain.size()) != m) throw precondition_error("surface: domain dimension mismatch");
  for (auto [lo, hi] : domain)
    if (!(lo < hi)) throw precondition_error("surface: degenerate domain");
}

}  // namespace

bool Hypersurface::contains(const double* xi, double slack) const {
  for (int k = 0; k < param_dim(); ++k)
    if (xi[k] < domain[k].first - slack || xi[k] > domain[k].second + slack) return false;
  return true;
}

double Hypersurface::psi(const double* xi) const {
  const int m = param_dim();
  switch (kind) {
    case SurfaceKind::paraboloid: {
      double v = 0;
      for (int k = 0; k < m; ++k) v += xi[k] * xi[k];
      return v;
    }
    case SurfaceKind::hemisphere: {
      double r2 = 0;
      for (int k = 0; k < m; ++k) r2 += xi[k] * xi[k];
      return sign * std::sqrt(1 - r2);
    }
    case SurfaceKind::affine: {
      double v = offset;
      for (int k = 0; k < m; ++k) v += slope[k] * xi[k];
      return v;
    }
    case SurfaceKind::polynomial_curve:
      break;
  }
  double v = 0;
  for (std::size_t i = coefficients.size(); i-- > 0;) v = v * xi[0] + coefficients[i];
  return v;
}

Hypersurface make_paraboloid(int ambient_dim, const Box& domain) {
  if (ambient_dim < 2) throw precondition_error("surface: ambient dimension must be >= 2");
  check_domain(domain, ambient_dim - 1);
  Hypersurface s;
  s.ambient_dim = ambient_dim;
  s.domain = domain;
  s.kind = SurfaceKind::paraboloid;
  fill_bounds(s);
  return s;
}

Hypersurface make_hemisphere(int ambient_dim, const Box& domain, int sign) {
  if (ambient_dim < 2) throw precondition_error("surface: ambient dimension must be >= 2");
  check_domain(domain, ambient_dim - 1);
  double far = 0;
  for (auto [lo, hi] : domain) far += std::max(lo * lo, hi * hi);
  if (far >= 1.0) throw precondition_error("surface: hemisphere domain must stay inside the open unit ball");
  Hypersurface s;
  s.ambient_dim = ambient_dim;
  s.domain = domain;
  s.kind = SurfaceKind::hemisphere;
  s.sign = sign >= 0 ? 1 : -1;
  fill_bounds(s);
  return s;
}

Hypersurface make_polynomial_curve(const std::vector<double>& coefficients, std::pair<double, double> domain) {
  check_domain({domain}, 1);
  Hypersurface s;
  s.ambient_dim = 2;
  s.domain = {domain};
  s.kind = SurfaceKind::polynomial_curve;
  s.coefficients = coefficients.empty() ? std::vector<double>{0.0} : coefficients;
  fill_bounds(s);
  return s;
}

Hypersurface make_affine(const std::vector<double>& slope, double offset, const Box& domain) {
  check_domain(domain, int(slope.size()));
  Hypersurface s;
  s.ambient_dim = int(slope.size()) + 1;
  s.domain = domain;
  s.kind = SurfaceKind::affine;
  s.slope = slope;
  s.offset = offset;
  fill_bounds(s);
  return s;
}

SurfacePoint surface_eval(const Hypersurface& s, const Point& xi) {
  require_in_domain(s, xi);
  return eval_unchecked(s, xi.data());
}

double determinant(std::vector<double> a, int n) {
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    det *= a[c * n + c];
    for (int r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / a[c * n + c];
      for (int k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

double gaussian_curvature(const Hypersurface& s, const Point& xi) {
  auto p = surface_eval(s, xi);
  const int m = s.param_dim();
  double g2 = 0;
  for (double g : p.gradient) g2 += g * g;
  double det = determinant(p.hessian, m);
  if (g2 == 0.0) return det;
  return det / std::pow(1 + g2, 0.5 * (s.ambient_dim + 1));
}

Point unit_normal(const Hypersurface& s, const Point& xi) {
  auto p = surface_eval(s, xi);
  double g2 = 0;
  for (double g : p.gradient) g2 += g * g;
  const double inv = 1.0 / std::sqrt(1 + g2);
  Point nrm;
  for (double g : p.gradient) nrm.push_back(-g * inv);
  nrm.push_back(inv);
  return nrm;
}

double transversality(const std::vector<std::pair<const Hypersurface*, Point>>& points) {
  const int n = int(points.size());
  if (n == 0) throw precondition_error("transversality: no patches");
  std::vector<double> mat(n * n);
  for (int c = 0; c < n; ++c) {
    if (points[c].first->ambient_dim != n)
      throw precondition_error("transversality: need exactly n normals in R^n");
    auto nrm = unit_normal(*points[c].first, points[c].second);
    for (int r = 0; r < n; ++r) mat[r * n + c] = nrm[r];
  }
  return std::abs(determinant(mat, n));
}

double transversality_min(const std::vector<const Hypersurface*>& patches, std::size_t samples_per_axis) {
  const int n = int(patches.size());
  if (n == 0 || samples_per_axis == 0) throw precondition_error("transversality: empty batch");
  std::vector<std::vector<Point>> pts(n);
  for (int i = 0; i < n; ++i) {
    const auto& s = *patches[i];
    if (s.ambient_dim != n) throw precondition_error("transversality: need exactly n normals in R^n");
    const int m = s.param_dim();
    std::size_t total = 1;
    for (int k = 0; k < m; ++k) total *= samples_per_axis;
    for (std::size_t t = 0; t < total; ++t) {
      Point xi(m);
      std::size_t q = t;
      for (int k = 0; k < m; ++k) {
        auto [lo, hi] = s.domain[k];
        xi[k] = lo + (hi - lo) * (double(q % samples_per_axis) + 0.5) / double(samples_per_axis);
        q /= samples_per_axis;
      }
      pts[i].push_back(unit_normal(s, xi));
    }
  }
  long long tuples = 1;
  for (auto& p : pts) tuples *= (long long)p.size();
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : best) schedule(static)
  for (long long t = 0; t < tuples; ++t) {
    std::vector<double> mat(n * n);
    long long q = t;
    for (int c = 0; c < n; ++c) {
      const auto& nrm = pts[c][std::size_t(q % (long long)pts[c].size())];
      q /= (long long)pts[c].size();
      for (int r = 0; r < n; ++r) mat[r * n + c] = nrm[r];
    }
    best = std::min(best, std::abs(determinant(mat, n)));
  }
  return best;
}

double Density::measure() const {
  long double s = 0;
  for (double w : weights) s += w;
  return double(s);
}

Density make_density_on(const Hypersurface& s, const Box& box, const std::vector<std::size_t>& samples,
                        const DensityFn& f) {
  const int m = s.param_dim();
  if (int(box.size()) != m || int(samples.size()) != m) throw precondition_error("density: dimension mismatch");
  Density d;
  d.surface = s;
  d.box = box;
  d.samples = samples;
  std::size_t total = 1;
  double cell = 1.0;
  for (int k = 0; k < m; ++k) {
    auto [lo, hi] = box[k];
    if (!(lo < hi) || samples[k] == 0) throw precondition_error("density: degenerate box or sample count");
    if (lo < s.domain[k].first - 1e-12 || hi > s.domain[k].second + 1e-12)
      throw precondition_error("density: box leaves the surface domain");
    d.spacing.push_back((hi - lo) / double(samples[k]));
    cell *= d.spacing.back();
    total *= samples[k];
  }
  d.nodes.resize(total * m);
  d.psi.resize(total);
  d.weights.assign(total, cell);
  d.values.assign(total, 1.0);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t q = i;
    double* xi = d.nodes.data() + i * m;
    for (int k = m - 1; k >= 0; --k) {
      xi[k] = box[k].first + (double(q % samples[k]) + 0.5) * d.spacing[k];
      q /= samples[k];
    }
    if (s.kind == SurfaceKind::hemisphere) {
      double r2 = 0;
      for (int k = 0; k < m; ++k) r2 += xi[k] * xi[k];
      if (r2 >= 1) throw precondition_error("density: hemisphere node outside the unit ball");
    }
    d.psi[i] = s.psi(xi);
    if (f) d.values[i] = f(xi);
  }
  return d;
}

Density make_density(const Hypersurface& s, const std::vector<std::size_t>& samples, const DensityFn& f) {
  return make_density_on(s, s.domain, samples, f);
}

double phase_step(const Density& d, const Point& x) {
  const int m = d.param_dim();
  if (int(x.size()) != m + 1) throw precondition_error("phase: point dimension mismatch");
  double worst = 0;
  for (int k = 0; k < m; ++k)
    worst = std::max(worst, (std::abs(x[k]) + std::abs(x[m]) * d.surface.gradient_bound[k]) * d.spacing[k]);
  return worst;
}

void check_phase_resolution(const Density& d, const Point& x) {
  double step = phase_step(d, x);
  if (!(step <= 0.25))
    throw precondition_error("phase resolution guard failed: step " + std::to_string(step) + " turns > 1/4");
}

cplx measure_ft(const Density& weight, const Point& x) {
  check_phase_resolution(weight, x);
  return detail::blocked_sum(weight.size(), [&](std::size_t j) {
    return weight.weights[j] * weight.values[j] * cis_turns(-detail::node_phase(weight, j, x.data()));
  });
}

cplx measure_ft(const Hypersurface& s, const Point& x, std::size_t samples_per_axis) {
  return measure_ft(make_density(s, std::vector<std::size_t>(s.param_dim(), samples_per_axis)), x);
}

namespace serial {
cplx measure_ft(const Density& weight, const Point& x) {
  check_phase_resolution(weight, x);
  return detail::phase_sum(weight, x.data(), -1);
}
}  // namespace serial

std::vector<cplx> radial_measure_ft(int ambient_dim, const std::function<double(double)>& w,
                                    const std::vector<double>& r, const std::vector<double>& xn,
                                    std::size_t nodes) {
  if (ambient_dim != 2 && ambient_dim != 3) throw precondition_error("radial measure: ambient dimension 2 or 3");
  if (nodes == 0) throw precondition_error("radial measure: no nodes");
  const double h = 1.0 / double(nodes);
  double rmax = 0, xmax = 0;
  for (double v : r) rmax = std::max(rmax, std::abs(v));
  for (double v : xn) xmax = std::max(xmax, std::abs(v));
  if ((rmax + 2 * xmax) * h > 0.25) throw precondition_error("phase resolution guard failed for radial quadrature");
  std::vector<double> rho(nodes), wr(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    rho[j] = (double(j) + 0.5) * h;
    // Pullback measure in polar form: 2 pi rho drho (n=3) or the two signs of xi (n=2).
    wr[j] = w(rho[j]) * h * (ambient_dim == 3 ? kTwoPi * rho[j] : 2.0);
  }
  const std::size_t nr = r.size(), nx = xn.size();
  std::vector<double> kern(nr * nodes);
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t j = 0; j < nodes; ++j)
      kern[a * nodes + j] = wr[j] * (ambient_dim == 3 ? std::cyl_bessel_j(0.0, kTwoPi * r[a] * rho[j])
                                                      : std::cos(kTwoPi * r[a] * rho[j]));
  std::vector<cplx> out(nr * nx);
  const long long total = (long long)nx;
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < total; ++b) {
    std::vector<cplx> e(nodes);
    for (std::size_t j = 0; j < nodes; ++j) e[j] = cis_turns(-xn[b] * rho[j] * rho[j]);
    for (std::size_t a = 0; a < nr; ++a) {
      cplx acc = 0;
      const double* kr = kern.data() + a * nodes;
      for (std::size_t j = 0; j < nodes; ++j) acc += kr[j] * e[j];
      out[a * nx + std::size_t(b)] = acc;
    }
  }
  return out;
}

}  // namespace rlab
