#include "rlab/extension.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "fft.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace rlab {

using detail::cis_turns;

namespace {

void check_points(const Density& f, const EvalSet& points) {
  if (points.empty()) throw precondition_error("extend: empty point set");
  for (const auto& x : points) {
    if (int(x.size()) != f.surface.ambient_dim) throw precondition_error("extend: point dimension mismatch");
    for (double v : x)
      if (!std::isfinite(v)) throw precondition_error("extend: non-finite point");
    check_phase_resolution(f, x);
  }
}

bool in_box(const Box& box, const double* xi) {
  for (std::size_t k = 0; k < box.size(); ++k)
    if (xi[k] < box[k].first || xi[k] > box[k].second) return false;
  return true;
}

double relative_gap(cplx a, cplx b) { return std::abs(a - b) / (std::abs(a) + std::abs(b) + DBL_MIN); }

// Boundary cells of the field must be negligible against its peak.
void check_boundary_decay(const SampledField& field) {
  const Grid& g = field.grid;
  const auto strides = g.strides();
  double peak = 0, edge = 0;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double a = std::abs(field.values[i]);
    peak = std::max(peak, a);
    for (int k = 0; k < g.dim(); ++k) {
      const std::size_t j = (i / strides[k]) % g.samples[k];
      if (j == 0 || j + 1 == g.samples[k]) {
        edge = std::max(edge, a);
        break;
      }
    }
  }
  if (edge > 1e-8 * peak) throw precondition_error("restrict: field does not decay at the box boundary");
}

// Frequencies must stay inside the Nyquist box of the field grid.
void check_nyquist(const SampledField& field, const Density& nodes) {
  const int m = nodes.param_dim();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double* xi = nodes.node(j);
    for (int k = 0; k <= m; ++k) {
      const double y = k < m ? xi[k] : nodes.psi[j];
      if (std::abs(y) * field.grid.spacing[k] > 0.5)
        throw precondition_error("restrict: surface frequency beyond the grid's Nyquist limit");
    }
  }
}

void check_restrict(const SampledField& field, const Density& nodes) {
  field.validate();
  if (field.grid.dim() != nodes.surface.ambient_dim) throw precondition_error("restrict: dimension mismatch");
  check_boundary_decay(field);
  check_nyquist(field, nodes);
}

cplx field_sum(const SampledField& field, const Density& d, std::size_t j, std::vector<double>& x) {
  const Grid& g = field.grid;
  const int m = d.param_dim();
  const double* xi = d.node(j);
  cplx acc = 0;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    g.point(i, x.data());
    double ph = x[m] * d.psi[j];
    for (int k = 0; k < m; ++k) ph += x[k] * xi[k];
    acc += field.values[i] * cis_turns(-ph);
  }
  return g.cell_volume() * acc;
}

Density restrict_impl(const SampledField& field, const Density& nodes_from, bool parallel) {
  check_restrict(field, nodes_from);
  Density out = nodes_from;
  const long long total = (long long)out.size();
#pragma omp parallel if (parallel)
  {
    std::vector<double> x(field.grid.dim());
#pragma omp for schedule(static)
    for (long long j = 0; j < total; ++j) out.values[j] = field_sum(field, nodes_from, std::size_t(j), x);
  }
  return out;
}

cplx pairing_field(const SampledField& g, const std::vector<cplx>& ef) {
  return g.grid.cell_volume() *
         detail::blocked_sum(ef.size(), [&](std::size_t i) { return g.values[i] * std::conj(ef[i]); });
}

cplx pairing_density(const Density& rg, const Density& f) {
  return detail::blocked_sum(f.size(), [&](std::size_t j) { return f.weights[j] * rg.values[j] * std::conj(f.values[j]); });
}

EvalSet grid_points(const Grid& g) {
  EvalSet pts(g.cell_count());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = g.point(i);
  return pts;
}

// f_L on the image nodes of L(xi) = (xi - xi0)/D; same values, weights scaled by D^-m.
Density rescaled_density(const Density& f, const Box& omega, const Point& xi0, double D) {
  const int m = f.param_dim();
  Density out;
  Box image;
  for (int k = 0; k < m; ++k) image.emplace_back((omega[k].first - xi0[k]) / D, (omega[k].second - xi0[k]) / D);
  out.surface = make_paraboloid(m + 1, image);
  out.box = image;
  out.samples = f.samples;
  for (double h : f.spacing) out.spacing.push_back(h / D);
  const double scale = std::pow(D, -m);
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double* xi = f.node(j);
    if (!in_box(omega, xi)) continue;
    double r2 = 0;
    for (int k = 0; k < m; ++k) {
      const double eta = (xi[k] - xi0[k]) / D;
      out.nodes.push_back(eta);
      r2 += eta * eta;
    }
    out.psi.push_back(r2);
    out.weights.push_back(f.weights[j] * scale);
    out.values.push_back(f.values[j]);
  }
  return out;
}

Density restricted_to(const Density& f, const Box& omega) {
  const int m = f.param_dim();
  Density out = f;
  out.nodes.clear();
  out.psi.clear();
  out.weights.clear();
  out.values.clear();
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (!in_box(omega, f.node(j))) continue;
    out.nodes.insert(out.nodes.end(), f.node(j), f.node(j) + m);
    out.psi.push_back(f.psi[j]);
    out.weights.push_back(f.weights[j]);
    out.values.push_back(f.values[j]);
  }
  return out;
}

void check_rescale(const Hypersurface& s, const Box& omega, const Point& xi0, double D) {
  const int m = s.param_dim();
  if (s.kind != SurfaceKind::paraboloid) throw precondition_error("rescale: paraboloid only");
  if (!(D > 0)) throw precondition_error("rescale: D must be positive");
  if (int(omega.size()) != m || int(xi0.size()) != m) throw precondition_error("rescale: dimension mismatch");
  for (int k = 0; k < m; ++k) {
    auto [lo, hi] = omega[k];
    if (!(lo < hi) || lo < s.domain[k].first - 1e-12 || hi > s.domain[k].second + 1e-12)
      throw precondition_error("rescale: Omega must lie in U");
    const double a = (lo - xi0[k]) / D, b = (hi - xi0[k]) / D;
    if (a < s.domain[k].first - 1e-12 || b > s.domain[k].second + 1e-12)
      throw precondition_error("rescale: L(Omega) leaves the rescaled domain");
  }
}

Point rescaled_point(const Point& x, const Point& xi0, double D) {
  const int m = int(xi0.size());
  Point y(m + 1);
  for (int k = 0; k < m; ++k) y[k] = D * (x[k] + 2 * x[m] * xi0[k]);
  y[m] = D * D * x[m];
  return y;
}

double rescale_compare(const Density& on_omega, const Density& on_image, const Point& xi0, double D,
                       const EvalSet& points) {
  EvalSet mapped;
  for (const auto& x : points) mapped.push_back(rescaled_point(x, xi0, D));
  auto lhs = extend(on_omega, points);
  auto rhs = extend(on_image, mapped);
  const double scale = std::pow(D, on_omega.param_dim());
  double worst = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    worst = std::max(worst, relative_gap(std::abs(lhs[i]), scale * std::abs(rhs[i])));
  return worst;
}

}  // namespace

std::vector<cplx> extend(const Density& f, const EvalSet& points) {
  check_points(f, points);
  std::vector<cplx> out(points.size());
  const long long total = (long long)points.size();
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < total; ++i) out[i] = detail::phase_sum(f, points[i].data(), 1);
  return out;
}

SampledField extend_on_grid(const Density& f, const Grid& xgrid) {
  if (f.param_dim() != 1 || xgrid.dim() != 2) throw precondition_error("extend_on_grid: curves in R^2 only");
  const double h = f.spacing[0];
  const double turns = 1.0 / (h * xgrid.spacing[0]);
  const std::size_t M = std::size_t(std::llround(turns));
  if (std::abs(turns - double(M)) > 1e-9 * turns || !detail::is_pow2(M) || M < f.size())
    throw precondition_error("extend_on_grid: need 1/(h dx1) a power of two >= node count");
  Point corner{std::max(std::abs(xgrid.box[0].first), std::abs(xgrid.box[0].second)),
               std::max(std::abs(xgrid.box[1].first), std::abs(xgrid.box[1].second))};
  check_phase_resolution(f, corner);

  const std::size_t n1 = xgrid.samples[0], n2 = xgrid.samples[1];
  const double lo1 = xgrid.box[0].first, first = f.box[0].first + 0.5 * h;
  SampledField out(xgrid);
  std::vector<cplx> post(n1), pre(f.size());
  for (std::size_t k = 0; k < n1; ++k) post[k] = cis_turns(xgrid.coord(0, k) * first);
  for (std::size_t j = 0; j < f.size(); ++j) pre[j] = f.weights[j] * f.values[j] * cis_turns(lo1 * double(j) * h);
  detail::Radix2 fft(M, 1);
  const long long rows = (long long)n2;
#pragma omp parallel
  {
    std::vector<cplx> buf(M);
#pragma omp for schedule(static)
    for (long long r = 0; r < rows; ++r) {
      const double x2 = xgrid.coord(1, std::size_t(r));
      std::fill(buf.begin(), buf.end(), cplx(0));
      for (std::size_t j = 0; j < f.size(); ++j) buf[j] = pre[j] * cis_turns(x2 * f.psi[j]);
      fft(buf.data());
      for (std::size_t k = 0; k < n1; ++k) out.values[k * n2 + std::size_t(r)] = post[k] * buf[k % M];
    }
  }
  return out;
}

Density restrict_field(const SampledField& field, const Density& nodes_from) {
  return restrict_impl(field, nodes_from, true);
}

Density restrict_field(const SampledField& field, const Hypersurface& s, const std::vector<std::size_t>& samples) {
  return restrict_field(field, make_density(s, samples));
}

double adjoint_defect(const SampledField& g, const Density& f_ext, const Density& f_res) {
  if (f_ext.surface.ambient_dim != g.grid.dim() || f_res.surface.ambient_dim != g.grid.dim())
    throw precondition_error("adjoint: dimension mismatch");
  const cplx lhs = pairing_field(g, extend(f_ext, grid_points(g.grid)));
  const cplx rhs = pairing_density(restrict_field(g, f_res), f_res);
  return relative_gap(lhs, rhs);
}

double adjoint_defect(const SampledField& g, const Density& f) { return adjoint_defect(g, f, f); }

double rescale_defect(const Density& f, const Box& omega, const Point& xi0, double D, const EvalSet& points) {
  check_rescale(f.surface, omega, xi0, D);
  return rescale_compare(restricted_to(f, omega), rescaled_density(f, omega, xi0, D), xi0, D, points);
}

double rescale_defect(const Hypersurface& s, const DensityFn& fn, const Box& omega, const Point& xi0, double D,
                      const EvalSet& points, const std::vector<std::size_t>& samples_omega,
                      const std::vector<std::size_t>& samples_image) {
  check_rescale(s, omega, xi0, D);
  const int m = s.param_dim();
  Box image;
  for (int k = 0; k < m; ++k) image.emplace_back((omega[k].first - xi0[k]) / D, (omega[k].second - xi0[k]) / D);
  auto on_omega = make_density_on(s, omega, samples_omega, fn);
  auto on_image = make_density_on(s, image, samples_image, [&](const double* eta) {
    Point xi(m);
    for (int k = 0; k < m; ++k) xi[k] = xi0[k] + D * eta[k];
    return fn(xi.data());
  });
  return rescale_compare(on_omega, on_image, xi0, D, points);
}

namespace serial {

std::vector<cplx> extend(const Density& f, const EvalSet& points) {
  check_points(f, points);
  std::vector<cplx> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(detail::phase_sum(f, x.data(), 1));
  return out;
}

Density restrict_field(const SampledField& field, const Density& nodes_from) {
  return restrict_impl(field, nodes_from, false);
}

}  // namespace serial

}  // namespace rlab
