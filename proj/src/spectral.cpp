#include "rlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fft.hpp"

namespace rlab {

using detail::cis_turns;
using detail::frac_product;

std::size_t Grid::cell_count() const {
  std::size_t n = 1;
  for (auto s : samples) n *= s;
  return n;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double h : spacing) v *= h;
  return v;
}

std::vector<std::size_t> Grid::strides() const {
  std::vector<std::size_t> s(samples.size(), 1);
  for (int k = dim() - 2; k >= 0; --k) s[k] = s[k + 1] * samples[k + 1];
  return s;
}

void Grid::point(std::size_t flat, double* out) const {
  for (int k = dim() - 1; k >= 0; --k) {
    std::size_t j = flat % samples[k];
    flat /= samples[k];
    out[k] = coord(k, j);
  }
}

Point Grid::point(std::size_t flat) const {
  Point p(dim());
  point(flat, p.data());
  return p;
}

Grid make_grid(const Box& box, const std::vector<std::size_t>& samples) {
  if (box.empty() || box.size() != samples.size())
    throw precondition_error("grid: box and sample lists must be non-empty and of equal length");
  Grid g;
  g.box = box;
  g.samples = samples;
  for (std::size_t k = 0; k < box.size(); ++k) {
    auto [lo, hi] = box[k];
    if (!(lo < hi)) throw precondition_error("grid: degenerate box on axis " + std::to_string(k));
    if (samples[k] < 2 || !detail::is_pow2(samples[k]))
      throw precondition_error("grid: samples must be a power of two >= 2 on axis " + std::to_string(k));
    g.spacing.push_back((hi - lo) / double(samples[k]));
  }
  return g;
}

Grid reciprocal_grid(const Grid& g) {
  Box box;
  for (int k = 0; k < g.dim(); ++k) {
    double len = g.box[k].second - g.box[k].first;
    double half = double(g.samples[k]) / (2.0 * len);
    box.emplace_back(-half, half);
  }
  return make_grid(box, g.samples);
}

SampledField::SampledField(Grid g, std::vector<cplx> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.cell_count()) throw precondition_error("field: value count does not match grid");
}

void SampledField::validate() const {
  if (values.size() != grid.cell_count()) throw precondition_error("field: value count does not match grid");
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw precondition_error("field: non-finite value");
}

namespace {

void check_conjugate(const Grid& in, const Grid& out) {
  if (in.dim() != out.dim()) throw precondition_error("transform: dimension mismatch");
  for (int k = 0; k < in.dim(); ++k) {
    if (in.samples[k] != out.samples[k]) throw precondition_error("transform: sample counts differ");
    double prod = double(in.samples[k]) * in.spacing[k] * out.spacing[k];
    if (std::abs(prod - 1.0) > 1e-9) throw precondition_error("transform: grids are not reciprocal");
  }
}

struct AxisFactors {
  std::vector<cplx> pre;   // exp(s 2pi i j h_in lo_out)
  std::vector<cplx> post;  // h_in exp(s 2pi i lo_in y_m)
};

AxisFactors axis_factors(const Grid& in, const Grid& out, int axis, int sign) {
  const std::size_t n = in.samples[axis];
  const double h = in.spacing[axis];
  const double lo_in = in.box[axis].first;
  const double lo_out = out.box[axis].first;
  AxisFactors f;
  f.pre.resize(n);
  f.post.resize(n);
  const double h_out = out.spacing[axis], base = frac_product(lo_in, lo_out);
  for (std::size_t j = 0; j < n; ++j) {
    f.pre[j] = cis_turns(sign * frac_product(double(j), h, lo_out));
    f.post[j] = h * cis_turns(sign * (base + frac_product(double(j), lo_in, h_out)));
  }
  return f;
}

template <class LineOp>
void for_each_line(const Grid& g, int axis, bool parallel, LineOp&& op) {
  const auto strides = g.strides();
  const std::size_t n = g.samples[axis];
  const std::size_t inner = strides[axis];
  const std::size_t lines = g.cell_count() / n;
  const long long total = static_cast<long long>(lines);
#pragma omp parallel if (parallel)
  {
    std::vector<cplx> buf(n);
#pragma omp for schedule(static)
    for (long long li = 0; li < total; ++li) {
      std::size_t outer = std::size_t(li) / inner;
      std::size_t in = std::size_t(li) % inner;
      std::size_t base = outer * n * inner + in;
      op(base, inner, buf);
    }
  }
}

SampledField transform_impl(const SampledField& field, const Grid& target, Direction dir, bool parallel) {
  field.validate();
  check_conjugate(field.grid, target);
  const int sign = dir == Direction::forward ? -1 : 1;
  SampledField out;
  out.grid = target;
  out.values = field.values;
  out.conjugate = field.grid;
  for (int axis = 0; axis < field.grid.dim(); ++axis) {
    const std::size_t n = field.grid.samples[axis];
    const auto fac = axis_factors(field.grid, target, axis, sign);
    const detail::Radix2 fft(n, sign);
    for_each_line(field.grid, axis, parallel, [&](std::size_t base, std::size_t stride, std::vector<cplx>& buf) {
      for (std::size_t j = 0; j < n; ++j) buf[j] = out.values[base + j * stride] * fac.pre[j];
      fft(buf.data());
      for (std::size_t m = 0; m < n; ++m) out.values[base + m * stride] = buf[m] * fac.post[m];
    });
  }
  return out;
}

}  // namespace

SampledField transform_to(const SampledField& field, const Grid& target, Direction dir) {
  return transform_impl(field, target, dir, true);
}

SampledField transform(const SampledField& field, Direction dir) {
  Grid target = field.conjugate ? *field.conjugate : reciprocal_grid(field.grid);
  return transform_impl(field, target, dir, true);
}

namespace serial {

SampledField transform(const SampledField& field, Direction dir) {
  field.validate();
  Grid target = field.conjugate ? *field.conjugate : reciprocal_grid(field.grid);
  check_conjugate(field.grid, target);
  const int sign = dir == Direction::forward ? -1 : 1;
  SampledField out;
  out.grid = target;
  out.values = field.values;
  out.conjugate = field.grid;
  const auto strides = field.grid.strides();
  std::vector<cplx> line;
  for (int axis = 0; axis < field.grid.dim(); ++axis) {
    const std::size_t n = field.grid.samples[axis];
    const std::size_t inner = strides[axis];
    const double h = field.grid.spacing[axis];
    line.resize(n);
    for (std::size_t li = 0; li < field.grid.cell_count() / n; ++li) {
      std::size_t base = (li / inner) * n * inner + li % inner;
      for (std::size_t m = 0; m < n; ++m) {
        cplx acc = 0.0;
        double y = target.coord(axis, m);
        for (std::size_t j = 0; j < n; ++j)
          acc += out.values[base + j * inner] * cis_turns(sign * frac_product(field.grid.coord(axis, j), y));
        line[m] = h * acc;
      }
      for (std::size_t m = 0; m < n; ++m) out.values[base + m * inner] = line[m];
    }
  }
  return out;
}

}  // namespace serial

double lp_norm(const std::vector<cplx>& values, double cell_volume, double p) {
  if (!(p > 0.0)) throw precondition_error("lp_norm: p must be positive");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }
  long double acc = 0.0L;
  if (p == 2.0) {
    for (const auto& v : values) acc += std::norm(v);
    return std::sqrt(double(acc) * cell_volume);
  }
  for (const auto& v : values) acc += std::pow(std::abs(v), p);
  return std::pow(double(acc) * cell_volume, 1.0 / p);
}

double lp_norm(const SampledField& field, double p) {
  return lp_norm(field.values, field.grid.cell_volume(), p);
}

double bump_profile(double t) {
  double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - a * a));
}

double plateau_profile(double r, double inner, double outer) {
  double s = (r - inner) / (outer - inner);
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  double a = std::exp(-1.0 / (1.0 - s));
  double b = std::exp(-1.0 / s);
  return a / (a + b);
}

SampledField make_bump(const Grid& grid, const Point& center, double radius) {
  if (!(radius > 0.0)) throw precondition_error("bump: radius must be positive");
  if (int(center.size()) != grid.dim()) throw precondition_error("bump: center dimension mismatch");
  double d2 = 0.0;
  for (int k = 0; k < grid.dim(); ++k) {
    double lo = grid.box[k].first, hi = grid.box[k].second;
    double c = std::clamp(center[k], lo, hi);
    d2 += (c - center[k]) * (c - center[k]);
  }
  if (d2 >= radius * radius) throw precondition_error("bump: ball does not meet the grid box");
  SampledField f(grid);
  std::vector<double> x(grid.dim());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    grid.point(i, x.data());
    double r2 = 0.0;
    for (int k = 0; k < grid.dim(); ++k) r2 += (x[k] - center[k]) * (x[k] - center[k]);
    f.values[i] = bump_profile(std::sqrt(r2) / radius);
  }
  return f;
}

Majorant make_majorant(double R, const Grid& grid) {
  if (!(R > 0.0)) throw precondition_error("majorant: R must be positive");
  if (grid.dim() != 2) throw precondition_error("majorant: grid must be two-dimensional");
  for (int k = 0; k < 2; ++k)
    if (grid.box[k].first > -2.0 * R || grid.box[k].second < 2.0 * R)
      throw precondition_error("majorant: grid box must contain [-2R,2R]^2");
  const Grid freq = reciprocal_grid(grid);
  // Kernel on [-r/2, r/2]^2 with r = 1/(sqrt(2) R): its autocorrelation lives in
  // [-r, r]^2, inside B(0, 1/R).
  const double r = 1.0 / (std::sqrt(2.0) * R);
  for (int k = 0; k < 2; ++k) {
    if (freq.spacing[k] > r / 16.0) throw precondition_error("majorant: grid too small to resolve the 1/R band");
    if (freq.box[k].second <= 2.0 * r) throw precondition_error("majorant: grid too coarse for the 1/R band");
  }
  SampledField a(freq);
  a.conjugate = grid;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    auto xi = freq.point(i);
    a.values[i] = bump_profile(2.0 * xi[0] / r) * bump_profile(2.0 * xi[1] / r);
  }
  SampledField spatial = transform(a, Direction::inverse);
  Majorant m;
  m.field = SampledField(grid);
  double min_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spatial.values.size(); ++i) {
    double v = std::norm(spatial.values[i]);
    m.field.values[i] = v;
    auto x = grid.point(i);
    if (std::abs(x[0]) <= R && std::abs(x[1]) <= R) min_sq = std::min(min_sq, v);
  }
  if (!(min_sq > 0.0)) throw precondition_error("majorant: kernel transform vanishes on the square");
  for (auto& v : m.field.values) v /= min_sq;
  m.min_on_square = 1.0;
  for (std::size_t i = 0; i < m.field.values.size(); ++i) {
    auto x = grid.point(i);
    if (std::abs(x[0]) <= R && std::abs(x[1]) <= R) m.min_on_square = std::min(m.min_on_square, m.field.values[i].real());
  }

  SampledField hat = transform(m.field, Direction::forward);
  long double total = 0.0L, outside = 0.0L;
  for (std::size_t i = 0; i < hat.values.size(); ++i) {
    auto xi = hat.grid.point(i);
    double w = std::norm(hat.values[i]);
    total += w;
    if (std::hypot(xi[0], xi[1]) > 1.0 / R) outside += w;
  }
  m.leakage = total > 0 ? std::sqrt(double(outside / total)) : 0.0;

  const std::size_t n0 = grid.samples[0], n1 = grid.samples[1];
  long double integral = 0.0L;
  for (std::size_t j = 0; j < n1; ++j) {
    double sup = 0.0;
    for (std::size_t i = 0; i < n0; ++i) sup = std::max(sup, m.field.values[i * n1 + j].real());
    integral += sup * sup;
  }
  m.row_sup_integral = double(integral) * grid.spacing[1];
  m.row_constant = m.row_sup_integral / R;
  return m;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw precondition_error("fit_slope: need at least two points");
  double sx = 0, sy = 0;
  for (auto [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw precondition_error("fit_slope: coordinates must be positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double n = double(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (auto [x, y] : points) {
    double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (sxx == 0.0) throw precondition_error("fit_slope: abscissae must not all coincide");
  SlopeFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double rss = 0;
  for (auto [x, y] : points) {
    double e = std::log(y) - fit.intercept - fit.exponent * std::log(x);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss);
  fit.point_count = int(points.size());
  return fit;
}

}  // namespace rlab
