#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rlab/spectral.hpp"

namespace rlab {

enum class SurfaceKind { paraboloid, hemisphere, polynomial_curve, affine };

// Graph {(xi, psi(xi)) : xi in U} in R^n, U a box in R^{n-1}.
struct Hypersurface {
  int ambient_dim = 2;
  Box domain;
  SurfaceKind kind = SurfaceKind::paraboloid;
  int sign = 1;                      // hemisphere: +sqrt or -sqrt
  std::vector<double> coefficients;  // polynomial curve: sum c_i xi^i
  std::vector<double> slope;         // affine gradient
  double offset = 0.0;               // affine offset
  double smoothness_bound = 0.0;     // sup over U of max(|psi|, |grad|, |hess|)
  std::vector<double> gradient_bound;  // sup over U of |d_k psi|, per axis

  int param_dim() const { return ambient_dim - 1; }
  bool contains(const double* xi, double slack = 1e-12) const;
  double psi(const double* xi) const;
};

Hypersurface make_paraboloid(int ambient_dim, const Box& domain);
Hypersurface make_hemisphere(int ambient_dim, const Box& domain, int sign = 1);
Hypersurface make_polynomial_curve(const std::vector<double>& coefficients, std::pair<double, double> domain);
Hypersurface make_affine(const std::vector<double>& slope, double offset, const Box& domain);

struct SurfacePoint {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;  // row-major (n-1) x (n-1)
};

SurfacePoint surface_eval(const Hypersurface& s, const Point& xi);
double gaussian_curvature(const Hypersurface& s, const Point& xi);
Point unit_normal(const Hypersurface& s, const Point& xi);

double determinant(std::vector<double> m, int n);

// |det| of the matrix whose columns are the unit normals at the given points.
double transversality(const std::vector<std::pair<const Hypersurface*, Point>>& points);
// Minimum over all tuples drawn from per-patch midpoint sample grids.
double transversality_min(const std::vector<const Hypersurface*>& patches, std::size_t samples_per_axis);

// Samples of a function on a box inside U at midpoint nodes, with midpoint weights.
struct Density {
  Hypersurface surface;
  Box box;
  std::vector<std::size_t> samples;
  std::vector<double> spacing;
  std::vector<double> nodes;  // flat, param_dim entries per node
  std::vector<double> psi;    // psi at each node
  std::vector<double> weights;
  std::vector<cplx> values;

  int param_dim() const { return surface.param_dim(); }
  std::size_t size() const { return weights.size(); }
  const double* node(std::size_t i) const { return nodes.data() + i * param_dim(); }
  double measure() const;
};

using DensityFn = std::function<cplx(const double*)>;

Density make_density(const Hypersurface& s, const std::vector<std::size_t>& samples, const DensityFn& f = {});
Density make_density_on(const Hypersurface& s, const Box& box, const std::vector<std::size_t>& samples,
                        const DensityFn& f = {});

// Largest phase change per quadrature cell for the oscillation at x, in turns.
double phase_step(const Density& d, const Point& x);
// Throws unless phase_step(d, x) <= 1/4.
void check_phase_resolution(const Density& d, const Point& x);

// int_U exp(-2 pi i (x'.xi + x_n psi(xi))) w(xi) dxi by midpoint quadrature.
cplx measure_ft(const Density& weight, const Point& x);
cplx measure_ft(const Hypersurface& s, const Point& x, std::size_t samples_per_axis);

// Radial paraboloid only: the same integral for weight w(|xi|) on the unit
// ball, reduced to a Bessel transform, evaluated on a tensor grid of (r, x_n).
std::vector<cplx> radial_measure_ft(int ambient_dim, const std::function<double(double)>& w,
                                    const std::vector<double>& r, const std::vector<double>& xn,
                                    std::size_t nodes);

namespace serial {
cplx measure_ft(const Density& weight, const Point& x);
}

}  // namespace rlab
