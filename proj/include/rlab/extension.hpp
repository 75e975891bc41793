#pragma once

#include <vector>

#include "rlab/spectral.hpp"
#include "rlab/surface.hpp"

namespace rlab {

using EvalSet = std::vector<Point>;

// E f(x) = int_U f(xi) exp(2 pi i (x'.xi + x_n psi(xi))) dxi, one value per point.
std::vector<cplx> extend(const Density& f, const EvalSet& points);

// Curves only: E f on a 2-D grid, one FFT per x_2 row. The grid's x_1 spacing
// must satisfy M * h * dx_1 = 1 for a power of two M >= node count.
SampledField extend_on_grid(const Density& f, const Grid& xgrid);

// Fourier transform of the field evaluated at (xi, psi(xi)) on the density's
// midpoint nodes, by direct summation over the field's grid.
Density restrict_field(const SampledField& field, const Hypersurface& s, const std::vector<std::size_t>& samples);
Density restrict_field(const SampledField& field, const Density& nodes_from);

// Relative defect between <g, E f> and <R g, f>.
double adjoint_defect(const SampledField& g, const Density& f);
// f_ext drives E, f_res is paired with R g; both sample the same function.
double adjoint_defect(const SampledField& g, const Density& f_ext, const Density& f_res);

// Max relative defect of |E_Omega f(x', x_n)| = D^{n-1} |E_{L(Omega)} f_L(D(x' + 2 x_n xi0), D^2 x_n)|
// for the paraboloid, with f_L realized on the image nodes of L(xi) = (xi - xi0)/D.
double rescale_defect(const Density& f, const Box& omega, const Point& xi0, double D, const EvalSet& points);
// Variant with an independent midpoint grid on L(Omega), resampled from fn.
double rescale_defect(const Hypersurface& s, const DensityFn& fn, const Box& omega, const Point& xi0, double D,
                      const EvalSet& points, const std::vector<std::size_t>& samples_omega,
                      const std::vector<std::size_t>& samples_image);

namespace serial {
std::vector<cplx> extend(const Density& f, const EvalSet& points);
Density restrict_field(const SampledField& field, const Density& nodes_from);
}  // namespace serial

}  // namespace rlab
