#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rlab {

using cplx = std::complex<double>;
using Box = std::vector<std::pair<double, double>>;
using Point = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Uniform grid; sample j on axis k sits at lo_k + j * h_k (left endpoints).
struct Grid {
  Box box;
  std::vector<std::size_t> samples;
  std::vector<double> spacing;

  int dim() const { return static_cast<int>(box.size()); }
  std::size_t cell_count() const;
  double cell_volume() const;
  double coord(int axis, std::size_t j) const { return box[axis].first + double(j) * spacing[axis]; }
  // Row-major: the last axis varies fastest.
  std::vector<std::size_t> strides() const;
  void point(std::size_t flat, double* out) const;
  Point point(std::size_t flat) const;
};

Grid make_grid(const Box& box, const std::vector<std::size_t>& samples);

// Grid of the conjugate variable: spacing 1/(N h), centred at the origin.
Grid reciprocal_grid(const Grid& g);

struct SampledField {
  Grid grid;
  std::vector<cplx> values;
  // Grid the next transform maps onto; set by transform() so a round trip
  // lands back on the original box.
  std::optional<Grid> conjugate;

  SampledField() = default;
  explicit SampledField(Grid g) : grid(std::move(g)), values(grid.cell_count()) {}
  SampledField(Grid g, std::vector<cplx> v);

  void validate() const;
};

enum class Direction { forward, inverse };

// Riemann-sum transform: out(y_k) = prod(h) * sum_j f(x_j) exp(-+2 pi i x_j . y_k).
SampledField transform(const SampledField& field, Direction dir);

// Same sums onto an explicit target grid; requires N_k h_k h'_k = 1 per axis.
SampledField transform_to(const SampledField& field, const Grid& target, Direction dir);

// L^p norm with grid weights; p = infinity gives the max modulus. p in (0,1)
// returns the quasi-norm (sum |f|^p h)^(1/p).
double lp_norm(const SampledField& field, double p);
double lp_norm(const std::vector<cplx>& values, double cell_volume, double p);
inline bool is_quasi_norm(double p) { return p > 0.0 && p < 1.0; }

double bump_profile(double t);
// 1 on [0, inner], 0 on [outer, inf), smooth in between.
double plateau_profile(double r, double inner, double outer);

SampledField make_bump(const Grid& grid, const Point& center, double radius);

struct Majorant {
  SampledField field;
  double min_on_square;    // min of eta over [-R,R]^2 grid points
  double leakage;          // relative transform mass outside B(0,1/R)
  double row_sup_integral; // int sup_{x1} eta(x1,x2)^2 dx2
  double row_constant;     // row_sup_integral / R
};

// Band-limited majorant of the indicator of [-R,R]^2 on a 2-D grid.
Majorant make_majorant(double R, const Grid& grid);

struct SlopeFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  int point_count = 0;
};

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

namespace serial {
// Separable direct summation, no FFT, no threads.
SampledField transform(const SampledField& field, Direction dir);
}  // namespace serial

}  // namespace rlab
