#pragma once

#include <cstdint>
#include <vector>

#include "rlab/spectral.hpp"

namespace rlab {

struct OrientedBox {
  Point center;
  std::vector<double> axes;  // n x n row-major; column k is axis k
  std::vector<double> half_lengths;

  int dim() const { return int(center.size()); }
  Point axis(int k) const;
  double side(int k) const { return 2 * half_lengths[k]; }
  double volume() const;
  bool contains(const Point& x) const;
  // Coordinates of x - center in the box frame.
  Point local(const Point& x) const;
};

OrientedBox make_box(const Point& center, const std::vector<double>& sides);  // axis-aligned
OrientedBox make_box(const Point& center, const std::vector<double>& axes, const std::vector<double>& sides);
// 2-D box with its first axis at angle theta.
OrientedBox make_box_2d(const Point& center, double theta, double side0, double side1);
void validate(const OrientedBox& b);

// Same axes, centre 0, reciprocal side lengths.
OrientedBox dual_box(const OrientedBox& b);

// Packets for an axis-aligned frequency box B on the torus of `grid`:
// W_T has transform |T|^{1/2} eta(xi) exp(-2 pi i u_T . xi), eta = 1 on B and 0
// outside 2B, and the tiles T (sides 1/(2 side_k(B))) tile the grid box.
struct PacketFamily {
  OrientedBox base;
  Grid grid;                          // spatial torus
  Grid freq;                          // its frequency grid
  std::vector<std::size_t> per_axis;  // tiles per axis
  std::vector<double> tile_side;
  std::vector<OrientedBox> tiles;     // row-major over per_axis
  double amplitude = 0.0;             // |T|^{1/2}
  std::vector<std::size_t> support;   // frequency bins inside 2B
  std::vector<double> window;         // eta on those bins

  std::size_t size() const { return tiles.size(); }
};

PacketFamily packet_family(const OrientedBox& B, const Grid& grid);

// eta on the whole frequency grid.
SampledField packet_window(const PacketFamily& fam);
// W_T on the spatial grid.
SampledField packet(const PacketFamily& fam, std::size_t t);

struct PacketTransform {
  std::vector<cplx> coefficients;  // w_T = <F, W_T>
  SampledField reconstruction;     // sum_T w_T W_T
  double defect = 0.0;             // relative L^2 error of the reconstruction
  double energy_ratio = 0.0;       // sum |w_T|^2 / ||F||^2
  double band_leakage = 0.0;       // relative transform mass of F outside B
};

// Throws unless the transform of F has relative L^2 mass <= 1e-8 outside B.
PacketTransform packet_transform(const SampledField& F, const PacketFamily& fam);

// Relative L^2 transform mass outside the closed frequency box.
double band_leakage(const SampledField& F, const OrientedBox& B);

struct Overlap {
  double volume = 0.0;
  double angle = 0.0;  // between the long axes, in [0, pi/2]
  bool transverse = true;
  std::size_t samples = 0;
  std::size_t hits = 0;
};

// Monte Carlo volume of T1 n T2 from uniform samples in T1.
Overlap overlap_volume(const OrientedBox& t1, const OrientedBox& t2, std::size_t samples = 200000,
                       std::uint64_t seed = 0);

// csc(angle) * (short sides of T1) * (shortest side of T2)
double overlap_bound(const OrientedBox& t1, const OrientedBox& t2, double angle);

namespace serial {
PacketTransform packet_transform(const SampledField& F, const PacketFamily& fam);
}

}  // namespace rlab
