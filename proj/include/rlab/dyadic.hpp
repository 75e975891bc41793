#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlab/spectral.hpp"

namespace rlab {

// prod_j [corner_j 2^level, (corner_j + 1) 2^level]
struct DyadicCube {
  int level = 0;
  std::vector<std::int64_t> corner;

  int dim() const { return int(corner.size()); }
  double side() const;
  Box box() const;
  Point center() const;
  DyadicCube parent() const;
  bool contains(const DyadicCube& other) const;  // other inside this (or equal)
  auto operator<=>(const DyadicCube&) const = default;
};

// Euclidean distance between two cubes; exact up to the final square root.
double cube_distance(const DyadicCube& a, const DyadicCube& b);

using DistanceOracle = std::function<double(const Point&)>;

struct WhitneyDecomposition {
  std::vector<DyadicCube> cubes;      // sorted by level, then corner
  std::vector<DyadicCube> truncated;  // level-k_min cubes left unresolved near S
  int k_min = 0;
  int top_level = 0;
  // Union of cubes and truncated cubes is the box; the truncated cubes lie in
  // {x : d(x,S) < uncovered_radius}.
  double uncovered_radius = 0.0;
};

// A cube is emitted once d(centre, S) >= (4 + sqrt(m)/2) l, which gives
// 4 l <= d(cube, S) <= (8 + 1.5 sqrt(m)) l for every cube below the top level.
WhitneyDecomposition whitney_decompose(const DistanceOracle& dist, const Box& box, int k_min);

// Integer checks: pairwise disjoint interiors and exact volume coverage of the box.
bool cubes_disjoint(const std::vector<DyadicCube>& cubes);
bool covers_box(const WhitneyDecomposition& w, const Box& box);

struct CubePair {
  DyadicCube first, second;
  int level() const { return first.level; }
  DyadicCube joint() const;  // the cube in R^{2m}
};

struct DiagonalDecomposition {
  std::vector<CubePair> pairs;
  WhitneyDecomposition whitney;
};

// Whitney decomposition of [-1,1]^{2m} with respect to {(x, x)}, split into pairs.
DiagonalDecomposition diagonal_decompose(int m, int k_min);

struct Interval {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

double interval_distance(const Interval& a, const Interval& b);

// N_I(sigma) = {(xi, xi^2 + t) : xi in I, |t| <= sigma}
struct ParabolicCap {
  Interval interval;
  double sigma = 0.0;
};

// Largest distance from (c, c^2), c the midpoint, to a point of the cap.
double cap_enclosing_radius(const ParabolicCap& cap);

// Which hypotheses of the diagonal cap statement the configuration meets.
struct CapHypotheses {
  bool part_i = false;        // I1 = I1', d(I2, I2') >= N delta
  bool part_ii_both = false;  // d(I1, I1') >= N delta and d(I2, I2') >= N delta
  bool part_ii_max = false;   // max of the two distances >= N delta
  bool mutual = false;        // all four intervals pairwise >= N delta apart
  std::string label() const;
};

struct CapSeparation {
  bool disjoint = false;
  std::optional<Point> witness;  // (u, v) in both difference sets
  double min_gap = 0.0;          // min over u of |u| dist(J_1(u), J_2(u)); intersect iff <= 2 delta^2
  CapHypotheses hypotheses;
  std::size_t mc_samples = 0;
  std::optional<Point> mc_witness;  // sampled point of the first set lying in the second
  bool agrees = true;               // analytic verdict consistent with sampling
};

// (N_{I1}(d^2) - N_{I1'}(d^2)) against (N_{I2}(d^2) - N_{I2'}(d^2)).
CapSeparation cap_separation_test(const Interval& i1, const Interval& i1p, const Interval& i2, const Interval& i2p,
                                  double delta, double N, std::size_t samples, std::uint64_t seed = 0);

// Exact membership of (u, v) in N_I(sigma) - N_J(sigma).
bool in_cap_difference(const Interval& i, const Interval& j, double sigma, const Point& p);

struct IntervalPartition {
  std::vector<Interval> intervals;
  std::vector<std::vector<std::size_t>> families;  // N + 1 index lists
  bool last_shortened = false;
};

IntervalPartition partition_interval(const Interval& J, double delta, int N);

// Fourier projection onto the cap: keep frequency bins whose centres satisfy
// a <= xi < a + delta and |eta - xi^2| <= sigma.
SampledField cap_project(const SampledField& field, const ParabolicCap& cap);
// Mask only, on the field's frequency grid.
std::vector<char> cap_mask(const Grid& freq, const ParabolicCap& cap);

namespace serial {
WhitneyDecomposition whitney_decompose(const DistanceOracle& dist, const Box& box, int k_min);
}

}  // namespace rlab
