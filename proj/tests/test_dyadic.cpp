#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "rlab/dyadic.hpp"

using namespace rlab;

namespace {

// Exact distance from a closed box to the origin.
double box_to_origin(const Box& b) {
  double s = 0;
  for (auto [lo, hi] : b) {
    double g = lo > 0 ? lo : (hi < 0 ? -hi : 0.0);
    s += g * g;
  }
  return std::sqrt(s);
}

// Exact distance between the diagonal {x = y} and a product of two cubes in R^m x R^m,
// computed independently as sqrt(1/2) min |x - y| over the cube pair.
double pair_separation(const Box& a, const Box& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double g = std::max({0.0, b[k].first - a[k].second, a[k].first - b[k].second});
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace

TEST(DyadicCube, Geometry) {
  DyadicCube c{-2, {3, -1}};
  EXPECT_EQ(c.side(), 0.25);
  EXPECT_EQ(c.box(), (Box{{0.75, 1.0}, {-0.25, 0.0}}));
  EXPECT_EQ(c.parent(), (DyadicCube{-1, {1, -1}}));
  EXPECT_TRUE(c.parent().contains(c));
  EXPECT_FALSE(c.contains(c.parent()));
  EXPECT_EQ(cube_distance(DyadicCube{0, {0}}, DyadicCube{0, {3}}), 2.0);
  EXPECT_EQ(cube_distance(DyadicCube{0, {0, 0}}, DyadicCube{-1, {4, 5}}), std::hypot(1.0, 1.5));
}

TEST(Whitney, PointSetLadder) {
  auto dist = [](const Point& x) { return std::abs(x[0]); };
  auto w = whitney_decompose(dist, {{-1, 1}}, -10);
  ASSERT_FALSE(w.cubes.empty());
  EXPECT_TRUE(cubes_disjoint(w.cubes));
  EXPECT_TRUE(covers_box(w, {{-1, 1}}));
  for (const auto& c : w.cubes) {
    const double d = box_to_origin(c.box()), l = c.side();
    EXPECT_GE(d, 4 * l);
    EXPECT_LE(d, 50 * l);
  }
  // Geometric ladder: a bounded number of cubes per level on each side.
  std::map<int, int> per_level;
  for (const auto& c : w.cubes) ++per_level[c.level];
  for (auto [k, n] : per_level) EXPECT_LE(n, 8) << "level " << k;
  for (const auto& c : w.truncated) EXPECT_LT(box_to_origin(c.box()), w.uncovered_radius);
}

TEST(Whitney, PlanarPointSetInvariants) {
  auto dist = [](const Point& x) { return std::hypot(x[0] - 0.3, x[1] + 0.2); };
  Box box{{-1, 1}, {-1, 1}};
  auto w = whitney_decompose(dist, box, -7);
  EXPECT_TRUE(covers_box(w, box));
  for (const auto& c : w.cubes) {
    Box b = c.box();
    Box shifted{{b[0].first - 0.3, b[0].second - 0.3}, {b[1].first + 0.2, b[1].second + 0.2}};
    const double d = box_to_origin(shifted), l = c.side();
    EXPECT_GE(d, 4 * l);
    EXPECT_LE(d, 50 * l);
  }
  auto s = serial::whitney_decompose(dist, box, -7);
  EXPECT_EQ(s.cubes, w.cubes);
  EXPECT_EQ(s.truncated, w.truncated);
}

TEST(Whitney, SetCoveringBoxGivesNoCubes) {
  auto w = whitney_decompose([](const Point&) { return 0.0; }, {{-1, 1}, {-1, 1}}, -3);
  EXPECT_TRUE(w.cubes.empty());
  EXPECT_TRUE(covers_box(w, {{-1, 1}, {-1, 1}}));
}

TEST(Whitney, Errors) {
  auto dist = [](const Point& x) { return std::abs(x[0]); };
  EXPECT_THROW(whitney_decompose(dist, {{-1, 0.3}}, -2), precondition_error);
  EXPECT_THROW(whitney_decompose(dist, {{1, 1}}, -2), precondition_error);
  EXPECT_THROW(whitney_decompose([](const Point& x) { return 5 * std::abs(x[0]); }, {{-1, 1}}, -4),
               precondition_error);
}

TEST(Whitney, DisjointnessCheckCatchesOverlap) {
  EXPECT_FALSE(cubes_disjoint({DyadicCube{0, {0}}, DyadicCube{-2, {1}}}));
  EXPECT_FALSE(cubes_disjoint({DyadicCube{0, {0}}, DyadicCube{0, {0}}}));
  EXPECT_TRUE(cubes_disjoint({DyadicCube{0, {0}}, DyadicCube{-2, {4}}}));
}

TEST(Whitney, DiagonalPairsSeparated) {
  for (int m : {1, 2}) {
    auto d = diagonal_decompose(m, m == 1 ? -8 : -4);
    Box big(2 * m, {-1.0, 1.0});
    EXPECT_TRUE(covers_box(d.whitney, big));
    ASSERT_FALSE(d.pairs.empty());
    for (const auto& p : d.pairs) {
      const double sep = pair_separation(p.first.box(), p.second.box()), l = p.first.side();
      EXPECT_GE(sep, 4 * l);
      EXPECT_LE(sep, 100 * l);
      EXPECT_EQ(sep, cube_distance(p.first, p.second));
    }
  }
}

TEST(Caps, EnclosingBall) {
  for (double a : {-1.0, -0.3, 0.0, 0.5, 1.0 - 1.0 / 16}) {
    for (double delta : {1.0 / 16, 1.0 / 64}) {
      ParabolicCap cap{{a, a + delta}, delta * delta};
      EXPECT_LE(cap_enclosing_radius(cap), 2 * delta);
    }
  }
}

TEST(Caps, PartOneShapeDisjoint) {
  Interval i1{0, 0.01}, i2{0.5, 0.51}, i2p{0.8, 0.81};
  auto r = cap_separation_test(i1, i1, i2, i2p, 0.01, 10, 100000, 1);
  EXPECT_TRUE(r.disjoint);
  EXPECT_FALSE(r.mc_witness.has_value());
  EXPECT_TRUE(r.agrees);
  EXPECT_TRUE(r.hypotheses.part_i);
}

TEST(Caps, IdenticalIntervalsMeetAtOrigin) {
  Interval i{0.2, 0.25};
  auto r = cap_separation_test(i, i, i, i, 0.05, 10, 1000, 2);
  EXPECT_FALSE(r.disjoint);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ((*r.witness)[0], 0.0);
  EXPECT_EQ((*r.witness)[1], 0.0);
  EXPECT_TRUE(r.mc_witness.has_value());
  EXPECT_TRUE(r.agrees);
}

TEST(Caps, MutuallySeparatedDisjoint) {
  const double d = 0.01;
  Interval a{-0.9, -0.9 + d}, b{-0.5, -0.5 + d}, c{0.1, 0.1 + d}, e{0.6, 0.6 + d};
  auto r = cap_separation_test(a, b, c, e, d, 10, 100000, 3);
  EXPECT_TRUE(r.hypotheses.mutual);
  EXPECT_TRUE(r.disjoint);
  EXPECT_FALSE(r.mc_witness.has_value());
}

TEST(Caps, BothSeparatedShapeCanIntersect) {
  // I1 = I2 and I1' = I2' meet both separation conditions, yet the sets coincide.
  const double d = 0.01;
  Interval a{0.0, d}, b{0.5, 0.5 + d};
  auto r = cap_separation_test(a, b, a, b, d, 10, 1000, 4);
  EXPECT_TRUE(r.hypotheses.part_ii_both);
  EXPECT_FALSE(r.disjoint);
  EXPECT_TRUE(r.mc_witness.has_value());
  EXPECT_TRUE(r.agrees);
}

TEST(Caps, RandomConfigurationsAgreeWithSampling) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> pos(-1, 1);
  int intersecting = 0;
  for (int t = 0; t < 1000; ++t) {
    const double d = 1.0 / 32;
    auto draw = [&] {
      double a = pos(rng) * (1 - d);
      return Interval{a, a + d};
    };
    // Bias towards near-coincident pairs so both verdicts occur.
    Interval i1 = draw(), i1p = draw();
    Interval i2 = (t % 2) ? Interval{i1.lo + 0.3 * d * pos(rng), 0} : draw();
    if (t % 2) i2.hi = i2.lo + d;
    Interval i2p = (t % 2) ? Interval{i1p.lo + 0.3 * d * pos(rng), 0} : draw();
    if (t % 2) i2p.hi = i2p.lo + d;
    auto r = cap_separation_test(i1, i1p, i2, i2p, d, 10, 2000, t);
    EXPECT_TRUE(r.agrees) << t;
    if (r.disjoint) EXPECT_FALSE(r.mc_witness.has_value()) << t;
    intersecting += !r.disjoint;
  }
  EXPECT_GT(intersecting, 100);
  EXPECT_LT(intersecting, 900);
}

TEST(Caps, AnalyticVerdictMatchesBruteForce) {
  // Brute force: dense grids over (xi1, xi1', xi2) with xi2' fixed by the u constraint.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-0.5, 0.5);
  const double d = 1.0 / 16, s = d * d;
  for (int t = 0; t < 40; ++t) {
    Interval i1{pos(rng), 0}, i1p{pos(rng), 0}, i2{0, 0}, i2p{0, 0};
    i2.lo = i1.lo + 0.5 * d * pos(rng) * 4;
    i2p.lo = i1p.lo + 0.5 * d * pos(rng) * 4;
    for (Interval* iv : {&i1, &i1p, &i2, &i2p}) iv->hi = iv->lo + d;
    auto r = cap_separation_test(i1, i1p, i2, i2p, d, 10, 1, t);
    double best = INFINITY;
    const int n = 200;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) {
        double x1 = i1.lo + d * a / n, x1p = i1p.lo + d * b / n, u = x1 - x1p;
        double x2lo = std::max(i2.lo, i2p.lo + u), x2hi = std::min(i2.hi, i2p.hi + u);
        if (x2lo > x2hi) continue;
        double x2 = std::clamp(x1, x2lo, x2hi);
        best = std::min(best, 2 * std::abs(u) * std::abs(x1 - x2));
      }
    // Sets meet iff the v-intervals of width 4 s overlap: 2|u||x1 - x2| <= 4 s.
    if (best < 4 * s * 0.98) EXPECT_FALSE(r.disjoint) << t;
    if (best > 4 * s * 1.02) EXPECT_TRUE(r.disjoint) << t;
  }
}

TEST(Caps, Errors) {
  EXPECT_THROW(cap_separation_test({0, 0.1}, {0, 0.1}, {0, 0.1}, {0, 0.1}, 0.1, 10, 10), precondition_error);
  EXPECT_THROW(cap_separation_test({0, 0.01}, {0, 0.02}, {0, 0.01}, {0, 0.01}, 0.01, 10, 10), precondition_error);
}

TEST(Partition, FamiliesSeparated) {
  auto p = partition_interval({0, 1}, 1.0 / 8, 3);
  EXPECT_EQ(p.intervals.size(), 8u);
  EXPECT_EQ(p.families.size(), 4u);
  EXPECT_FALSE(p.last_shortened);
  auto q = partition_interval({-1, 1}, 1.0 / 64, 10);
  EXPECT_EQ(q.families.size(), 11u);
  std::size_t total = 0;
  for (const auto& fam : q.families) {
    total += fam.size();
    for (std::size_t a = 0; a < fam.size(); ++a)
      for (std::size_t b = a + 1; b < fam.size(); ++b)
        EXPECT_GE(interval_distance(q.intervals[fam[a]], q.intervals[fam[b]]), 10.0 / 64 - 1e-12);
  }
  EXPECT_EQ(total, q.intervals.size());
  for (std::size_t i = 0; i + 1 < q.intervals.size(); ++i) EXPECT_EQ(q.intervals[i].hi, q.intervals[i + 1].lo);
  auto r = partition_interval({0, 1}, 0.3, 2);
  EXPECT_TRUE(r.last_shortened);
  EXPECT_EQ(r.intervals.back().hi, 1.0);
  EXPECT_THROW(partition_interval({0, 1}, 1.0, 2), precondition_error);
}

TEST(CapProject, TilingOrthogonalityIdempotence) {
  auto g = make_grid({{-64, 64}, {-64, 64}}, {256, 256});
  std::mt19937_64 rng(8);
  SampledField f(g);
  for (auto& v : f.values) v = oracle::cnormal(rng);
  const double delta = 1.0 / 8;
  auto part = partition_interval({-0.5, 0.5}, delta, 3);
  auto whole = cap_project(f, {{-0.5, 0.5}, delta * delta});
  SampledField sum(whole.grid);
  double energy = 0;
  std::vector<SampledField> pieces;
  for (const auto& I : part.intervals) {
    pieces.push_back(cap_project(f, {I, delta * delta}));
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += pieces.back().values[i];
    energy += std::pow(lp_norm(pieces.back(), 2), 2);
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < sum.values.size(); ++i) {
    num += std::norm(sum.values[i] - whole.values[i]);
    den += std::norm(whole.values[i]);
  }
  ASSERT_GT(den, 0);
  EXPECT_LE(std::sqrt(num / den), 1e-10);
  EXPECT_NEAR(energy / std::pow(lp_norm(whole, 2), 2), 1.0, 1e-10);

  cplx inner = 0;
  for (std::size_t i = 0; i < sum.values.size(); ++i) inner += pieces[0].values[i] * std::conj(pieces[3].values[i]);
  EXPECT_LE(std::abs(inner) * g.cell_volume(), 1e-10 * lp_norm(pieces[0], 2) * lp_norm(pieces[3], 2));

  auto twice = cap_project(pieces[2], {part.intervals[2], delta * delta});
  double diff = 0;
  for (std::size_t i = 0; i < twice.values.size(); ++i) diff = std::max(diff, std::abs(twice.values[i] - pieces[2].values[i]));
  EXPECT_LE(diff, 1e-13 * lp_norm(pieces[2].values, 1.0, INFINITY));

  EXPECT_THROW(cap_project(f, {{0.9, 1.2}, 0.01}), precondition_error);
}
