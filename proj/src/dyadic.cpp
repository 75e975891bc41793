#include "rlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rlab/rng.hpp"

namespace rlab {

namespace {

using i64 = std::int64_t;

double admissible_factor(int m) { return 4.0 + 0.5 * std::sqrt(double(m)); }

// x / 2^k as an integer, if exact.
std::optional<i64> dyadic_index(double x, int k) {
  const double q = std::ldexp(x, -k);
  if (q != std::floor(q) || std::abs(q) > 4e18) return std::nullopt;
  return i64(q);
}

void spot_check_lipschitz(const DistanceOracle& dist, const Box& box) {
  const int m = int(box.size());
  const std::uint64_t key = 0x5eed0fd15ULL;
  for (std::uint64_t t = 0; t < 64; ++t) {
    Point x(m), y(m);
    double len2 = 0;
    for (int k = 0; k < m; ++k) {
      auto [lo, hi] = box[k];
      x[k] = lo + (hi - lo) * counter_uniform(key, 2 * m * t + k);
      const double step = (hi - lo) * (counter_uniform(key, 2 * m * t + m + k) - 0.5) * (t % 2 ? 0.01 : 0.5);
      y[k] = x[k] + step;
      len2 += step * step;
    }
    const double a = dist(x), b = dist(y);
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0 || b < 0)
      throw precondition_error("whitney: distance oracle returned a negative or non-finite value");
    if (std::abs(a - b) > std::sqrt(len2) * (1 + 1e-9) + 1e-12)
      throw precondition_error("whitney: distance oracle is not 1-Lipschitz");
  }
}

struct Layout {
  int m = 0;
  int top = 0;
  std::vector<i64> first, count;  // per-axis top-level cube indices
};

Layout plan(const Box& box, int k_min) {
  Layout L;
  L.m = int(box.size());
  if (L.m == 0) throw precondition_error("whitney: empty box");
  for (auto [lo, hi] : box) {
    if (!(lo < hi)) throw precondition_error("whitney: degenerate box");
    if (!dyadic_index(lo, k_min) || !dyadic_index(hi, k_min))
      throw precondition_error("whitney: box not dyadically alignable at level k_min");
  }
  int top = k_min;
  while (top < 60) {
    bool ok = true;
    for (auto [lo, hi] : box)
      ok = ok && dyadic_index(lo, top + 1) && dyadic_index(hi, top + 1) && std::ldexp(1.0, top + 1) <= hi - lo;
    if (!ok) break;
    ++top;
  }
  L.top = top;
  for (auto [lo, hi] : box) {
    L.first.push_back(*dyadic_index(lo, top));
    L.count.push_back(*dyadic_index(hi, top) - *dyadic_index(lo, top));
  }
  return L;
}

void refine(const DistanceOracle& dist, const DyadicCube& c, int k_min, double factor, std::vector<DyadicCube>& out,
            std::vector<DyadicCube>& trunc) {
  if (dist(c.center()) >= factor * c.side()) {
    out.push_back(c);
    return;
  }
  if (c.level == k_min) {
    trunc.push_back(c);
    return;
  }
  const int m = c.dim();
  DyadicCube child;
  child.level = c.level - 1;
  child.corner.resize(m);
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << m); ++bits) {
    for (int k = 0; k < m; ++k) child.corner[k] = 2 * c.corner[k] + i64((bits >> k) & 1);
    refine(dist, child, k_min, factor, out, trunc);
  }
}

WhitneyDecomposition decompose(const DistanceOracle& dist, const Box& box, int k_min, bool parallel) {
  const Layout L = plan(box, k_min);
  spot_check_lipschitz(dist, box);
  long long tops = 1;
  for (i64 c : L.count) tops *= c;
  std::vector<std::vector<DyadicCube>> out(tops), trunc(tops);
  const double factor = admissible_factor(L.m);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long t = 0; t < tops; ++t) {
    DyadicCube c;
    c.level = L.top;
    c.corner.resize(L.m);
    long long q = t;
    for (int k = L.m - 1; k >= 0; --k) {
      c.corner[k] = L.first[k] + q % L.count[k];
      q /= L.count[k];
    }
    refine(dist, c, k_min, factor, out[t], trunc[t]);
  }
  WhitneyDecomposition w;
  w.k_min = k_min;
  w.top_level = L.top;
  w.uncovered_radius = (4.0 + std::sqrt(double(L.m))) * std::ldexp(1.0, k_min);
  for (long long t = 0; t < tops; ++t) {
    w.cubes.insert(w.cubes.end(), out[t].begin(), out[t].end());
    w.truncated.insert(w.truncated.end(), trunc[t].begin(), trunc[t].end());
  }
  std::sort(w.cubes.begin(), w.cubes.end());
  std::sort(w.truncated.begin(), w.truncated.end());
  return w;
}

}  // namespace

double DyadicCube::side() const { return std::ldexp(1.0, level); }

Box DyadicCube::box() const {
  Box b;
  for (i64 c : corner) b.emplace_back(std::ldexp(double(c), level), std::ldexp(double(c + 1), level));
  return b;
}

Point DyadicCube::center() const {
  Point p;
  for (i64 c : corner) p.push_back(std::ldexp(double(c) + 0.5, level));
  return p;
}

DyadicCube DyadicCube::parent() const {
  DyadicCube p{level + 1, corner};
  for (auto& c : p.corner) c >>= 1;  // floor division, also for negatives
  return p;
}

bool DyadicCube::contains(const DyadicCube& other) const {
  if (other.dim() != dim() || other.level > level) return false;
  const int shift = level - other.level;
  if (shift >= 63) return false;
  for (int k = 0; k < dim(); ++k)
    if ((other.corner[k] >> shift) != corner[k]) return false;
  return true;
}

double cube_distance(const DyadicCube& a, const DyadicCube& b) {
  if (a.dim() != b.dim()) throw precondition_error("cube_distance: dimension mismatch");
  const int k0 = std::min(a.level, b.level);
  const int sa = a.level - k0, sb = b.level - k0;
  long double acc = 0;
  for (int k = 0; k < a.dim(); ++k) {
    const i64 alo = a.corner[k] << sa, ahi = (a.corner[k] + 1) << sa;
    const i64 blo = b.corner[k] << sb, bhi = (b.corner[k] + 1) << sb;
    const i64 gap = std::max<i64>({0, blo - ahi, alo - bhi});
    acc += (long double)gap * (long double)gap;
  }
  return std::ldexp(double(std::sqrt(acc)), k0);
}

WhitneyDecomposition whitney_decompose(const DistanceOracle& dist, const Box& box, int k_min) {
  return decompose(dist, box, k_min, true);
}

namespace serial {
WhitneyDecomposition whitney_decompose(const DistanceOracle& dist, const Box& box, int k_min) {
  return decompose(dist, box, k_min, false);
}
}  // namespace serial

bool cubes_disjoint(const std::vector<DyadicCube>& cubes) {
  std::set<DyadicCube> seen;
  int top = std::numeric_limits<int>::min();
  for (const auto& c : cubes) {
    if (!seen.insert(c).second) return false;
    top = std::max(top, c.level);
  }
  for (const auto& c : cubes)
    for (DyadicCube p = c.parent(); p.level <= top; p = p.parent())
      if (seen.count(p)) return false;
  return true;
}

bool covers_box(const WhitneyDecomposition& w, const Box& box) {
  std::vector<DyadicCube> all = w.cubes;
  all.insert(all.end(), w.truncated.begin(), w.truncated.end());
  if (!cubes_disjoint(all)) return false;
  const int m = int(box.size());
  // Volumes in units of 2^{m k_min}.
  long double want = 1;
  for (auto [lo, hi] : box) {
    auto a = dyadic_index(lo, w.k_min), b = dyadic_index(hi, w.k_min);
    if (!a || !b) return false;
    want *= (long double)(*b - *a);
  }
  long double got = 0;
  for (const auto& c : all) {
    if (c.dim() != m) return false;
    for (int k = 0; k < m; ++k) {
      auto lo = dyadic_index(box[k].first, c.level), hi = dyadic_index(box[k].second, c.level);
      if (!lo || !hi || c.corner[k] < *lo || c.corner[k] + 1 > *hi) return false;
    }
    got += std::ldexp(1.0L, m * (c.level - w.k_min));
  }
  return got == want;
}

DyadicCube CubePair::joint() const {
  DyadicCube c{first.level, first.corner};
  c.corner.insert(c.corner.end(), second.corner.begin(), second.corner.end());
  return c;
}

DiagonalDecomposition diagonal_decompose(int m, int k_min) {
  if (m < 1) throw precondition_error("diagonal: dimension must be positive");
  Box box(2 * m, {-1.0, 1.0});
  auto dist = [m](const Point& p) {
    double s = 0;
    for (int k = 0; k < m; ++k) s += (p[k] - p[k + m]) * (p[k] - p[k + m]);
    return std::sqrt(s / 2);
  };
  DiagonalDecomposition d;
  d.whitney = whitney_decompose(dist, box, k_min);
  for (const auto& c : d.whitney.cubes) {
    CubePair p;
    p.first.level = p.second.level = c.level;
    p.first.corner.assign(c.corner.begin(), c.corner.begin() + m);
    p.second.corner.assign(c.corner.begin() + m, c.corner.end());
    d.pairs.push_back(std::move(p));
  }
  return d;
}

double interval_distance(const Interval& a, const Interval& b) { return std::max({0.0, b.lo - a.hi, a.lo - b.hi}); }

double cap_enclosing_radius(const ParabolicCap& cap) {
  const double c = cap.interval.midpoint();
  double worst = 0;
  const int n = 1024;
  for (int i = 0; i <= n; ++i) {
    const double xi = cap.interval.lo + cap.interval.length() * i / n;
    for (double t : {-cap.sigma, cap.sigma})
      worst = std::max(worst, std::hypot(xi - c, xi * xi + t - c * c));
  }
  return worst;
}

std::string CapHypotheses::label() const {
  if (part_i) return "part_i";
  if (mutual) return "mutual";
  if (part_ii_both) return "part_ii_both";
  if (part_ii_max) return "part_ii_max";
  return "none";
}

namespace {

Interval diff(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }

// {xi in I : xi - u in J}
Interval fibre(const Interval& i, const Interval& j, double u) { return {std::max(i.lo, j.lo + u), std::min(i.hi, j.hi + u)}; }

// |u| dist(fibre_A(u), fibre_B(u)); the difference sets meet over u iff this is <= 2 sigma.
double gap_at(const Interval& i1, const Interval& i1p, const Interval& i2, const Interval& i2p, double u) {
  return std::abs(u) * interval_distance(fibre(i1, i1p, u), fibre(i2, i2p, u));
}

}  // namespace

bool in_cap_difference(const Interval& i, const Interval& j, double sigma, const Point& p) {
  const double u = p[0], v = p[1];
  const Interval f = fibre(i, j, u);
  const double slack = 1e-12 * (sigma + std::abs(v) + 1e-300);
  if (f.lo > f.hi + 1e-15) return false;
  const double a = u * (2 * f.lo - u), b = u * (2 * f.hi - u);
  return v >= std::min(a, b) - 2 * sigma - slack && v <= std::max(a, b) + 2 * sigma + slack;
}

CapSeparation cap_separation_test(const Interval& i1, const Interval& i1p, const Interval& i2, const Interval& i2p,
                                  double delta, double N, std::size_t samples, std::uint64_t seed) {
  if (!(delta > 0) || delta > 1.0 / 16) throw precondition_error("caps: need 0 < delta <= 1/16");
  for (const auto* iv : {&i1, &i1p, &i2, &i2p})
    if (std::abs(iv->length() - delta) > 1e-12 * std::max(1.0, delta))
      throw precondition_error("caps: every interval must have length delta");
  const double sigma = delta * delta;
  CapSeparation r;

  const double sep = N * delta;
  const double d1 = interval_distance(i1, i1p), d2 = interval_distance(i2, i2p);
  r.hypotheses.part_i = i1.lo == i1p.lo && i1.hi == i1p.hi && d2 >= sep;
  r.hypotheses.part_ii_both = d1 >= sep && d2 >= sep;
  r.hypotheses.part_ii_max = std::max(d1, d2) >= sep;
  {
    const Interval* all[4] = {&i1, &i1p, &i2, &i2p};
    bool mutual = true;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) mutual = mutual && interval_distance(*all[a], *all[b]) >= sep;
    r.hypotheses.mutual = mutual;
  }

  // Common u-range of both difference sets.
  const Interval da = diff(i1, i1p), db = diff(i2, i2p);
  const Interval U{std::max(da.lo, db.lo), std::min(da.hi, db.hi)};
  double best = std::numeric_limits<double>::infinity(), best_u = 0;
  if (U.lo <= U.hi) {
    std::vector<double> knots{U.lo, U.hi, 0.0, i1.lo - i1p.lo, i1.hi - i1p.hi, i2.lo - i2p.lo, i2.hi - i2p.hi};
    std::sort(knots.begin(), knots.end());
    // Between knots the fibre endpoints are linear in u; add the zeros of the
    // two gap candidates so the distance is linear on each piece.
    std::vector<double> pts;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double s = std::clamp(knots[k], U.lo, U.hi), t = std::clamp(knots[k + 1], U.lo, U.hi);
      pts.push_back(s);
      if (!(s < t)) continue;
      auto g = [&](double u, int which) {
        const Interval a = fibre(i1, i1p, u), b = fibre(i2, i2p, u);
        return which == 0 ? b.lo - a.hi : a.lo - b.hi;
      };
      for (int which = 0; which < 2; ++which) {
        const double gs = g(s, which), gt = g(t, which);
        if ((gs < 0) != (gt < 0)) pts.push_back(s + (t - s) * gs / (gs - gt));
      }
    }
    pts.push_back(U.hi);
    std::sort(pts.begin(), pts.end());
    auto consider = [&](double u) {
      if (u < U.lo || u > U.hi) return;
      const double f = gap_at(i1, i1p, i2, i2p, u);
      if (f < best || (f == best && std::abs(u) < std::abs(best_u))) {
        best = f;
        best_u = u;
      }
    };
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const double s = pts[k], t = pts[k + 1];
      consider(s);
      consider(t);
      if (!(s < t)) continue;
      // Quadratic on the piece: locate its vertex from three samples.
      const double mid = 0.5 * (s + t);
      const double fs = gap_at(i1, i1p, i2, i2p, s), fm = gap_at(i1, i1p, i2, i2p, mid),
                   ft = gap_at(i1, i1p, i2, i2p, t);
      const double curv = fs - 2 * fm + ft;
      if (curv > 0) consider(mid + 0.5 * (t - s) * (fs - ft) / (2 * curv));
    }
  }
  r.min_gap = best;
  r.disjoint = !(best <= 2 * sigma * (1 + 1e-12));
  if (!r.disjoint) {
    const Interval a = fibre(i1, i1p, best_u), b = fibre(i2, i2p, best_u);
    double x1, x2;
    if (a.hi < b.lo) {
      x1 = a.hi;
      x2 = b.lo;
    } else if (b.hi < a.lo) {
      x1 = a.lo;
      x2 = b.hi;
    } else {
      x1 = x2 = std::max(a.lo, b.lo);
    }
    r.witness = Point{best_u, best_u * (x1 + x2 - best_u)};
  }

  // Sample the first difference set, test exact membership in the second.
  r.mc_samples = samples;
  long long first_hit = std::numeric_limits<long long>::max();
  const long long total = (long long)samples;
#pragma omp parallel for reduction(min : first_hit) schedule(static)
  for (long long s = 0; s < total; ++s) {
    const std::uint64_t c = 4 * std::uint64_t(s);
    const double x = i1.lo + delta * counter_uniform(seed, c), xp = i1p.lo + delta * counter_uniform(seed, c + 1);
    const double t = sigma * (2 * counter_uniform(seed, c + 2) - 1), tp = sigma * (2 * counter_uniform(seed, c + 3) - 1);
    Point p{x - xp, x * x + t - xp * xp - tp};
    if (in_cap_difference(i2, i2p, sigma, p)) first_hit = std::min(first_hit, s);
  }
  if (first_hit != std::numeric_limits<long long>::max()) {
    const std::uint64_t c = 4 * std::uint64_t(first_hit);
    const double x = i1.lo + delta * counter_uniform(seed, c), xp = i1p.lo + delta * counter_uniform(seed, c + 1);
    const double t = sigma * (2 * counter_uniform(seed, c + 2) - 1), tp = sigma * (2 * counter_uniform(seed, c + 3) - 1);
    r.mc_witness = Point{x - xp, x * x + t - xp * xp - tp};
  }
  const bool witness_ok = !r.witness || (in_cap_difference(i1, i1p, sigma, *r.witness) &&
                                         in_cap_difference(i2, i2p, sigma, *r.witness));
  r.agrees = !(r.disjoint && r.mc_witness) && witness_ok;
  return r;
}

IntervalPartition partition_interval(const Interval& J, double delta, int N) {
  const double len = J.length();
  if (!(len > 0)) throw precondition_error("partition: degenerate interval");
  if (!(delta > 0) || delta >= len) throw precondition_error("partition: need 0 < delta < |J|");
  if (N < 1) throw precondition_error("partition: N must be positive");
  IntervalPartition p;
  const double ratio = len / delta;
  std::size_t count = std::size_t(std::llround(ratio));
  if (std::abs(ratio - double(count)) > 1e-9 * ratio) {
    count = std::size_t(std::ceil(ratio));
    p.last_shortened = true;
  }
  for (std::size_t i = 0; i < count; ++i)
    p.intervals.push_back({J.lo + double(i) * delta, i + 1 == count ? J.hi : J.lo + double(i + 1) * delta});
  p.families.resize(std::size_t(N) + 1);
  for (std::size_t i = 0; i < count; ++i) p.families[i % (std::size_t(N) + 1)].push_back(i);
  return p;
}

std::vector<char> cap_mask(const Grid& freq, const ParabolicCap& cap) {
  if (freq.dim() != 2) throw precondition_error("cap: 2-dimensional grid required");
  const auto& I = cap.interval;
  const double lo0 = freq.coord(0, 0), hi0 = freq.coord(0, freq.samples[0] - 1);
  const double lo1 = freq.coord(1, 0), hi1 = freq.coord(1, freq.samples[1] - 1);
  const double top = std::max(I.lo * I.lo, I.hi * I.hi) + cap.sigma;
  const double bottom = (I.lo <= 0 && I.hi >= 0 ? 0.0 : std::min(I.lo * I.lo, I.hi * I.hi)) - cap.sigma;
  if (I.lo < lo0 || I.hi > hi0 || bottom < lo1 || top > hi1)
    throw precondition_error("cap: cap outside the frequency box");
  std::vector<char> mask(freq.cell_count(), 0);
  const std::size_t n0 = freq.samples[0], n1 = freq.samples[1];
  for (std::size_t a = 0; a < n0; ++a) {
    const double xi = freq.coord(0, a);
    if (xi < I.lo || xi >= I.hi) continue;
    for (std::size_t b = 0; b < n1; ++b)
      if (std::abs(freq.coord(1, b) - xi * xi) <= cap.sigma) mask[a * n1 + b] = 1;
  }
  return mask;
}

SampledField cap_project(const SampledField& field, const ParabolicCap& cap) {
  if (field.grid.dim() != 2) throw precondition_error("cap: 2-dimensional field required");
  auto F = transform(field, Direction::forward);
  const auto mask = cap_mask(F.grid, cap);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) F.values[i] = 0;
  return transform(F, Direction::inverse);
}

}  // namespace rlab
