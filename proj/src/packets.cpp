#include "rlab/packets.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "rlab/rng.hpp"

namespace rlab {

using detail::cis_turns;

Point OrientedBox::axis(int k) const {
  const int n = dim();
  Point a(n);
  for (int r = 0; r < n; ++r) a[r] = axes[r * n + k];
  return a;
}

double OrientedBox::volume() const {
  double v = 1;
  for (double h : half_lengths) v *= 2 * h;
  return v;
}

Point OrientedBox::local(const Point& x) const {
  const int n = dim();
  Point y(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int r = 0; r < n; ++r) y[k] += axes[r * n + k] * (x[r] - center[r]);
  return y;
}

bool OrientedBox::contains(const Point& x) const {
  const Point y = local(x);
  for (int k = 0; k < dim(); ++k)
    if (std::abs(y[k]) > half_lengths[k]) return false;
  return true;
}

void validate(const OrientedBox& b) {
  const int n = b.dim();
  if (n == 0 || int(b.half_lengths.size()) != n || int(b.axes.size()) != n * n)
    throw precondition_error("box: inconsistent dimensions");
  for (double h : b.half_lengths)
    if (!(h > 0) || !std::isfinite(h)) throw precondition_error("box: half-lengths must be positive");
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      double g = 0;
      for (int r = 0; r < n; ++r) g += b.axes[r * n + a] * b.axes[r * n + c];
      if (std::abs(g - (a == c ? 1.0 : 0.0)) > 1e-12) throw precondition_error("box: axes not orthonormal");
    }
}

OrientedBox make_box(const Point& center, const std::vector<double>& axes, const std::vector<double>& sides) {
  OrientedBox b{center, axes, {}};
  for (double s : sides) b.half_lengths.push_back(0.5 * s);
  validate(b);
  return b;
}

OrientedBox make_box(const Point& center, const std::vector<double>& sides) {
  const int n = int(center.size());
  std::vector<double> id(n * n, 0.0);
  for (int k = 0; k < n; ++k) id[k * n + k] = 1;
  return make_box(center, id, sides);
}

OrientedBox make_box_2d(const Point& center, double theta, double side0, double side1) {
  const double c = std::cos(theta), s = std::sin(theta);
  return make_box(center, {c, -s, s, c}, {side0, side1});
}

OrientedBox dual_box(const OrientedBox& b) {
  validate(b);
  OrientedBox d{Point(b.dim(), 0.0), b.axes, {}};
  for (double h : b.half_lengths) d.half_lengths.push_back(0.5 / (2 * h));
  return d;
}

PacketFamily packet_family(const OrientedBox& B, const Grid& grid) {
  validate(B);
  const int n = B.dim();
  if (grid.dim() != n) throw precondition_error("packets: dimension mismatch");
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      if (B.axes[a * n + c] != (a == c ? 1.0 : 0.0))
        throw precondition_error("packets: the frequency box must be axis-aligned");
  PacketFamily fam;
  fam.base = B;
  fam.grid = grid;
  fam.freq = reciprocal_grid(grid);
  for (int k = 0; k < n; ++k) {
    const double side = B.side(k), a = 1.0 / (2 * side);
    const double L = grid.box[k].second - grid.box[k].first;
    const double count = L / a;
    if (count < 1 - 1e-9 || std::abs(count - std::round(count)) > 1e-9 * count)
      throw precondition_error("packets: extent must hold a whole number of tiles");
    const double flo = fam.freq.coord(k, 0), fhi = fam.freq.coord(k, fam.freq.samples[k] - 1);
    if (B.center[k] - side < flo || B.center[k] + side > fhi)
      throw precondition_error("packets: 2B leaves the frequency grid");
    fam.per_axis.push_back(std::size_t(std::llround(count)));
    fam.tile_side.push_back(a);
  }
  double tvol = 1;
  for (double a : fam.tile_side) tvol *= a;
  fam.amplitude = std::sqrt(tvol);

  std::size_t tiles = 1;
  for (auto c : fam.per_axis) tiles *= c;
  for (std::size_t t = 0; t < tiles; ++t) {
    Point c(n);
    std::size_t q = t;
    for (int k = n - 1; k >= 0; --k) {
      c[k] = grid.box[k].first + fam.tile_side[k] * (double(q % fam.per_axis[k]) + 0.5);
      q /= fam.per_axis[k];
    }
    fam.tiles.push_back(make_box(c, fam.tile_side));
  }

  Point xi(n);
  for (std::size_t i = 0; i < fam.freq.cell_count(); ++i) {
    fam.freq.point(i, xi.data());
    double w = 1;
    for (int k = 0; k < n && w > 0; ++k) {
      const double d = std::abs(xi[k] - B.center[k]);
      w = d < B.side(k) ? w * plateau_profile(d, B.half_lengths[k], B.side(k)) : 0.0;
    }
    if (w > 0) {
      fam.support.push_back(i);
      fam.window.push_back(w);
    }
  }
  return fam;
}

namespace {

SampledField from_spectrum(const PacketFamily& fam, std::vector<cplx> spec) {
  SampledField F(fam.freq, std::move(spec));
  F.conjugate = fam.grid;
  return transform(F, Direction::inverse);
}

double dot(const Point& a, const double* b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

PacketTransform analyse(const SampledField& F, const PacketFamily& fam, bool parallel) {
  if (F.grid.box != fam.grid.box || F.grid.samples != fam.grid.samples)
    throw precondition_error("packets: field grid differs from the family grid");
  PacketTransform out;
  out.band_leakage = band_leakage(F, fam.base);
  if (out.band_leakage > 1e-8) throw precondition_error("packets: field is not band-limited to B");
  const auto Fh = transform(F, Direction::forward);
  if (Fh.grid.box != fam.freq.box) throw precondition_error("packets: unexpected frequency grid");
  const int n = fam.grid.dim();
  const std::size_t S = fam.support.size();
  std::vector<double> xi(S * n);
  std::vector<cplx> g(S);
  for (std::size_t s = 0; s < S; ++s) {
    fam.freq.point(fam.support[s], xi.data() + s * n);
    g[s] = Fh.values[fam.support[s]] * fam.window[s];
  }
  const double scale = fam.amplitude * fam.freq.cell_volume();
  const long long T = (long long)fam.size();
  out.coefficients.assign(fam.size(), 0);
#pragma omp parallel for schedule(static) if (parallel)
  for (long long t = 0; t < T; ++t) {
    const Point& u = fam.tiles[t].center;
    cplx acc = 0;
    for (std::size_t s = 0; s < S; ++s) acc += g[s] * cis_turns(dot(u, xi.data() + s * n));
    out.coefficients[t] = scale * acc;
  }
  std::vector<cplx> spec(fam.freq.cell_count(), 0);
  const long long SS = (long long)S;
#pragma omp parallel for schedule(static) if (parallel)
  for (long long s = 0; s < SS; ++s) {
    cplx acc = 0;
    for (std::size_t t = 0; t < fam.size(); ++t)
      acc += out.coefficients[t] * cis_turns(-dot(fam.tiles[t].center, xi.data() + s * n));
    spec[fam.support[s]] = fam.amplitude * fam.window[s] * acc;
  }
  out.reconstruction = from_spectrum(fam, std::move(spec));
  std::vector<cplx> diff(F.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = out.reconstruction.values[i] - F.values[i];
  const double norm = lp_norm(F, 2);
  out.defect = norm > 0 ? lp_norm(diff, F.grid.cell_volume(), 2) / norm : 0.0;
  long double e = 0;
  for (const auto& w : out.coefficients) e += std::norm(w);
  out.energy_ratio = norm > 0 ? double(e) / (norm * norm) : 0.0;
  return out;
}

}  // namespace

SampledField packet_window(const PacketFamily& fam) {
  SampledField w(fam.freq);
  for (std::size_t s = 0; s < fam.support.size(); ++s) w.values[fam.support[s]] = fam.window[s];
  return w;
}

SampledField packet(const PacketFamily& fam, std::size_t t) {
  if (t >= fam.size()) throw precondition_error("packets: tile index out of range");
  const int n = fam.grid.dim();
  std::vector<cplx> spec(fam.freq.cell_count(), 0);
  Point xi(n);
  for (std::size_t s = 0; s < fam.support.size(); ++s) {
    fam.freq.point(fam.support[s], xi.data());
    spec[fam.support[s]] = fam.amplitude * fam.window[s] * cis_turns(-dot(fam.tiles[t].center, xi.data()));
  }
  return from_spectrum(fam, std::move(spec));
}

double band_leakage(const SampledField& F, const OrientedBox& B) {
  validate(B);
  if (F.grid.dim() != B.dim()) throw precondition_error("packets: dimension mismatch");
  const auto Fh = transform(F, Direction::forward);
  long double in = 0, out = 0;
  Point xi(B.dim());
  for (std::size_t i = 0; i < Fh.values.size(); ++i) {
    Fh.grid.point(i, xi.data());
    (B.contains(xi) ? in : out) += std::norm(Fh.values[i]);
  }
  return in + out > 0 ? double(std::sqrt(out / (in + out))) : 0.0;
}

PacketTransform packet_transform(const SampledField& F, const PacketFamily& fam) { return analyse(F, fam, true); }

namespace serial {
PacketTransform packet_transform(const SampledField& F, const PacketFamily& fam) { return analyse(F, fam, false); }
}  // namespace serial

namespace {
int long_axis(const OrientedBox& b) {
  return int(std::max_element(b.half_lengths.begin(), b.half_lengths.end()) - b.half_lengths.begin());
}
}  // namespace

Overlap overlap_volume(const OrientedBox& t1, const OrientedBox& t2, std::size_t samples, std::uint64_t seed) {
  validate(t1);
  validate(t2);
  const int n = t1.dim();
  if (t2.dim() != n) throw precondition_error("overlap: dimension mismatch");
  if (samples == 0) throw precondition_error("overlap: no samples");
  Overlap o;
  const Point a1 = t1.axis(long_axis(t1)), a2 = t2.axis(long_axis(t2));
  o.angle = std::acos(std::min(1.0, std::abs(dot(a1, a2.data()))));
  o.transverse = o.angle >= 1e-6;
  o.samples = samples;
  long long hits = 0;
  const long long total = (long long)samples;
#pragma omp parallel for reduction(+ : hits) schedule(static)
  for (long long s = 0; s < total; ++s) {
    Point x = t1.center;
    for (int k = 0; k < n; ++k) {
      const double c = t1.half_lengths[k] * (2 * counter_uniform(seed, std::uint64_t(s) * n + k) - 1);
      for (int r = 0; r < n; ++r) x[r] += c * t1.axes[r * n + k];
    }
    hits += t2.contains(x);
  }
  o.hits = std::size_t(hits);
  o.volume = t1.volume() * double(hits) / double(samples);
  return o;
}

double overlap_bound(const OrientedBox& t1, const OrientedBox& t2, double angle) {
  const int l1 = long_axis(t1), l2 = long_axis(t2);
  double v = 1;
  for (int k = 0; k < t1.dim(); ++k)
    if (k != l1) v *= t1.side(k);
  double shortest = INFINITY;
  for (int k = 0; k < t2.dim(); ++k)
    if (k != l2) shortest = std::min(shortest, t2.side(k));
  return v * shortest / std::sin(angle);
}

}  // namespace rlab
