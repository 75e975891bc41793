// Threaded kernels against their serial references. Run with OMP_NUM_THREADS
// set to compare; on one core the gap is the FFT vs direct-sum difference only.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "rlab/dyadic.hpp"
#include "rlab/extension.hpp"
#include "rlab/packets.hpp"

using namespace rlab;

namespace {

SampledField noise(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SampledField f(g);
  for (auto& v : f.values) v = {n(rng), n(rng)};
  return f;
}

Density random_density(const Hypersurface& s, std::vector<std::size_t> samples) {
  auto d = make_density(s, samples);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (auto& v : d.values) v = {n(rng), n(rng)};
  return d;
}

EvalSet eval_points(std::size_t count) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-20, 20);
  EvalSet xs(count);
  for (auto& x : xs) x = {u(rng), u(rng)};
  return xs;
}

void BM_Transform(benchmark::State& st) {
  const auto f = noise(make_grid({{-4, 4}, {-4, 4}}, {std::size_t(st.range(0)), std::size_t(st.range(0))}), 1);
  for (auto _ : st) benchmark::DoNotOptimize(transform(f, Direction::forward));
}
void BM_TransformSerial(benchmark::State& st) {
  const auto f = noise(make_grid({{-4, 4}, {-4, 4}}, {std::size_t(st.range(0)), std::size_t(st.range(0))}), 1);
  for (auto _ : st) benchmark::DoNotOptimize(serial::transform(f, Direction::forward));
}
BENCHMARK(BM_Transform)->Arg(64)->Arg(256);
BENCHMARK(BM_TransformSerial)->Arg(64)->Arg(256);

void BM_Extend(benchmark::State& st) {
  const auto d = random_density(make_paraboloid(2, {{-1, 1}}), {4096});
  const auto xs = eval_points(std::size_t(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(extend(d, xs));
}
void BM_ExtendSerial(benchmark::State& st) {
  const auto d = random_density(make_paraboloid(2, {{-1, 1}}), {4096});
  const auto xs = eval_points(std::size_t(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(serial::extend(d, xs));
}
BENCHMARK(BM_Extend)->Arg(1024);
BENCHMARK(BM_ExtendSerial)->Arg(1024);

void BM_MeasureFT(benchmark::State& st) {
  const auto d = make_density(make_paraboloid(2, {{-1, 1}}), {1u << 17});
  for (auto _ : st) benchmark::DoNotOptimize(measure_ft(d, {0, 512}));
}
void BM_MeasureFTSerial(benchmark::State& st) {
  const auto d = make_density(make_paraboloid(2, {{-1, 1}}), {1u << 17});
  for (auto _ : st) benchmark::DoNotOptimize(serial::measure_ft(d, {0, 512}));
}
BENCHMARK(BM_MeasureFT);
BENCHMARK(BM_MeasureFTSerial);

const Grid kGrid = make_grid({{-32, 32}, {-32, 32}}, {128, 128});
const OrientedBox kB = make_box({0.1, -0.2}, {0.25, 1.0 / 16});

SampledField band_limited() {
  auto spec = noise(reciprocal_grid(kGrid), 7);
  for (std::size_t i = 0; i < spec.values.size(); ++i)
    if (!kB.contains(spec.grid.point(i))) spec.values[i] = 0;
  spec.conjugate = kGrid;
  return transform(spec, Direction::inverse);
}

void BM_PacketTransform(benchmark::State& st) {
  const auto fam = packet_family(kB, kGrid);
  const auto F = band_limited();
  for (auto _ : st) benchmark::DoNotOptimize(packet_transform(F, fam));
}
void BM_PacketTransformSerial(benchmark::State& st) {
  const auto fam = packet_family(kB, kGrid);
  const auto F = band_limited();
  for (auto _ : st) benchmark::DoNotOptimize(serial::packet_transform(F, fam));
}
BENCHMARK(BM_PacketTransform);
BENCHMARK(BM_PacketTransformSerial);

double dist_to_point(const Point& x) { return std::hypot(x[0] - 0.3, x[1] + 0.2); }

void BM_Whitney(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(whitney_decompose(dist_to_point, {{-1, 1}, {-1, 1}}, -9));
}
void BM_WhitneySerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::whitney_decompose(dist_to_point, {{-1, 1}, {-1, 1}}, -9));
}
BENCHMARK(BM_Whitney);
BENCHMARK(BM_WhitneySerial);

}  // namespace

BENCHMARK_MAIN();
