#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rlab/probes.hpp"
#include "rlab/runner.hpp"

using namespace rlab;

namespace {

ProbeConfig cfg(const std::string& probe, std::vector<double> scales, int trials) {
  ProbeConfig c = default_config(probe);
  c.scales = std::move(scales);
  c.trials = trials;
  return c;
}

const Check* find_check(const ProbeReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST(ProbeConfig, Validation) {
  auto c = default_config("knapp");
  EXPECT_NO_THROW(validate_config(c));
  auto bad = c;
  bad.scales = {0.25, 0.125, 0.125};
  EXPECT_THROW(validate_config(bad), precondition_error);
  bad = c;
  bad.scales = {0.25, 0.0625, 0.125};
  EXPECT_THROW(validate_config(bad), precondition_error);
  bad = c;
  bad.trials = 0;
  EXPECT_THROW(validate_config(bad), precondition_error);
  bad = c;
  bad.slope_tol = 0;
  EXPECT_THROW(validate_config(bad), precondition_error);
  bad = c;
  bad.probe = "nope";
  EXPECT_THROW(validate_config(bad), precondition_error);
  bad.scales.clear();
  const auto r = run_probe(bad);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.error.find("nope"), std::string::npos);
}

TEST(ProbeCatalog, AllDefaultsValidate) {
  EXPECT_EQ(probe_catalog().size(), 13u);
  for (const auto& p : probe_catalog()) {
    EXPECT_TRUE(is_probe(p.name));
    EXPECT_NO_THROW(validate_config(default_config(p.name))) << p.name;
  }
}

TEST(HausdorffYoung, GaussianPlancherel) {
  auto c = cfg("hausdorff_young", {1.5, 2}, 1);
  c.variant = "gaussian";
  const auto r = run_probe(c);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_NEAR(r.rows[1].measured, 1.0, 1e-8);
}

TEST(HausdorffYoung, RandomFieldsBounded) {
  const auto r = run_probe(cfg("hausdorff_young", {1, 1.5}, 100));
  ASSERT_TRUE(r.error.empty()) << r.error;
  for (const auto& t : r.trials) EXPECT_LE(t.value, 1 + 1e-6);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(run_probe(cfg("hausdorff_young", {1.5, 2.5}, 2)).error.empty());
}

TEST(Khintchine, SingleBumpSignFree) {
  const auto r = run_probe(cfg("khintchine", {1, 2}, 16));
  ASSERT_TRUE(r.error.empty()) << r.error;
  for (const auto& t : r.trials)
    if (t.scale == 1) EXPECT_DOUBLE_EQ(t.value, r.trials.front().value);
}

TEST(Khintchine, ExponentsAndTrialDoubling) {
  const auto a = run_probe(default_config("khintchine"));
  auto c = default_config("khintchine");
  c.trials *= 2;
  const auto b = run_probe(c);
  ASSERT_TRUE(a.fit && b.fit);
  EXPECT_NEAR(a.fit->exponent, 0.5, 0.05);
  EXPECT_NEAR(a.metrics.at("norm_p_exponent"), 0.75, 0.02);
  EXPECT_LE(std::abs(a.fit->exponent - b.fit->exponent), 0.02);
  auto bad = c;
  bad.params["spacing"] = 1.5;
  EXPECT_FALSE(run_probe(bad).error.empty());
}

TEST(Knapp, EndpointAndDivergence) {
  const auto r = run_probe(cfg("knapp", {0.25, 0.125, 0.0625}, 1));
  ASSERT_TRUE(r.fit);
  EXPECT_NEAR(r.fit->exponent, 0.0, 0.05);
  auto c = cfg("knapp", {0.25, 0.125, 0.0625}, 1);
  c.q_prime = 2;
  const auto d = run_probe(c);
  ASSERT_TRUE(d.fit);
  EXPECT_LT(d.fit->exponent, -0.15);
  EXPECT_NEAR(d.fit->exponent, -0.25, 0.05);
  EXPECT_EQ(d.metrics.at("admissible"), 0.0);
}

TEST(Knapp, SingleDeltaHasNoFit) {
  const auto r = run_probe(cfg("knapp", {0.125}, 1));
  EXPECT_TRUE(r.error.empty());
  EXPECT_FALSE(r.fit);
  EXPECT_GT(r.constant, 0);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(run_probe(cfg("knapp", {0.125, 0.25}, 1)).error.empty());
}

TEST(SteinTomas, TelescopingAndDecay) {
  const auto r = run_probe(cfg("stein_tomas", {2, 3, 4, 5}, 1));
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_LE(find_check(r, "telescoping_defect")->value, 1e-12);
  ASSERT_TRUE(r.fit);
  EXPECT_LE(r.fit->exponent, -0.4);
  EXPECT_LE(r.metrics.at("khat_exponent"), 1.1);
  auto c = cfg("stein_tomas", {2, 3}, 1);
  c.dim = 4;
  EXPECT_FALSE(run_probe(c).error.empty());
}

TEST(ReverseSquare, SingleCapAndZero) {
  auto c = cfg("reverse_square", {0.125, 0.0625}, 3);
  c.variant = "single_cap";
  const auto r = run_probe(c);
  ASSERT_TRUE(r.error.empty()) << r.error;
  for (const auto& t : r.trials) EXPECT_NEAR(t.value, 1.0, 1e-12);
  c.variant = "zero";
  const auto z = run_probe(c);
  EXPECT_EQ(z.rejected, 6);
  EXPECT_FALSE(z.fit);
  c.variant = "random";
  c.scales = {0.125, 0.3};
  EXPECT_FALSE(run_probe(c).error.empty());
}

TEST(TransversePacket, MarginGuard) {
  auto c = cfg("transverse_packet", {0.125, 0.0625}, 1);
  c.params["nu"] = 0.3;
  EXPECT_NE(run_probe(c).error.find("margin"), std::string::npos);
}

TEST(TransversePacket, SinglePacketMatchesOverlap) {
  auto c = cfg("transverse_packet", {0.125, 0.0625}, 1);
  c.variant = "single_packet";
  const auto r = run_probe(c);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_LE(find_check(r, "overlap_prediction_error")->value, 0.2);
}

TEST(Bilinear, ZeroSkippedAndSmallSweep) {
  auto c = cfg("bilinear", {16, 32}, 2);
  c.variant = "zero";
  const auto z = run_probe(c);
  EXPECT_EQ(z.rejected, 4);
  c.variant = "random";
  const auto r = run_probe(c);
  ASSERT_TRUE(r.fit);
  EXPECT_EQ(r.fit->point_count, 2);
  c.params["j2_lo"] = -0.75;
  EXPECT_FALSE(run_probe(c).error.empty());
}

TEST(WhitneyAssembly, ZeroAndMonotone) {
  auto c = cfg("whitney_assembly", {3, 4, 5}, 1);
  c.variant = "zero";
  const auto z = run_probe(c);
  ASSERT_TRUE(z.error.empty()) << z.error;
  for (const auto& row : z.rows) EXPECT_EQ(row.measured, 0.0);
  c.variant = "one";
  const auto r = run_probe(c);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(find_check(r, "defect_increase_in_k_max")->value, 1e-12);
}

TEST(Superposition, DisjointEqualMassIsEquality) {
  const Grid g = make_grid({{0.0, 4.0}}, {8});
  SampledField a(g), b(g);
  a.values[1] = 2.0;
  b.values[5] = cplx(0, 2.0);
  EXPECT_NEAR(superposition_ratio({a, b}, 0.5), 1.0, 1e-15);
  b.values[1] = 1.0;
  EXPECT_LT(superposition_ratio({a, b}, 0.5), 1.0);
  EXPECT_THROW(superposition_ratio({a}, 1.5), precondition_error);
}

TEST(Superposition, RandomSlackAndFourierDisjoint) {
  const auto r = run_probe(cfg("superposition", {0.25, 0.5, 1}, 10));
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.metrics.at("slack_s0"), 0);
  auto c = cfg("superposition", {1, 2, 3}, 4);
  c.variant = "fourier_disjoint";
  const auto f = run_probe(c);
  ASSERT_TRUE(f.error.empty()) << f.error;
  EXPECT_LE(find_check(f, "plancherel_equality")->value, 1e-10);
  EXPECT_TRUE(f.pass);
  c.params["spacing"] = 0.5;
  EXPECT_NE(run_probe(c).error.find("overlap"), std::string::npos);
}

TEST(LoomisWhitney, EqualityCases) {
  auto c = cfg("loomis_whitney", {2, 3, 4}, 1);
  c.variant = "indicator";
  const auto r = run_probe(c);
  for (const auto& row : r.rows) EXPECT_NEAR(row.measured, 1.0, 1e-14);
  auto p = cfg("loomis_whitney", {3, 5}, 20);
  p.dim = 1;
  const auto q = run_probe(p);
  for (const auto& t : q.trials)
    if (t.status == "ok") EXPECT_NEAR(t.value, 1.0, 1e-12);
  auto big = cfg("loomis_whitney", {200}, 1);
  big.dim = 3;
  EXPECT_FALSE(run_probe(big).error.empty());
}

TEST(LoomisWhitney, RandomBounded) {
  const auto r = run_probe(cfg("loomis_whitney", {4}, 1000));
  EXPECT_LE(r.constant, 1 + 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(LatticeWindow, ProfileAgainstOracles) {
  const auto w = make_lattice_window(1, 4, 1.0, 0.0);
  // Central B-spline of order 8 at 0 is 151/315.
  EXPECT_NEAR(w.chi1(0), 0.25 / (151.0 / 315.0), 1e-14);
  // Unit mass, by Gauss-Legendre over a long window.
  const double mass = oracle::gauss_legendre([&](double t) { return w.chi1(t); }, -400.0, 400.0, 8000);
  EXPECT_NEAR(mass, 1.0, 1e-6);
  EXPECT_GE(w.chi1(0.37), 0.0);
  EXPECT_THROW(make_lattice_window(4, 4, 1, 0), precondition_error);
  EXPECT_THROW(make_lattice_window(2, 4, -1, 0), precondition_error);
}

TEST(LatticeWindow, PartitionOfUnityAndZeroField) {
  const auto w = make_lattice_window(2, 4, 1.5, 0.3);
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(-7, 7);
  for (int i = 0; i < 200; ++i) EXPECT_NEAR(lattice_partition_sum(w, {u(g), u(g)}, 100), 1.0, 1e-6);
  SampledField zero(make_grid({{-2.0, 2.0}, {-2.0, 2.0}}, {8, 8}));
  EXPECT_EQ(weighted_window_sum(w, zero, 2, 8), 0.0);
}

TEST(LatticePartition, ProbeReportsConstants) {
  const auto r = run_probe(cfg("lattice_partition", {1, 2}, 2));
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_TRUE(std::isfinite(r.metrics.at("C_1")));
  EXPECT_TRUE(std::isfinite(r.metrics.at("C_2")));
  EXPECT_LE(find_check(r, "partition_deviation")->value, 1e-6);
  EXPECT_TRUE(r.pass);
}

TEST(Commutation, IdentityHolds) {
  const auto r = run_probe(cfg("commutation", {1, 2}, 4));
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_LE(r.rows[0].measured, 1e-6);
  EXPECT_LE(r.rows[1].measured, 1e-5);
  EXPECT_GT(r.metrics.at("opposite_sign_defect"), 1e-3);
  auto c = cfg("commutation", {1}, 4);
  c.variant = "xj_zero";
  EXPECT_LE(run_probe(c).rows[0].measured, 1e-8);
  c.scales = {3};
  EXPECT_FALSE(run_probe(c).error.empty());
}

TEST(MrGrowth, RejectionsLoggedAndGuards) {
  auto c = cfg("mr_growth", {16, 32}, 4);
  const auto r = run_probe(c);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_GT(r.rejected, 0);
  EXPECT_TRUE(std::any_of(r.trials.begin(), r.trials.end(), [](const TrialRecord& t) { return t.status == "rejected"; }));
  EXPECT_EQ(find_check(r, "accepted_margin_violations")->value, 0.0);
  EXPECT_EQ(r.metrics.at("accepted_R0"), 4.0);
  auto lowR = c;
  lowR.scales = {4, 8};
  EXPECT_FALSE(run_probe(lowR).error.empty());
  auto flat = c;
  flat.params["nu_min"] = 0.99;
  EXPECT_NE(run_probe(flat).error.find("transverse"), std::string::npos);
}

TEST(Probes, DeterministicAcrossThreadCounts) {
  const std::vector<ProbeConfig> cs = {cfg("hausdorff_young", {1, 1.5}, 8), cfg("khintchine", {4, 8}, 8),
                                       cfg("superposition", {0.5, 1}, 8), cfg("mr_growth", {16, 32}, 3)};
  std::vector<ProbeReport> one, many;
  omp_set_num_threads(1);
  for (const auto& c : cs) one.push_back(run_probe(c));
  omp_set_num_threads(4);
  for (const auto& c : cs) many.push_back(run_probe(c));
  omp_set_num_threads(omp_get_num_procs());
  EXPECT_EQ(format_json(one), format_json(many));
  EXPECT_EQ(format_csv(one), format_csv(many));
}

TEST(Probes, ShrinkingTolerancesNeverFlipFailToPass) {
  const std::vector<ProbeConfig> cs = {cfg("khintchine", {4, 8, 16}, 20), cfg("knapp", {0.25, 0.125}, 1),
                                       cfg("stein_tomas", {2, 3, 4}, 1), cfg("superposition", {0.5, 1}, 5),
                                       cfg("loomis_whitney", {3}, 20), cfg("commutation", {1}, 2)};
  for (const auto& base : cs) {
    bool prev = true;
    for (double f : {4.0, 1.0, 0.25, 1e-3, 1e-8}) {
      auto c = base;
      c.slope_tol *= f;
      c.defect_tol *= f;
      const bool pass = run_probe(c).pass;
      EXPECT_TRUE(prev || !pass) << c.probe << " flipped to pass at factor " << f;
      prev = pass;
    }
  }
}

TEST(Probes, FitPointCountMatchesUnskippedScales) {
  auto c = cfg("khintchine", {2, 4, 8}, 4);
  const auto r = run_probe(c);
  ASSERT_TRUE(r.fit);
  EXPECT_EQ(r.fit->point_count, 3);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_LT(r.rows[0].scale, r.rows[2].scale);
}
