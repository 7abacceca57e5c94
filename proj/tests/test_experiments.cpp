#include <gtest/gtest.h>

#include <cmath>

#include "lppl/experiments.hpp"
#include "support/generators.hpp"

using namespace lppl;
using namespace lppl::testing;

namespace {

LpplRecord synthetic(Distance d, double value, std::size_t abs_y = 1) {
  LpplRecord r;
  r.dist_yx = d;
  r.abs_y = abs_y;
  r.norm_a = 1.0;
  r.discrepancy_obs = value;
  r.discrepancy_tracenorm = value;
  return r;
}

std::vector<Observable> sigma_z(Coord lo, Coord hi) {
  std::vector<Observable> out;
  for (Coord j = lo; j <= hi; ++j) out.push_back({LocalOperator(Site{j}, presets::pauli_z()), "z" + std::to_string(j)});
  return out;
}

LpplScenario chain_scenario(std::size_t n, double s, double p) {
  LpplScenario sc;
  sc.system = preset_chain(n, s);
  if (p != 0.0) sc.perturbation = Perturbation(LocalOperator(Site{0}, Matrix(p * presets::pauli_x())));
  sc.observables = sigma_z(1, static_cast<Coord>(n) - 1);
  sc.solver.tol = 1e-12;
  return sc;
}

Matrix dense_ground_projector(const EmbeddedOperator& h) {
  const SpectralResult d = dense_spectrum(h);
  return d.vectors.col(0) * d.vectors.col(0).adjoint();
}

} // namespace

TEST(Fit, ExactExponential) {
  std::vector<LpplRecord> recs;
  for (Distance d = 1; d <= 12; ++d) recs.push_back(synthetic(d, std::exp(-0.5 * static_cast<double>(d))));
  const DecayFit f = fit_decay(recs);
  EXPECT_EQ(f.status, FitStatus::ok);
  EXPECT_NEAR(f.c2_hat, 0.5, 1e-9);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(f.predict(4.0), std::exp(-2.0), 1e-12);
}

TEST(Fit, NoisyExponential) {
  Rng rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<LpplRecord> recs;
  for (Distance d = 0; d <= 20; ++d)
    recs.push_back(synthetic(d, 3.0 * std::exp(-0.2 * static_cast<double>(d)) * (1.0 + noise(rng))));
  const DecayFit f = fit_decay(recs);
  EXPECT_NEAR(f.c2_hat, 0.2, 0.02);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 0.1);
}

TEST(Fit, AbsYRegressor) {
  std::vector<LpplRecord> recs;
  for (Distance d = 1; d <= 8; ++d)
    for (std::size_t y = 1; y <= 3; ++y)
      recs.push_back(synthetic(d, std::exp(0.7 * static_cast<double>(y) - 0.4 * static_cast<double>(d)), y));
  FitOptions o;
  o.fit_abs_y = true;
  const DecayFit f = fit_decay(recs, o);
  EXPECT_NEAR(f.c2_hat, 0.4, 1e-9);
  EXPECT_NEAR(f.c1_hat, 0.7, 1e-9);
}

TEST(Fit, ConstantAndDegenerateInputs) {
  std::vector<LpplRecord> flat;
  for (Distance d = 1; d <= 6; ++d) flat.push_back(synthetic(d, 1e-3));
  EXPECT_FALSE(fit_decay(flat).decays());

  std::vector<LpplRecord> tiny;
  for (Distance d = 1; d <= 6; ++d) tiny.push_back(synthetic(d, 1e-15));
  EXPECT_EQ(fit_decay(tiny).status, FitStatus::below_measurable_range);

  std::vector<LpplRecord> two = {synthetic(1, 0.1), synthetic(2, 0.01)};
  EXPECT_EQ(fit_decay(two).status, FitStatus::too_few_points);
}

TEST(Fit, EnvelopeAndWindow) {
  std::vector<LpplRecord> recs;
  for (Distance d = 1; d <= 10; ++d) {
    recs.push_back(synthetic(d, std::exp(-static_cast<double>(d))));
    recs.push_back(synthetic(d, 1e-3 * std::exp(-static_cast<double>(d))));  // below the envelope
  }
  FitOptions o;
  o.min_distance = 3;
  o.max_distance = 8;
  const DecayFit f = fit_decay(recs, o);
  EXPECT_EQ(f.points.size(), 6u);
  EXPECT_NEAR(f.c2_hat, 1.0, 1e-9);
}

TEST(Scenario, NoPerturbationMeansNoDiscrepancy) {
  const auto recs = run_scenario(chain_scenario(8, 0.1, 0.0));
  for (const auto& r : recs) {
    EXPECT_LE(r.discrepancy_obs, 1e-9);
    EXPECT_LE(r.discrepancy_tracenorm, 1e-9);
    EXPECT_EQ(r.dist_yx, kInfiniteDistance);
  }
}

TEST(Scenario, NoInteractionsMeansNoDiscrepancyAwayFromX) {
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    LpplScenario sc = chain_scenario(4, 0.0, 0.0);
    sc.perturbation = Perturbation(LocalOperator(Site{0}, Matrix(5.0 * random_hermitian(2, rng))));
    sc.observables = sigma_z(0, 3);
    for (const auto& r : run_scenario(sc))
      if (r.dist_yx >= 1) EXPECT_LE(r.discrepancy_tracenorm, 1e-12);
  }
}

TEST(Scenario, CanonicalChainMatchesDenseOracle) {
  LpplScenario sc = chain_scenario(10, 0.1, 3.0);
  sc.solver.tol = 1e-13;
  sc.dense_cross_check = true;
  const auto recs = run_scenario(sc);

  const Matrix rho = dense_ground_projector(assemble(sc.system));
  const Matrix rho_p = dense_ground_projector(assemble(sc.system, sc.perturbation));
  for (const auto& r : recs) {
    const Matrix z = embed_dense(sc.observables[r.observable].op, sc.system.layout());
    const double oracle = std::abs(((rho_p - rho) * z).trace());
    EXPECT_NEAR(r.discrepancy_obs, oracle, 1e-11) << r.label;
    EXPECT_GE(r.discrepancy_tracenorm + 1e-14, r.discrepancy_obs / r.norm_a);
    EXPECT_LT(r.oracle_energy_error, 1e-9);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.dist_yx, static_cast<Distance>(r.observable + 1));
  }
  // Monotone upper envelope beyond 2R.
  for (std::size_t i = 2; i + 1 < recs.size(); ++i) {
    if (recs[i + 1].discrepancy_tracenorm < 1e-12) break;
    EXPECT_LE(recs[i + 1].discrepancy_tracenorm, recs[i].discrepancy_tracenorm);
  }
  FitOptions o;
  o.min_distance = 3;
  const DecayFit f = fit_decay(recs, o);
  EXPECT_TRUE(f.decays());
  EXPECT_GE(f.r_squared, 0.9);
}

TEST(Scenario, GeometryValidation) {
  LpplScenario sc = chain_scenario(6, 0.1, 1.0);
  sc.observables.push_back({LocalOperator(Site{9}, presets::pauli_z()), "outside"});
  EXPECT_THROW(run_scenario(sc), GeometryError);

  LpplScenario lg = chain_scenario(6, 0.1, 1.0);
  lg.defect = build_locally_weak_system(lg.system, SiteSet::interval(0, 3),
                                        LocalOperator(Site{5}, Matrix(presets::pauli_z())));
  EXPECT_THROW(run_local_gap_scenario(lg), GeometryError);  // observables reach into the defect
  lg.observables = sigma_z(1, 3);
  EXPECT_NO_THROW(run_local_gap_scenario(lg));
  EXPECT_THROW(run_local_gap_scenario(chain_scenario(6, 0.1, 1.0)), GeometryError);
}

TEST(LocalGap, ZeroDefectReducesToPlainScenario) {
  LpplScenario plain = chain_scenario(8, 0.1, 2.0);
  plain.observables = sigma_z(1, 4);
  LpplScenario lg = plain;
  lg.defect = build_locally_weak_system(plain.system, SiteSet::interval(0, 4),
                                        LocalOperator(Site{6}, Matrix(Matrix::Zero(2, 2))));
  const auto a = run_scenario(plain);
  const auto b = run_local_gap_scenario(lg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].discrepancy_obs, b[i].discrepancy_obs, 1e-10);
    EXPECT_EQ(b[i].dist_y_defect, 5 - static_cast<Distance>(i + 1));
    EXPECT_LE(b[i].tn_reference, 1e-9);
  }
}

TEST(LocalGap, TriangleAndMinDistanceRegressor) {
  LpplScenario sc = chain_scenario(10, 0.1, 3.0);
  Rng rng(5);
  const SpinSystem& ref = sc.system;
  sc.defect = build_locally_weak_system(ref, SiteSet::interval(0, 6),
                                        random_defect(ref.layout().sub_layout(SiteSet::interval(7, 9)), 2.0, rng));
  sc.observables = sigma_z(1, 6);
  const auto recs = run_local_gap_scenario(sc);
  for (const auto& r : recs) {
    EXPECT_LE(r.discrepancy_obs, r.obs_perturbed_reference + r.obs_reference + 1e-10);
    EXPECT_LE(r.discrepancy_tracenorm, r.tn_perturbed_reference + r.tn_reference + 1e-10);
    EXPECT_EQ(r.dist_y_defect, 7 - r.dist_yx);
  }
  FitOptions o;
  o.metric = Metric::trace_norm;
  o.regressor = Regressor::min_local_gap;
  const double r_min = fit_decay(recs, o).r_squared;
  o.regressor = Regressor::dist_yx;
  const DecayFit by_x = fit_decay(recs, o);
  o.regressor = Regressor::dist_y_defect;
  const DecayFit by_defect = fit_decay(recs, o);
  EXPECT_GE(r_min, by_x.decays() ? by_x.r_squared : 0.0);
  EXPECT_GE(r_min, by_defect.decays() ? by_defect.r_squared : 0.0);
}

TEST(GapCertificate, UnperturbedGapsAgree) {
  LpplScenario sc = chain_scenario(6, 0.1, 0.0);
  sc.perturbation = Perturbation(LocalOperator(Site{0}, Matrix(Matrix::Zero(2, 2))));
  const GapCertificate c = gap_closing_certificate(sc, {});
  EXPECT_NEAR(c.gap_h, c.gap_hp, 1e-9);
}

TEST(GapCertificate, NearDegenerateBranchesAllDecay) {
  const SpinSystem sys = preset_chain(9, 0.1);
  SolverOptions so;
  so.tol = 1e-13;
  const CrossingResult x = tune_level_crossing(
      [&](double t) { return assemble(sys, edge_mode_perturbation(Site{0}, t)); }, global_parity(sys.layout()), 0.5,
      1.5, 1e-5, so);
  LpplScenario sc;
  sc.system = sys;
  sc.perturbation = edge_mode_perturbation(Site{0}, x.parameter);
  sc.observables = sigma_z(3, 8);
  sc.solver = so;
  sc.solver.degeneracy_tol = 1e-4;  // group the crossing pair into one ground cluster
  FitOptions o;
  o.min_distance = 3;
  const GapCertificate c = gap_closing_certificate(sc, o);
  EXPECT_EQ(c.degeneracy_hp, 2u);
  EXPECT_EQ(c.per_branch.size(), 3u);  // two basis states and their mixture
  EXPECT_LT(c.gap_ratio(), 1.5);       // cluster-to-next-level gap, not the crossing
  for (const auto& b : c.per_branch) EXPECT_TRUE(b.decays()) << b.c2_hat;
  EXPECT_TRUE(c.decay_persists());
}

TEST(Crossing, EdgeModeClosesGap) {
  const SpinSystem sys = preset_chain(6, 0.1);
  SolverOptions so;
  so.tol = 1e-12;
  const double gap_h = spectral_gap(assemble(sys), so);
  const CrossingResult x = tune_level_crossing(
      [&](double t) { return assemble(sys, edge_mode_perturbation(Site{0}, t)); }, global_parity(sys.layout()), 0.5,
      1.5, 1e-3 * gap_h, so);
  const SpectralResult d = dense_spectrum(assemble(sys, edge_mode_perturbation(Site{0}, x.parameter)));
  EXPECT_LT(d.energies[1] - d.energies[0], 1e-3 * gap_h);
  EXPECT_THROW(tune_level_crossing([&](double t) { return assemble(sys, edge_mode_perturbation(Site{0}, t)); },
                                   global_parity(sys.layout()), 0.0, 0.3, 1e-3, so),
               ValidationError);
}

TEST(Defects, RandomDefectProperties) {
  Rng rng(8);
  const TensorLayout l = TensorLayout::uniform(SiteSet::interval(0, 2), 2);
  const LocalOperator q = random_defect(l, 4.0, rng);
  EXPECT_TRUE(q.is_hermitian());
  EXPECT_NEAR(operator_norm(q), 4.0, 1e-12);
  const LocalOperator qp = random_defect(l, 4.0, rng, true, 0.5);
  const RealVector p = global_parity(l);
  for (Eigen::Index a = 0; a < 8; ++a)
    for (Eigen::Index b = 0; b < 8; ++b)
      if (p(a) != p(b)) EXPECT_EQ(qp.matrix()(a, b), Complex(0.0));
}
