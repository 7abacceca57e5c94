#include <gtest/gtest.h>

#include <cmath>

#include "lppl/spectrum.hpp"
#include "support/generators.hpp"

using namespace lppl;
using namespace lppl::testing;

TEST(Eigen, ProductSystem) {
  const SpinSystem sys = preset_chain(5, 0.0);
  const SpectralResult r = lowest_eigenpairs(assemble(sys));
  EXPECT_NEAR(r.energies[0], 0.0, 1e-10);
  EXPECT_NEAR(std::abs(r.vectors.col(0).dot(sys.product_ground_vector())), 1.0, 1e-10);
  EXPECT_NEAR(spectral_gap(assemble(sys)), 1.0, 1e-9);
}

TEST(Eigen, TwoSiteChainClosedForm) {
  const double s = 0.1;
  const EmbeddedOperator h = assemble(preset_chain(2, s));
  const SpectralResult r = lowest_eigenpairs(h, {.k = 2});
  EXPECT_NEAR(r.energies[0], 1.0 - std::sqrt(1.01), 1e-10);
  EXPECT_NEAR(r.energies[1], 1.0 - s, 1e-10);
  EXPECT_NEAR(spectral_gap(h), (1.0 - s) - (1.0 - std::sqrt(1.0 + s * s)), 1e-10);
  EXPECT_NEAR(spectral_gap(h), 0.90499, 1e-5);
}

TEST(Eigen, KrylovMatchesDense) {
  for (std::uint64_t i = 0; i < 15; ++i) {
    RandomSystemOptions o;
    o.max_sites = 8;
    o.max_dim = 256;
    const SpinSystem sys = random_system(derive_seed(i, "eigen"), o);
    const EmbeddedOperator h = assemble(sys);
    SolverOptions so;
    so.seed = i;
    const SpectralResult k = lowest_eigenpairs(h, so);
    const SpectralResult d = dense_spectrum(h);
    ASSERT_TRUE(k.converged);
    for (std::size_t j = 0; j < k.energies.size(); ++j) {
      EXPECT_NEAR(k.energies[j], d.energies[j], 1e-9);
      if (j > 0) EXPECT_LE(k.energies[j - 1], k.energies[j] + 1e-12);
      EXPECT_LE(k.residual_norms[j], so.tol);
    }
    if (d.energies[1] - d.energies[0] > 1e-6)
      EXPECT_GE(std::abs(k.vectors.col(0).dot(d.vectors.col(0))), 1.0 - 1e-8);
    const Matrix gram = k.vectors.adjoint() * k.vectors;
    EXPECT_LT((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-10);
    // Variational bound for the product state.
    const Vector p = sys.product_ground_vector();
    EXPECT_GE(p.dot(h.apply(p)).real(), k.energies[0] - 1e-12);
  }
}

TEST(Eigen, Deterministic) {
  const EmbeddedOperator h = assemble(random_system(7, {.min_sites = 6, .max_sites = 6}));
  const SpectralResult a = lowest_eigenpairs(h, {.seed = 3});
  const SpectralResult b = lowest_eigenpairs(h, {.seed = 3});
  EXPECT_EQ(a.energies, b.energies);
}

TEST(Eigen, TwoFoldDegenerateGroundSpace) {
  // A chain plus one decoupled spectator qubit whose on-site gap is cancelled:
  // the spectrum is that of the chain, doubled.
  const SpinSystem chain = preset_chain(3, 0.1);
  const SpinSystem sys = extend_system(chain, TensorLayout::uniform(SiteSet::interval(0, 3), 2), OnSiteSpec{});
  const Perturbation p(LocalOperator(Site{3}, Matrix(-presets::projector(2, 1))));
  const EmbeddedOperator h = assemble(sys, p);
  const GroundSpace g = ground_space(h);
  EXPECT_EQ(g.degeneracy(), 2u);
  const SpectralResult d = dense_spectrum(h);
  EXPECT_EQ(d.cluster_size, 2u);
  EXPECT_NEAR(g.energy, dense_spectrum(assemble(chain)).energies[0], 1e-10);
  EXPECT_TRUE(g.spectrum.degeneracy_flag);
}

TEST(Eigen, ClusterMatchesDense) {
  for (std::uint64_t i = 0; i < 10; ++i) {
    const SpinSystem sys = random_system(derive_seed(i, "cluster"));
    const EmbeddedOperator h = assemble(sys);
    EXPECT_EQ(ground_space(h, {.seed = i}).degeneracy(), dense_spectrum(h).cluster_size);
  }
}

TEST(Eigen, NearlyClosedGap) {
  // -t|1><1| at the edge: bisect t on the dense spectrum until the two parity
  // sectors nearly cross.
  const SpinSystem sys = preset_chain(6, 0.1);
  auto h_of = [&](double t) { return assemble(sys, Perturbation(LocalOperator(Site{0}, Matrix(-t * presets::projector(2, 1))))); };
  auto odd_ground = [&](double t) {
    const SpectralResult d = dense_spectrum(h_of(t));
    double parity = 0.0;
    for (Eigen::Index i = 0; i < d.vectors.rows(); ++i)
      parity += (__builtin_popcountll(static_cast<unsigned long long>(i)) % 2 ? -1.0 : 1.0) * std::norm(d.vectors(i, 0));
    return parity < 0.0;
  };
  double lo = 0.5, hi = 1.5;
  ASSERT_NE(odd_ground(lo), odd_ground(hi));
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (odd_ground(mid) == odd_ground(lo) ? lo : hi) = mid;
  }
  const EmbeddedOperator h = h_of(0.5 * (lo + hi));
  const SpectralResult d = dense_spectrum(h);
  const double gap = d.energies[1] - d.energies[0];
  EXPECT_LT(gap, 1e-3);
  EXPECT_NEAR(lowest_eigenpairs(h, {.tol = 1e-12}).energies[1] - lowest_eigenpairs(h, {.tol = 1e-12}).energies[0], gap,
              1e-9);
}

TEST(Eigen, Errors) {
  const EmbeddedOperator h = assemble(preset_chain(2, 0.1));
  EXPECT_THROW(lowest_eigenpairs(h, {.k = 5}), DimensionError);
  EXPECT_THROW(lowest_eigenpairs(assemble(preset_chain(8, 0.2)), {.tol = 1e-14, .max_matvecs = 4}), SolverError);
}
