#include <gtest/gtest.h>

#include "lppl/local_ops.hpp"
#include "support/generators.hpp"

using namespace lppl;
using namespace lppl::testing;

namespace {

// Explicit Kronecker product of per-site factors in canonical order.
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Dense single-site operator on a layout via Kronecker products.
Matrix kron_embed(const TensorLayout& layout, const Site& x, const Matrix& m) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const int d = layout.dims()[i];
    out = kron(out, layout.sites()[i] == x ? m : Matrix(Matrix::Identity(d, d)));
  }
  return out;
}

LocalOperator random_single(Rng& rng, const TensorLayout& layout, Site* where = nullptr) {
  const Site x = layout.sites()[uniform_index(rng, 0, layout.size() - 1)];
  if (where) *where = x;
  return LocalOperator(x, random_complex_matrix(layout.local_dim(x), layout.local_dim(x), rng));
}

double power_iteration_norm(const Matrix& m) {
  Vector v = Vector::Ones(m.cols());
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    Vector w = m.adjoint() * (m * v);
    lambda = w.norm();
    v = w / lambda;
  }
  return std::sqrt(lambda);
}

} // namespace

TEST(LocalOps, EmbedPauliZ) {
  const TensorLayout layout = TensorLayout::uniform(SiteSet::interval(0, 1), 2);
  const Matrix m = embed_dense(LocalOperator(Site{0}, presets::pauli_z()), layout);
  Matrix expect = Matrix::Zero(4, 4);
  expect.diagonal() << 1, 1, -1, -1;
  EXPECT_LT((m - expect).norm(), 1e-15);
}

TEST(LocalOps, EmbedIdentityIsIdentity) {
  Rng rng(1);
  const TensorLayout layout = random_layout(rng, 3, 4, 256);
  const Site x = layout.sites()[1];
  const EmbeddedOperator e = embed(LocalOperator(x, presets::identity(layout.local_dim(x))), layout);
  const Vector v = random_unit_vector(static_cast<Eigen::Index>(layout.dimension()), rng);
  EXPECT_LT((e.apply(v) - v).norm(), 1e-15);
}

TEST(LocalOps, EmbedMatchesKroneckerOracle) {
  Rng rng(2);
  for (int i = 0; i < 30; ++i) {
    const TensorLayout layout = random_layout(rng, 3, 3, 64, true);
    Site x;
    const LocalOperator a = random_single(rng, layout, &x);
    const Matrix oracle = kron_embed(layout, x, a.matrix());
    const auto n = static_cast<Eigen::Index>(layout.dimension());
    const Vector v = random_unit_vector(n, rng), w = random_unit_vector(n, rng);
    EXPECT_NEAR(std::abs(v.dot(embed(a, layout).apply(w)) - v.dot(oracle * w)), 0.0, 1e-12);
  }
}

TEST(LocalOps, TwoSiteEmbedMatchesOracle) {
  Rng rng(3);
  const TensorLayout layout(SiteSet::interval(0, 2), {2, 3, 2});
  const Matrix a = random_complex_matrix(2, 2, rng), b = random_complex_matrix(2, 2, rng);
  const LocalOperator ab = tensor(LocalOperator(Site{0}, a), LocalOperator(Site{2}, b));
  const Matrix oracle = kron(kron(a, Matrix::Identity(3, 3)), b);
  EXPECT_LT((embed_dense(ab, layout) - oracle).norm(), 1e-12);
}

TEST(LocalOps, EmbedErrors) {
  const TensorLayout layout = TensorLayout::uniform(SiteSet::interval(0, 1), 2);
  EXPECT_THROW(embed(LocalOperator(Site{5}, presets::pauli_x()), layout), GeometryError);
  EXPECT_THROW(embed(LocalOperator(Site{0}, presets::identity(3)), layout), DimensionError);
  EXPECT_THROW(TensorLayout::uniform(SiteSet::interval(0, 80), 2), DimensionError);
}

TEST(LocalOps, Commutator) {
  const TensorLayout layout = TensorLayout::uniform(SiteSet::interval(0, 0), 2);
  Matrix k = Matrix::Zero(2, 2);
  k(1, 1) = 1.0;
  Matrix a = Matrix::Zero(2, 2);
  a(1, 0) = 1.0;
  const EmbeddedOperator kk = embed(LocalOperator(Site{0}, k), layout);
  EXPECT_LT((commutator_action(kk, LocalOperator(Site{0}, a), layout).to_dense() - a).norm(), 1e-15);
  EXPECT_LT(commutator_action(kk, LocalOperator(Site{0}, presets::identity(2)), layout).to_dense().norm(), 1e-15);
}

TEST(LocalOps, DisjointSupportsCommute) {
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    const TensorLayout layout = random_layout(rng, 2, 4, 128);
    const std::size_t p = uniform_index(rng, 0, layout.size() - 1);
    const std::size_t q = (p + 1 + uniform_index(rng, 0, layout.size() - 2)) % layout.size();
    const Site x = layout.sites()[p], y = layout.sites()[q];
    const LocalOperator a(x, random_complex_matrix(layout.local_dim(x), layout.local_dim(x), rng));
    const LocalOperator b(y, random_complex_matrix(layout.local_dim(y), layout.local_dim(y), rng));
    const Matrix c = commutator_action(embed(a, layout), b, layout).to_dense();
    EXPECT_LT(c.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LocalOps, OperatorNorm) {
  EXPECT_NEAR(operator_norm(LocalOperator(Site{0}, presets::identity(3))), 1.0, 1e-15);
  EXPECT_NEAR(operator_norm(LocalOperator(Site{0}, presets::pauli_x())), 1.0, 1e-15);
  Rng rng(5);
  const TensorLayout three = TensorLayout::uniform(SiteSet::interval(0, 2), 2);
  for (int i = 0; i < 10; ++i) {
    const Matrix h = random_hermitian(8, rng);
    EXPECT_NEAR(operator_norm(LocalOperator(three, h)), power_iteration_norm(h), 1e-9);
    const Matrix g = random_complex_matrix(8, 8, rng);
    EXPECT_NEAR(operator_norm(LocalOperator(three, g)), power_iteration_norm(g), 1e-9);
  }
}

TEST(LocalOps, EmbedPreservesNorm) {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const TensorLayout layout = random_layout(rng, 2, 4, 128);
    const LocalOperator a = random_single(rng, layout);
    const Matrix full = embed_dense(a, layout);
    Eigen::JacobiSVD<Matrix> svd(full);
    EXPECT_NEAR(svd.singularValues()(0), operator_norm(a), 1e-10);
  }
}

TEST(LocalOps, HermitianGuard) {
  Matrix m = presets::pauli_x();
  m(0, 1) = 2.0;
  EXPECT_FALSE(LocalOperator(Site{0}, m).is_hermitian());
  EXPECT_THROW(LocalOperator(Site{0}, m).require_hermitian("test"), ValidationError);
  EXPECT_TRUE(LocalOperator(Site{0}, presets::pauli_y()).is_hermitian());
}

TEST(LocalOps, Presets) {
  EXPECT_LT((presets::by_name("pauli_z", 2) - presets::pauli_z()).norm(), 1e-15);
  EXPECT_NEAR((presets::raising(3) * presets::lowering(3)).trace().real(), 2.0, 1e-15);
  EXPECT_EQ(presets::projector(3, 2)(2, 2), Complex(1.0));
  EXPECT_THROW(presets::by_name("nonsense", 2), ValidationError);
}
