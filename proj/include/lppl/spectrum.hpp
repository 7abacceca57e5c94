#pragma once

// Lowest eigenpairs of Hermitian matrix-free operators: block Lanczos with full
// reorthogonalization and thick restarts, plus a dense oracle for small spaces.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lppl/errors.hpp"
#include "lppl/local_ops.hpp"
#include "lppl/random.hpp"

namespace lppl {

struct SolverOptions {
  std::size_t k = 4;                     // number of lowest eigenpairs
  double tol = 1e-10;                    // residual tolerance ||H v - E v||
  std::size_t max_matvecs = 20000;
  std::size_t max_basis = 0;             // 0 selects max(64, 6k) capped by the dimension
  std::uint64_t seed = 0x5eedULL;
  std::optional<double> degeneracy_tol;  // default 1e-8 * max(1, |E0|)
  bool allow_unconverged = false;        // return the best pairs instead of throwing
};

inline double default_degeneracy_tol(double e0) { return 1e-8 * std::max(1.0, std::abs(e0)); }

struct SpectralResult {
  std::vector<double> energies;        // ascending
  Matrix vectors;                      // orthonormal columns, same order
  std::vector<double> residual_norms;
  bool degeneracy_flag = false;        // E1 - E0 within the degeneracy tolerance
  double gap = std::numeric_limits<double>::quiet_NaN();  // first level above the ground cluster minus E0
  std::size_t cluster_size = 0;
  bool converged = false;
  std::size_t matvecs = 0;
  std::size_t restarts = 0;
  double wall_seconds = 0.0;

  double max_residual() const {
    return residual_norms.empty() ? 0.0 : *std::max_element(residual_norms.begin(), residual_norms.end());
  }
};

namespace detail {

/// Groups the lowest levels into the ground cluster and derives gap and degeneracy flag.
inline void classify_levels(SpectralResult& r, std::optional<double> degeneracy_tol) {
  if (r.energies.empty()) return;
  const double e0 = r.energies.front();
  const double tol = degeneracy_tol.value_or(default_degeneracy_tol(e0));
  r.cluster_size = 0;
  while (r.cluster_size < r.energies.size() && r.energies[r.cluster_size] - e0 <= tol) ++r.cluster_size;
  r.degeneracy_flag = r.cluster_size > 1;
  r.gap = r.cluster_size < r.energies.size() ? r.energies[r.cluster_size] - e0
                                             : std::numeric_limits<double>::quiet_NaN();
}

/// Orthogonalizes the columns of block against basis (twice) and among themselves.
/// Columns that collapse are replaced by random directions while the space allows.
inline Matrix orthonormal_extension(const Matrix& basis, Matrix block, Rng& rng) {
  const Eigen::Index n = block.rows();
  std::vector<Vector> kept;
  const Eigen::Index room = n - basis.cols();
  for (Eigen::Index c = 0; c < block.cols() && static_cast<Eigen::Index>(kept.size()) < room; ++c) {
    Vector v = block.col(c);
    for (int attempt = 0; attempt < 3; ++attempt) {
      const double before = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) v -= basis * (basis.adjoint() * v);
        for (const auto& q : kept) v -= q * q.dot(v);
      }
      const double after = v.norm();
      if (after > 1e-10 * std::max(before, 1e-300) && after > 1e-300) {
        kept.push_back(v / after);
        break;
      }
      v = random_complex_matrix(n, 1, rng).col(0);
    }
  }
  Matrix out(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = kept[i];
  return out;
}

inline void append_columns(Matrix& m, const Matrix& extra) {
  const Eigen::Index old = m.cols();
  m.conservativeResize(extra.rows(), old + extra.cols());
  m.rightCols(extra.cols()) = extra;
}

} // namespace detail

/// k lowest eigenpairs of a Hermitian operator.
inline SpectralResult lowest_eigenpairs(const EmbeddedOperator& h, const SolverOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<Eigen::Index>(h.dimension());
  const auto k = static_cast<Eigen::Index>(opt.k);
  if (k < 1) throw DimensionError("lowest_eigenpairs: k must be positive");
  if (n < k)
    throw DimensionError("lowest_eigenpairs: Hilbert dimension " + std::to_string(n) + " is smaller than k = " +
                         std::to_string(k));
  const Eigen::Index block = std::min<Eigen::Index>(n, std::max<Eigen::Index>(k, 2));
  Eigen::Index max_basis = opt.max_basis ? static_cast<Eigen::Index>(opt.max_basis)
                                         : std::max<Eigen::Index>(64, 6 * k);
  max_basis = std::min(n, std::max(max_basis, k + 2 * block));
  const Eigen::Index keep_target = std::min(max_basis - block, std::max(k + block, max_basis / 2));

  Rng rng(derive_seed(opt.seed, "krylov-start"));
  SpectralResult out;

  Matrix basis(n, 0);
  Matrix image(n, 0);
  auto push = [&](const Matrix& cols) {
    Matrix hcols = h.apply(cols);
    out.matvecs += static_cast<std::size_t>(cols.cols());
    detail::append_columns(basis, cols);
    detail::append_columns(image, hcols);
    return hcols;
  };

  Matrix newest = push(detail::orthonormal_extension(basis, random_complex_matrix(n, block, rng), rng));
  double best_residual = std::numeric_limits<double>::infinity();
  // Residuals can bottom out above tol (roundoff scales with ||H||); give up after a
  // run of restarts without a halving of the best residual.
  double stall_mark = best_residual;
  std::size_t stalled = 0;
  constexpr std::size_t kStallRestarts = 25;

  for (;;) {
    while (basis.cols() < max_basis) {
      Matrix next = detail::orthonormal_extension(basis, newest, rng);
      if (next.cols() == 0) break;
      if (basis.cols() + next.cols() > max_basis) next.conservativeResize(n, max_basis - basis.cols());
      newest = push(next);
    }

    Matrix t = basis.adjoint() * image;
    t = 0.5 * (t + t.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const RealVector& theta = es.eigenvalues();
    const Eigen::Index want = std::min<Eigen::Index>(k, basis.cols());
    Matrix ritz = basis * es.eigenvectors().leftCols(want);
    Matrix hritz = image * es.eigenvectors().leftCols(want);

    out.residual_norms.assign(static_cast<std::size_t>(want), 0.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < want; ++i) {
      const double r = (hritz.col(i) - theta(i) * ritz.col(i)).norm();
      out.residual_norms[static_cast<std::size_t>(i)] = r;
      worst = std::max(worst, r);
    }
    const bool whole_space = basis.cols() == n;
    out.converged = worst <= opt.tol;
    if (out.converged || whole_space) {
      // The stored image drifts through restarts; confirm with fresh products.
      hritz = h.apply(ritz);
      out.matvecs += static_cast<std::size_t>(want);
      worst = 0.0;
      for (Eigen::Index i = 0; i < want; ++i) {
        const double r = (hritz.col(i) - theta(i) * ritz.col(i)).norm();
        out.residual_norms[static_cast<std::size_t>(i)] = r;
        worst = std::max(worst, r);
      }
      out.converged = worst <= opt.tol;
      if (!out.converged && !whole_space) {
        image = h.apply(basis);
        out.matvecs += static_cast<std::size_t>(basis.cols());
      }
    }
    best_residual = std::min(best_residual, worst);
    if (best_residual < 0.5 * stall_mark) {
      stall_mark = best_residual;
      stalled = 0;
    } else {
      ++stalled;
    }

    if (out.converged || whole_space || out.matvecs >= opt.max_matvecs || stalled >= kStallRestarts) {
      out.energies.assign(theta.data(), theta.data() + want);
      out.vectors = ritz;
      detail::classify_levels(out, opt.degeneracy_tol);
      out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!out.converged && !opt.allow_unconverged) {
        std::ostringstream msg;
        msg << "lowest_eigenpairs: no convergence to " << opt.tol << " after " << out.matvecs
            << " matrix-vector products (best residual " << best_residual << ")";
        throw SolverError(msg.str(), best_residual);
      }
      return out;
    }

    // Thick restart: keep the lowest Ritz vectors, continue with their residual block.
    ++out.restarts;
    const Eigen::Index keep = std::min(keep_target, basis.cols() - 1);
    const Matrix s = es.eigenvectors().leftCols(keep);
    Matrix kept_basis = basis * s;
    Matrix kept_image = image * s;
    const Eigen::Index nres = std::min(block, keep);
    Matrix residual = kept_image.leftCols(nres) - kept_basis.leftCols(nres) * theta.head(nres).asDiagonal();
    basis = std::move(kept_basis);
    image = std::move(kept_image);
    Matrix next = detail::orthonormal_extension(basis, residual, rng);
    if (next.cols() == 0) {
      newest = image.rightCols(std::min(block, image.cols()));
      continue;
    }
    newest = push(next);
  }
}

/// Full dense diagonalization; the reference every Krylov result is checked against.
inline SpectralResult dense_spectrum(const EmbeddedOperator& h, std::size_t cap = kDefaultDenseCap,
                                     std::optional<double> degeneracy_tol = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  Matrix m = h.to_dense(cap);
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  SpectralResult out;
  out.energies.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  out.vectors = es.eigenvectors();
  out.residual_norms.assign(out.energies.size(), 0.0);
  for (std::size_t i = 0; i < out.energies.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.residual_norms[i] = (m * out.vectors.col(c) - out.energies[i] * out.vectors.col(c)).norm();
  }
  out.converged = true;
  detail::classify_levels(out, degeneracy_tol);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Orthonormal basis of the ground cluster {E : E - E0 <= degeneracy_tol}.
struct GroundSpace {
  double energy = 0.0;
  Matrix basis;
  SpectralResult spectrum;

  std::size_t degeneracy() const noexcept { return static_cast<std::size_t>(basis.cols()); }
};

/// Solves with growing k until a level strictly above the ground cluster is seen.
inline GroundSpace ground_space(const EmbeddedOperator& h, SolverOptions opt = {}) {
  const std::size_t n = h.dimension();
  if (n == 0) throw DimensionError("ground_space: empty Hilbert space");
  opt.k = std::min(std::max<std::size_t>(opt.k, 2), n);
  for (int attempt = 0;; ++attempt) {
    SpectralResult r = lowest_eigenpairs(h, opt);
    const double e0 = r.energies.front();
    const double tol = opt.degeneracy_tol.value_or(default_degeneracy_tol(e0));
    const bool exhausted = r.energies.size() == n;
    if (r.cluster_size < r.energies.size()) {
      if (r.energies[r.cluster_size] - e0 <= 2.0 * tol)
        throw SolverError("ground_space: ground cluster is not separated from the next level", r.max_residual());
      GroundSpace g;
      g.energy = e0;
      g.basis = r.vectors.leftCols(static_cast<Eigen::Index>(r.cluster_size));
      g.spectrum = std::move(r);
      return g;
    }
    if (exhausted) {
      GroundSpace g;
      g.energy = e0;
      g.basis = r.vectors;
      g.spectrum = std::move(r);
      return g;
    }
    if (attempt >= 3) throw SolverError("ground_space: cluster still fills all requested levels", r.max_residual());
    opt.k = std::min(2 * opt.k, n);
  }
}

/// E1 - E0 after degeneracy grouping; NaN when the whole space is one cluster.
inline double spectral_gap(const EmbeddedOperator& h, SolverOptions opt = {}) {
  return ground_space(h, opt).spectrum.gap;
}

} // namespace lppl
