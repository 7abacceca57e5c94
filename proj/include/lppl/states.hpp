#pragma once

// Density states, reduced states, trace distances, and numerical tests of the
// commutator characterization of ground states (globally and in the bulk).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lppl/errors.hpp"
#include "lppl/lattice.hpp"
#include "lppl/local_ops.hpp"
#include "lppl/random.hpp"
#include "lppl/spectrum.hpp"
#include "lppl/system.hpp"

namespace lppl {

inline constexpr double kTraceTolerance = 1e-10;

/// Positive unit-trace operator, stored as sum_i w_i |v_i><v_i| with orthonormal v_i.
class DensityState {
public:
  enum class Kind { pure, mixture, dense };

  static DensityState pure(TensorLayout layout, const Vector& psi) {
    check_length(layout, psi.size());
    const double n = psi.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("DensityState: zero or non-finite state vector");
    Matrix v = psi / n;
    return DensityState(std::move(layout), Kind::pure, {1.0}, std::move(v));
  }

  /// Weights must be non-negative and sum to one; columns must be orthonormal.
  static DensityState mixture(TensorLayout layout, std::vector<double> weights, Matrix vectors) {
    check_length(layout, vectors.rows());
    if (weights.size() != static_cast<std::size_t>(vectors.cols()))
      throw DimensionError("DensityState: weight count does not match the number of vectors");
    double total = 0.0;
    for (double w : weights) {
      if (w < -kTraceTolerance || !std::isfinite(w)) throw ValidationError("DensityState: negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > kTraceTolerance)
      throw ValidationError("DensityState: weights sum to " + std::to_string(total));
    const Matrix gram = vectors.adjoint() * vectors;
    if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > kTraceTolerance)
      throw ValidationError("DensityState: mixture vectors are not orthonormal");
    return DensityState(std::move(layout), Kind::mixture, std::move(weights), std::move(vectors));
  }

  /// Equal-weight mixture over an orthonormal basis, e.g. a degenerate ground space.
  static DensityState uniform_mixture(TensorLayout layout, const Matrix& basis) {
    if (basis.cols() == 0) throw ValidationError("uniform_mixture: empty basis");
    if (basis.cols() == 1) return pure(std::move(layout), basis.col(0));
    std::vector<double> w(static_cast<std::size_t>(basis.cols()), 1.0 / static_cast<double>(basis.cols()));
    return mixture(std::move(layout), std::move(w), basis);
  }

  /// Dense matrix input; eigendecomposed on construction.
  static DensityState dense(TensorLayout layout, const Matrix& rho, std::size_t cap = kDefaultDenseCap) {
    check_length(layout, rho.rows());
    if (rho.rows() != rho.cols()) throw DimensionError("DensityState: density matrix must be square");
    if (layout.dimension() > cap) throw CapacityError("DensityState: dense representation above the cap");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance)
      throw ValidationError("DensityState: density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    const RealVector& ev = es.eigenvalues();
    if (ev.minCoeff() < -kTraceTolerance) throw ValidationError("DensityState: density matrix is not positive");
    if (std::abs(ev.sum() - 1.0) > kTraceTolerance) throw ValidationError("DensityState: trace is not one");
    std::vector<double> w;
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = ev.size(); i-- > 0;)
      if (ev(i) > 1e-15) {
        w.push_back(ev(i));
        cols.push_back(i);
      }
    Matrix v(rho.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cols[j]);
    return DensityState(std::move(layout), Kind::dense, std::move(w), std::move(v));
  }

  const TensorLayout& layout() const noexcept { return layout_; }
  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  std::size_t rank() const noexcept { return weights_.size(); }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i)
      t += weights_[i] * vectors_.col(static_cast<Eigen::Index>(i)).squaredNorm();
    return t;
  }

  Matrix to_dense(std::size_t cap = kDefaultDenseCap) const {
    if (layout_.dimension() > cap) throw CapacityError("DensityState::to_dense: dimension above the cap");
    Matrix rho = Matrix::Zero(vectors_.rows(), vectors_.rows());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      rho += weights_[i] * vectors_.col(c) * vectors_.col(c).adjoint();
    }
    return rho;
  }

  /// tr(rho K) for an operator on the full layout.
  double energy(const EmbeddedOperator& k) const {
    double e = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const Vector v = vectors_.col(static_cast<Eigen::Index>(i));
      e += weights_[i] * v.dot(k.apply(v)).real();
    }
    return e;
  }

private:
  DensityState(TensorLayout layout, Kind kind, std::vector<double> w, Matrix v)
      : layout_(std::move(layout)), kind_(kind), weights_(std::move(w)), vectors_(std::move(v)) {}

  static void check_length(const TensorLayout& layout, Eigen::Index n) {
    if (static_cast<std::size_t>(n) != layout.dimension())
      throw DimensionError("DensityState: vector length " + std::to_string(n) + " does not match the layout dimension " +
                           std::to_string(layout.dimension()));
  }

  TensorLayout layout_;
  Kind kind_ = Kind::pure;
  std::vector<double> weights_;
  Matrix vectors_;
};

/// Tr_{Lambda \ Y} rho, in the canonical basis of Y.
inline Matrix partial_trace(const DensityState& rho, const SiteSet& y, std::size_t cap = kDefaultDenseCap) {
  const TensorLayout sub = rho.layout().sub_layout(y);
  if (sub.dimension() > cap)
    throw CapacityError("partial_trace: reduced dimension " + std::to_string(sub.dimension()) + " above the cap");
  const detail::FactorPlacement placement(rho.layout(), y);
  const auto dy = static_cast<Eigen::Index>(sub.dimension());
  const auto denv = static_cast<Eigen::Index>(placement.env_count);
  Matrix reduced = Matrix::Zero(dy, dy);
  Matrix block(dy, denv);
  for (std::size_t i = 0; i < rho.rank(); ++i) {
    const auto v = rho.vectors().col(static_cast<Eigen::Index>(i));
    Eigen::Index e = 0;
    placement.for_each_base([&](std::size_t base) {
      for (Eigen::Index s = 0; s < dy; ++s)
        block(s, e) = v(static_cast<Eigen::Index>(base + placement.offsets[static_cast<std::size_t>(s)]));
      ++e;
    });
    reduced.noalias() += rho.weights()[i] * block * block.adjoint();
  }
  return reduced;
}

/// tr(rho A) for A supported inside the state's lattice.
inline Complex expectation(const DensityState& rho, const LocalOperator& a) {
  const Matrix r = partial_trace(rho, a.support());
  return (r * a.matrix()).trace();
}

/// |tr((rho1 - rho2) A)|.
inline double observable_discrepancy(const DensityState& rho1, const DensityState& rho2, const LocalOperator& a) {
  if (!(rho1.layout() == rho2.layout())) throw GeometryError("observable_discrepancy: states live on different lattices");
  const Matrix diff = partial_trace(rho1, a.support()) - partial_trace(rho2, a.support());
  return std::abs((diff * a.matrix()).trace());
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// || Tr_{Lambda\Y} rho1 - Tr_{Lambda\Y} rho2 ||_1 = sup over ||A|| <= 1 on Y of |tr((rho1 - rho2) A)|.
inline double trace_distance_on(const DensityState& rho1, const DensityState& rho2, const SiteSet& y) {
  if (!(rho1.layout() == rho2.layout())) throw GeometryError("trace_distance_on: states live on different lattices");
  return trace_norm(partial_trace(rho1, y) - partial_trace(rho2, y));
}

/// rho (x) (x)_{x in Omega \ Lambda} |psi_x><psi_x| for the on-site ground vectors of `extended`.
inline DensityState extend_state(const DensityState& rho, const SpinSystem& extended) {
  const TensorLayout& omega = extended.layout();
  const SiteSet& lambda = rho.layout().sites();
  if (!(omega.sub_layout(lambda) == rho.layout()))
    throw GeometryError("extend_state: the state's layout is not a sub-layout of Omega");
  const SiteSet fresh = omega.sites().set_difference(lambda);
  Vector chi = Vector::Ones(1);
  for (const auto& x : fresh) {
    const Vector& psi = extended.onsite_at(x).ground_vector;
    Vector next(chi.size() * psi.size());
    for (Eigen::Index i = 0; i < chi.size(); ++i) next.segment(i * psi.size(), psi.size()) = chi(i) * psi;
    chi = std::move(next);
  }
  const detail::FactorPlacement placement(omega, lambda);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(omega.dimension()), static_cast<Eigen::Index>(rho.rank()));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    Eigen::Index e = 0;
    placement.for_each_base([&](std::size_t base) {
      for (std::size_t s = 0; s < placement.offsets.size(); ++s)
        out(static_cast<Eigen::Index>(base + placement.offsets[s]), c) =
            rho.vectors()(static_cast<Eigen::Index>(s), c) * chi(e);
      ++e;
    });
  }
  if (rho.rank() == 1) return DensityState::pure(omega, out.col(0));
  return DensityState::mixture(omega, rho.weights(), std::move(out));
}

// ---------------------------------------------------------------------------
// Commutator characterization of ground states: m(A) = Re tr(A^* [K, A] rho).

struct CommutatorTestOptions {
  std::size_t trials = 200;                // random local operators
  std::size_t adversarial_restarts = 200;  // coordinate-descent restarts, spread over the candidate supports
  std::size_t max_sweeps = 40;
  std::size_t max_support = 2;             // connected supports of at most this many sites
  bool hopping = true;                     // |phi_n><psi_j| operators when K is densely available
  std::size_t hopping_cap = 1024;
  std::size_t hopping_levels = 16;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

struct CommutatorWitness {
  std::string battery;
  SiteSet support;   // empty for global (hopping) operators
  Matrix matrix;     // on the support, or the full space for hopping operators
  double value = 0.0;
};

struct BatteryStats {
  std::string name;
  std::size_t evaluations = 0;
  double min_value = std::numeric_limits<double>::infinity();
};

struct CommutatorReport {
  std::vector<BatteryStats> batteries;
  double min_value = std::numeric_limits<double>::infinity();
  double tol = 1e-9;
  bool pass = true;
  std::optional<CommutatorWitness> witness;  // the minimizing operator

  const BatteryStats* battery(const std::string& name) const {
    for (const auto& b : batteries)
      if (b.name == name) return &b;
    return nullptr;
  }
};

namespace detail {

/// Connected subsets with at most max_size sites (sizes 1 and 2: sites and l1 bonds).
inline std::vector<SiteSet> small_connected_supports(const SiteSet& region, std::size_t max_size) {
  std::vector<SiteSet> out;
  if (max_size == 0) return out;
  for (const auto& x : region) out.push_back(SiteSet::from_sites(region.dimension(), {x}));
  if (max_size >= 2)
    for (std::size_t i = 0; i < region.size(); ++i)
      for (std::size_t j = i + 1; j < region.size(); ++j)
        if (l1_distance(region[i], region[j]) == 1)
          out.push_back(SiteSet::from_sites(region.dimension(), {region[i], region[j]}));
  return out;
}

/// Evaluates m(A) for one state and one K, caching K v_i.
class CommutatorForm {
public:
  CommutatorForm(const DensityState& rho, const EmbeddedOperator& k) : rho_(rho), k_(k) {
    for (std::size_t i = 0; i < rho.rank(); ++i) kv_.push_back(k.apply(Vector(rho.vectors().col(static_cast<Eigen::Index>(i)))));
  }

  double operator()(const EmbeddedOperator& a) const {
    double m = 0.0;
    for (std::size_t i = 0; i < rho_.rank(); ++i) {
      const Vector v = rho_.vectors().col(static_cast<Eigen::Index>(i));
      const Vector av = a.apply(v);
      m += rho_.weights()[i] * (av.dot(k_.apply(av)) - av.dot(a.apply(kv_[i]))).real();
    }
    return m;
  }

  /// Hermitian matrix Q with m(A) = a^dagger Q a, a = entries of A on `support` (row-major).
  Matrix quadratic_form(const SiteSet& support) const {
    const TensorLayout sub = rho_.layout().sub_layout(support);
    const auto d = static_cast<Eigen::Index>(sub.dimension());
    const Eigen::Index nvar = d * d;
    Matrix q = Matrix::Zero(nvar, nvar);
    for (std::size_t i = 0; i < rho_.rank(); ++i) {
      const Vector v = rho_.vectors().col(static_cast<Eigen::Index>(i));
      Matrix u(v.size(), nvar), ku(v.size(), nvar), z(v.size(), nvar);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) {
          Matrix unit = Matrix::Zero(d, d);
          unit(r, c) = 1.0;
          const EmbeddedOperator e = embed(LocalOperator(sub, unit), rho_.layout());
          const Eigen::Index col = r * d + c;
          u.col(col) = e.apply(v);
          ku.col(col) = k_.apply(Vector(u.col(col)));
          z.col(col) = e.apply(kv_[i]);
        }
      q += rho_.weights()[i] * (u.adjoint() * ku - u.adjoint() * z);
    }
    return 0.5 * (q + q.adjoint());
  }

private:
  const DensityState& rho_;
  const EmbeddedOperator& k_;
  std::vector<Vector> kv_;
};

/// Minimizes a^dagger Q a / a^dagger a by exact line minimization along one
/// coordinate at a time (2x2 generalized eigenproblems), from a random start.
inline std::pair<double, Vector> coordinate_descent(const Matrix& q, std::size_t max_sweeps, Rng& rng) {
  const Eigen::Index n = q.rows();
  Vector a = random_unit_vector(n, rng);
  double value = a.dot(q * a).real();
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const double before = value;
    for (Eigen::Index j = 0; j < n; ++j) {
      Matrix basis(n, 2);
      basis.col(0) = a;
      basis.col(1) = Vector::Zero(n);
      basis(j, 1) = 1.0;
      basis.col(1) -= a * a.dot(basis.col(1));
      const double nb = basis.col(1).norm();
      if (nb < 1e-12) continue;
      basis.col(1) /= nb;
      const Matrix small = basis.adjoint() * q * basis;
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (small + small.adjoint()));
      a = basis * es.eigenvectors().col(0);
      a /= a.norm();
      value = es.eigenvalues()(0);
    }
    if (before - value < 1e-15 * std::max(1.0, std::abs(value))) break;
  }
  return {value, a};
}

inline void record(CommutatorReport& rep, BatteryStats& stats, double value, const std::string& battery,
                   const SiteSet& support, const Matrix& matrix) {
  ++stats.evaluations;
  stats.min_value = std::min(stats.min_value, value);
  if (value < rep.min_value) {
    rep.min_value = value;
    rep.witness = CommutatorWitness{battery, support, matrix, value};
  }
}

/// Random-operator and adversarial batteries on supports inside `region`.
inline void local_batteries(CommutatorReport& rep, const CommutatorForm& form, const DensityState& rho,
                            const SiteSet& region, const CommutatorTestOptions& opt) {
  const auto supports = small_connected_supports(region, opt.max_support);
  if (supports.empty()) return;

  BatteryStats random{"random", 0, std::numeric_limits<double>::infinity()};
  for (std::size_t t = 0; t < opt.trials; ++t) {
    Rng rng(derive_seed(opt.seed, "commutator-random", t));
    std::uniform_int_distribution<std::size_t> pick(0, supports.size() - 1);
    const SiteSet& support = supports[pick(rng)];
    const TensorLayout sub = rho.layout().sub_layout(support);
    const auto d = static_cast<Eigen::Index>(sub.dimension());
    Matrix a = random_complex_matrix(d, d, rng);
    if (t % 2 == 0) a = 0.5 * (a + a.adjoint()).eval();
    a /= a.norm();
    const double m = form(embed(LocalOperator(sub, a), rho.layout()));
    record(rep, random, m, "random", support, a);
  }
  rep.batteries.push_back(random);

  BatteryStats adversarial{"adversarial", 0, std::numeric_limits<double>::infinity()};
  const std::size_t per_support =
      std::max<std::size_t>(4, (opt.adversarial_restarts + supports.size() - 1) / supports.size());
  for (std::size_t s = 0; s < supports.size(); ++s) {
    const Matrix q = form.quadratic_form(supports[s]);
    const auto d = static_cast<Eigen::Index>(rho.layout().sub_layout(supports[s]).dimension());
    for (std::size_t r = 0; r < per_support; ++r) {
      Rng rng(derive_seed(opt.seed, "commutator-adversarial", s * 100003 + r));
      auto [value, vec] = coordinate_descent(q, opt.max_sweeps, rng);
      Matrix a(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = vec(i * d + j);
      record(rep, adversarial, value, "adversarial", supports[s], a);
    }
  }
  rep.batteries.push_back(adversarial);
}

inline void finish(CommutatorReport& rep, double tol) {
  rep.tol = tol;
  rep.pass = rep.min_value >= -tol;
}

} // namespace detail

/// Checks tr(A^* [K, A] rho) >= -tol over random local operators, hopping
/// operators between eigenvectors of K and rho, and adversarial local search.
inline CommutatorReport ground_state_commutator_test(const DensityState& rho, const EmbeddedOperator& k,
                                                     const CommutatorTestOptions& opt = {}) {
  if (k.dimension() != rho.layout().dimension())
    throw DimensionError("ground_state_commutator_test: K and rho act on different spaces");
  CommutatorReport rep;
  const detail::CommutatorForm form(rho, k);
  detail::local_batteries(rep, form, rho, rho.layout().sites(), opt);

  if (opt.hopping && k.dimension() <= opt.hopping_cap) {
    BatteryStats hop{"hopping", 0, std::numeric_limits<double>::infinity()};
    const SpectralResult spec = dense_spectrum(k, opt.hopping_cap);
    const auto levels = std::min<Eigen::Index>(static_cast<Eigen::Index>(opt.hopping_levels), spec.vectors.cols());
    for (Eigen::Index n = 0; n < levels; ++n)
      for (std::size_t j = 0; j < rho.rank(); ++j) {
        const Vector phi = spec.vectors.col(n);
        const Vector psi = rho.vectors().col(static_cast<Eigen::Index>(j));
        const double m = form(rank_one(phi, psi));
        ++hop.evaluations;
        hop.min_value = std::min(hop.min_value, m);
        if (m < rep.min_value) {
          rep.min_value = m;
          rep.witness = CommutatorWitness{"hopping", SiteSet(rho.layout().sites().dimension()), phi * psi.adjoint(), m};
        }
      }
    rep.batteries.push_back(hop);
  }
  detail::finish(rep, opt.tol);
  return rep;
}

/// Ground state in the bulk of a system on Lambda* subset Lambda: the same
/// batteries, with A supported in the bulk of Lambda* and K the restricted
/// Hamiltonian embedded on the state's lattice. Throws GeometryError when the bulk is empty.
inline CommutatorReport bulk_ground_state_test(const DensityState& rho, const SpinSystem& restricted,
                                               const CommutatorTestOptions& opt = {}) {
  if (!restricted.lattice().is_subset_of(rho.layout().sites()))
    throw GeometryError("bulk_ground_state_test: Lambda* is not contained in the state's lattice");
  const SiteSet interior = bulk(restricted.lattice(), restricted.range());
  if (interior.empty())
    throw GeometryError("bulk_ground_state_test: empty bulk (Lambda* = " + to_string(restricted.lattice()) +
                        " has no site farther than 2R = " + std::to_string(2 * restricted.range()) +
                        " from its complement)");
  const EmbeddedOperator k = assemble_on(restricted, rho.layout());
  CommutatorReport rep;
  const detail::CommutatorForm form(rho, k);
  detail::local_batteries(rep, form, rho, interior, opt);
  detail::finish(rep, opt.tol);
  return rep;
}

} // namespace lppl
