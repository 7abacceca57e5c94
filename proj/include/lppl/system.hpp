#pragma once

// Weakly interacting spin systems H = sum_x h_x + sum_x Phi_x, perturbations,
// canonical restrictions, extensions, and systems that are weakly interacting
// only inside a region.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lppl/errors.hpp"
#include "lppl/lattice.hpp"
#include "lppl/local_ops.hpp"
#include "lppl/random.hpp"

namespace lppl {

inline constexpr double kOnsiteTolerance = 1e-10;

/// Single-site h_x >= 0 with non-degenerate zero-energy ground vector psi_x.
struct OnSiteTerm {
  Site site;
  LocalOperator h;
  double gap = 0.0;        // second-lowest eigenvalue of h
  Vector ground_vector;    // psi_x, phase fixed so its largest entry is real positive
};

/// Phi_x, indexed by its center x.
struct InteractionTerm {
  Site center;
  LocalOperator phi;
};

/// Hermitian P acting on H_X, X = support.
class Perturbation {
public:
  explicit Perturbation(LocalOperator op) : op_(std::move(op)) {
    if (op_.support().empty()) throw GeometryError("Perturbation: support X must be non-empty");
    op_.require_hermitian("perturbation");
  }

  const SiteSet& support() const noexcept { return op_.support(); }
  const LocalOperator& op() const noexcept { return op_; }

private:
  LocalOperator op_;
};

/// Validates h and computes its ground vector and gap. Throws ValidationError
/// when h is not Hermitian, not positive semi-definite with ground energy 0,
/// has a degenerate ground state, or has a gap below required_gap.
inline OnSiteTerm make_onsite_term(const Site& x, const Matrix& h, double required_gap) {
  LocalOperator op(x, h);
  op.require_hermitian("on-site term");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const RealVector& ev = es.eigenvalues();
  const std::string where = " at " + to_string(x);
  if (std::abs(ev(0)) > kOnsiteTolerance)
    throw ValidationError("on-site term" + where + " has lowest eigenvalue " + std::to_string(ev(0)) +
                          ", expected 0");
  double gap = std::numeric_limits<double>::infinity();
  if (ev.size() > 1) {
    gap = ev(1) - ev(0);
    if (gap <= kOnsiteTolerance) throw ValidationError("on-site term" + where + " has a degenerate ground state");
    if (gap < required_gap - kOnsiteTolerance)
      throw ValidationError("on-site term" + where + " has gap " + std::to_string(gap) + " below g = " +
                            std::to_string(required_gap));
  }
  Vector psi = es.eigenvectors().col(0);
  Eigen::Index imax = 0;
  psi.cwiseAbs().maxCoeff(&imax);
  psi *= std::conj(psi(imax)) / std::abs(psi(imax));
  if ((h * psi).norm() > kOnsiteTolerance) throw ValidationError("on-site term" + where + ": h psi != 0");
  return OnSiteTerm{x, std::move(op), gap, std::move(psi)};
}

/// h = g (1 - |psi><psi|).
inline Matrix gap_projector(double g, const Vector& psi) {
  if (psi.norm() == 0.0) throw ValidationError("gap_projector: zero ground vector");
  const Vector u = psi / psi.norm();
  return g * (Matrix::Identity(u.size(), u.size()) - u * u.adjoint());
}

/// On-site specification, uniform over the sites it is applied to.
struct OnSiteSpec {
  struct GapProjector {
    Vector ground_vector;  // empty: basis state |0>
  };
  struct Literal {
    Matrix h;
  };
  std::variant<GapProjector, Literal> form = GapProjector{};
};

/// Interaction specification.
struct InteractionSpec {
  struct None {};
  /// Phi_x = s * sum over lattice directions i with x+e_i in Lambda of A_x B_{x+e_i}.
  struct NearestNeighbor {
    Matrix left;
    Matrix right;
  };
  /// Phi_x = s * G_x / ||G_x|| with G_x a random Hermitian matrix on b_x(R).
  struct RandomBall {
    std::uint64_t seed = 0;
  };
  struct Literal {
    std::vector<InteractionTerm> terms;
  };
  std::variant<None, NearestNeighbor, RandomBall, Literal> form = None{};
  double strength = 0.0;
};

/// Validated weakly interacting spin system on a finite lattice.
class SpinSystem {
public:
  SpinSystem() = default;

  const TensorLayout& layout() const noexcept { return layout_; }
  const SiteSet& lattice() const noexcept { return layout_.sites(); }
  const std::vector<OnSiteTerm>& onsite() const noexcept { return onsite_; }
  const std::vector<InteractionTerm>& interactions() const noexcept { return interactions_; }
  Distance range() const noexcept { return range_; }
  double gap() const noexcept { return gap_; }
  double strength() const noexcept { return strength_; }
  std::size_t dimension() const noexcept { return layout_.dimension(); }

  const OnSiteTerm& onsite_at(const Site& x) const {
    auto i = lattice().index_of(x);
    if (i == lattice().size()) throw GeometryError("onsite_at: " + to_string(x) + " not in lattice");
    return onsite_[i];
  }

  /// (x) psi_x in canonical order.
  Vector product_ground_vector() const {
    Vector v = Vector::Ones(1);
    for (const auto& t : onsite_) {
      Vector next(v.size() * t.ground_vector.size());
      for (Eigen::Index i = 0; i < v.size(); ++i)
        next.segment(i * t.ground_vector.size(), t.ground_vector.size()) = v(i) * t.ground_vector;
      v = std::move(next);
    }
    return v;
  }

private:
  friend SpinSystem build_system(TensorLayout, std::vector<OnSiteTerm>, std::vector<InteractionTerm>, Distance,
                                 double);

  TensorLayout layout_;
  std::vector<OnSiteTerm> onsite_;
  std::vector<InteractionTerm> interactions_;
  Distance range_ = 1;
  double gap_ = 0.0;
  double strength_ = 0.0;
};

/// Assembles and validates a system from resolved terms.
inline SpinSystem build_system(TensorLayout layout, std::vector<OnSiteTerm> onsite,
                               std::vector<InteractionTerm> interactions, Distance range, double g) {
  if (range < 1) throw ValidationError("interaction range R must be positive");
  if (!(g > 0.0)) throw ValidationError("on-site gap g must be positive");
  const SiteSet& lattice = layout.sites();
  if (onsite.size() != lattice.size())
    throw ValidationError("expected exactly one on-site term per site: " + std::to_string(onsite.size()) +
                          " terms for " + std::to_string(lattice.size()) + " sites");
  std::sort(onsite.begin(), onsite.end(), [](const auto& a, const auto& b) { return a.site < b.site; });
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto& t = onsite[i];
    if (t.site != lattice[i])
      throw ValidationError("on-site terms do not cover the lattice exactly (at " + to_string(lattice[i]) + ")");
    if (static_cast<int>(t.h.dimension()) != layout.dims()[i])
      throw DimensionError("on-site term at " + to_string(t.site) + " does not match the local dimension");
    make_onsite_term(t.site, t.h.matrix(), g);  // re-validate
  }
  double strength = 0.0;
  for (const auto& term : interactions) {
    if (!lattice.contains(term.center))
      throw ValidationError("interaction center " + to_string(term.center) + " is outside the lattice");
    term.phi.require_hermitian("interaction term centered at " + to_string(term.center));
    const SiteSet allowed = ball(term.center, range, lattice);
    if (!term.phi.support().is_subset_of(allowed))
      throw ValidationError("range violation: interaction centered at " + to_string(term.center) +
                            " has support " + to_string(term.phi.support()) + " outside b_x(R) = " +
                            to_string(allowed));
    for (const auto& x : term.phi.support())
      if (term.phi.layout().local_dim(x) != layout.local_dim(x))
        throw DimensionError("interaction at " + to_string(term.center) + ": local dimension mismatch at " +
                             to_string(x));
    strength = std::max(strength, operator_norm(term.phi));
  }
  SpinSystem s;
  s.layout_ = std::move(layout);
  s.onsite_ = std::move(onsite);
  s.interactions_ = std::move(interactions);
  s.range_ = range;
  s.gap_ = g;
  s.strength_ = strength;
  return s;
}

inline std::vector<OnSiteTerm> resolve_onsite(const OnSiteSpec& spec, const TensorLayout& layout, double g) {
  std::vector<OnSiteTerm> out;
  out.reserve(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const int d = layout.dims()[i];
    Matrix h;
    if (const auto* gp = std::get_if<OnSiteSpec::GapProjector>(&spec.form)) {
      Vector psi = gp->ground_vector;
      if (psi.size() == 0) {
        psi = Vector::Zero(d);
        psi(0) = 1.0;
      }
      if (psi.size() != d) throw DimensionError("on-site ground vector has the wrong local dimension");
      h = gap_projector(g, psi);
    } else {
      h = std::get<OnSiteSpec::Literal>(spec.form).h;
      if (h.rows() != d) throw DimensionError("on-site matrix has the wrong local dimension");
    }
    out.push_back(make_onsite_term(layout.sites()[i], h, g));
  }
  return out;
}

inline std::vector<InteractionTerm> resolve_interactions(const InteractionSpec& spec, const TensorLayout& layout,
                                                         Distance range) {
  std::vector<InteractionTerm> out;
  const SiteSet& lattice = layout.sites();
  if (std::holds_alternative<InteractionSpec::None>(spec.form)) return out;
  if (const auto* lit = std::get_if<InteractionSpec::Literal>(&spec.form)) return lit->terms;
  if (const auto* nn = std::get_if<InteractionSpec::NearestNeighbor>(&spec.form)) {
    for (const auto& x : lattice) {
      std::vector<LocalOperator> bonds;
      for (std::size_t axis = 0; axis < lattice.dimension(); ++axis) {
        Site y = x;
        y.coords[axis] += 1;
        if (!lattice.contains(y)) continue;
        bonds.push_back(tensor(LocalOperator(x, nn->left), LocalOperator(y, nn->right)));
      }
      if (bonds.empty()) continue;
      SiteSet support = SiteSet::from_sites(lattice.dimension(), {x});
      for (const auto& b : bonds) support = support.set_union(b.support());
      const TensorLayout sl = layout.sub_layout(support);
      Matrix phi = Matrix::Zero(static_cast<Eigen::Index>(sl.dimension()), static_cast<Eigen::Index>(sl.dimension()));
      for (const auto& b : bonds) phi += embed_dense(b, sl);
      out.push_back(InteractionTerm{x, LocalOperator(sl, spec.strength * phi)});
    }
    return out;
  }
  const auto& rb = std::get<InteractionSpec::RandomBall>(spec.form);
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const Site& x = lattice[i];
    const TensorLayout sl = layout.sub_layout(ball(x, range, lattice));
    if (sl.dimension() > kDefaultDenseCap)
      throw CapacityError("random interaction ball at " + to_string(x) + " exceeds the dense cap");
    Rng rng(derive_seed(rb.seed, "interaction", i));
    Matrix g = random_hermitian(static_cast<Eigen::Index>(sl.dimension()), rng);
    const double n = operator_norm(LocalOperator(sl, g));
    out.push_back(InteractionTerm{x, LocalOperator(sl, (spec.strength / n) * g)});
  }
  return out;
}

/// build_system from declarative specs.
inline SpinSystem build_system(const TensorLayout& layout, const OnSiteSpec& onsite, const InteractionSpec& interactions,
                               Distance range, double g) {
  return build_system(layout, resolve_onsite(onsite, layout, g), resolve_interactions(interactions, layout, range),
                      range, g);
}

/// Every term of the system embedded on `target`, which must contain the system's lattice.
inline EmbeddedOperator assemble_on(const SpinSystem& system, const TensorLayout& target,
                                    const std::optional<Perturbation>& perturbation = std::nullopt) {
  if (!system.lattice().is_subset_of(target.sites()))
    throw GeometryError("assemble_on: system lattice is not contained in the target layout");
  std::vector<EmbeddedOperator> terms;
  for (const auto& t : system.onsite()) terms.push_back(embed(t.h, target));
  for (const auto& t : system.interactions()) terms.push_back(embed(t.phi, target));
  if (perturbation) {
    if (!perturbation->support().is_subset_of(target.sites()))
      throw GeometryError("perturbation support " + to_string(perturbation->support()) + " is not inside Lambda");
    terms.push_back(embed(perturbation->op(), target));
  }
  if (terms.empty()) return zero_operator(target.dimension());
  std::vector<Complex> ones(terms.size(), 1.0);
  return linear_combination(std::move(terms), std::move(ones));
}

/// H = H_0 + H_int, or H + P.
inline EmbeddedOperator assemble(const SpinSystem& system, const std::optional<Perturbation>& perturbation = std::nullopt) {
  if (perturbation && !perturbation->support().is_subset_of(system.lattice()))
    throw GeometryError("perturbation support " + to_string(perturbation->support()) + " is not inside Lambda");
  return assemble_on(system, system.layout(), perturbation);
}

/// Canonical restriction to sub_lattice: every on-site term in it, and the
/// interactions centered at x with dist(x, Lambda \ sub_lattice) > R.
inline SpinSystem restrict(const SpinSystem& system, const SiteSet& sub_lattice) {
  if (!sub_lattice.is_subset_of(system.lattice()))
    throw GeometryError("restrict: " + to_string(sub_lattice) + " is not a subset of Lambda");
  const SiteSet outside = system.lattice().set_difference(sub_lattice);
  std::vector<OnSiteTerm> onsite;
  for (const auto& t : system.onsite())
    if (sub_lattice.contains(t.site)) onsite.push_back(t);
  std::vector<InteractionTerm> kept;
  for (const auto& t : system.interactions()) {
    if (!sub_lattice.contains(t.center)) continue;
    if (set_distance(t.center, outside) > system.range()) kept.push_back(t);
  }
  return build_system(system.layout().sub_layout(sub_lattice), std::move(onsite), std::move(kept), system.range(),
                      system.gap());
}

/// H^Omega = H^Lambda + sum_{x in Omega \ Lambda} h_x; no interactions are added.
inline SpinSystem extend_system(const SpinSystem& system, const TensorLayout& omega, const OnSiteSpec& extension) {
  if (!system.lattice().is_subset_of(omega.sites()))
    throw GeometryError("extend_system: Lambda is not contained in Omega");
  for (const auto& x : system.lattice())
    if (omega.local_dim(x) != system.layout().local_dim(x))
      throw DimensionError("extend_system: Omega changes the local dimension at " + to_string(x));
  const SiteSet fresh = omega.sites().set_difference(system.lattice());
  std::vector<OnSiteTerm> onsite = system.onsite();
  auto added = resolve_onsite(extension, omega.sub_layout(fresh), system.gap());
  onsite.insert(onsite.end(), added.begin(), added.end());
  return build_system(omega, std::move(onsite), system.interactions(), system.range(), system.gap());
}

/// H = H_tilde + 1_{Lambda'} (x) Q: weakly interacting inside `region` only.
class LocallyWeakSystem {
public:
  LocallyWeakSystem(SpinSystem reference, SiteSet region, LocalOperator defect)
      : reference_(std::move(reference)), region_(std::move(region)), defect_(std::move(defect)) {}

  const SpinSystem& reference() const noexcept { return reference_; }
  const SiteSet& region() const noexcept { return region_; }
  const LocalOperator& defect() const noexcept { return defect_; }
  /// Lambda \ Lambda'.
  SiteSet outside() const { return reference_.lattice().set_difference(region_); }

  /// H, or H + P.
  EmbeddedOperator assemble(const std::optional<Perturbation>& perturbation = std::nullopt) const {
    EmbeddedOperator h = lppl::assemble(reference_, perturbation);
    return h + embed(defect_, reference_.layout());
  }

private:
  SpinSystem reference_;
  SiteSet region_;
  LocalOperator defect_;
};

/// Pairs a weakly interacting H_tilde with a defect Q supported in Lambda \ Lambda'.
/// No gap condition is imposed on the sum.
inline LocallyWeakSystem build_locally_weak_system(SpinSystem reference, SiteSet region, LocalOperator defect) {
  if (!region.is_subset_of(reference.lattice()))
    throw GeometryError("locally weak system: Lambda' = " + to_string(region) + " is not inside Lambda");
  if (defect.support().intersects(region))
    throw GeometryError("locally weak system: defect support " + to_string(defect.support()) +
                        " intersects Lambda' = " + to_string(region));
  if (!defect.support().is_subset_of(reference.lattice()))
    throw GeometryError("locally weak system: defect support is not inside Lambda");
  for (const auto& x : defect.support())
    if (defect.layout().local_dim(x) != reference.layout().local_dim(x))
      throw DimensionError("locally weak system: defect local dimension mismatch at " + to_string(x));
  defect.require_hermitian("defect Q");
  return LocallyWeakSystem(std::move(reference), std::move(region), std::move(defect));
}

} // namespace lppl
