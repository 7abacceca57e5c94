#pragma once

// Discrepancy-versus-distance experiments for local perturbations of
// weakly interacting spin systems, and exponential decay fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lppl/errors.hpp"
#include "lppl/lattice.hpp"
#include "lppl/local_ops.hpp"
#include "lppl/spectrum.hpp"
#include "lppl/states.hpp"
#include "lppl/system.hpp"

namespace lppl {

inline constexpr double kNoiseFloor = 1e-12;

/// Observable A on Y = A.support().
struct Observable {
  LocalOperator op;
  std::string label;
};

/// Which distances control the decay.
enum class Geometry {
  plain,      // dist(Y, X)
  local_gap,  // min{dist(Y, X), dist(Y, Lambda \ Lambda')}
  bulk,       // min{dist(Y, Z^nu \ Lambda^o), dist(Y, X) - 2R}
};

inline const char* to_string(Geometry g) {
  switch (g) {
    case Geometry::plain: return "plain";
    case Geometry::local_gap: return "local_gap";
    case Geometry::bulk: return "bulk";
  }
  return "?";
}

struct LpplScenario {
  std::string id = "scenario";
  SpinSystem system;                          // H, or H_tilde in local-gap mode
  std::optional<LocallyWeakSystem> defect;    // required for Geometry::local_gap
  std::optional<Perturbation> perturbation;   // absent means P = 0
  std::vector<Observable> observables;
  Geometry geometry = Geometry::plain;
  SolverOptions solver;
  bool dense_cross_check = false;             // compare Krylov energies with dense diagonalization
  // Bookkeeping copied into every record.
  double strength_param = 0.0;
  double p_scale = 0.0;
  std::uint64_t seed = 0;
};

struct SolveDiagnostics {
  std::size_t matvecs = 0;
  std::size_t restarts = 0;
  double wall_seconds = 0.0;
  double max_residual = 0.0;
  bool converged = true;
  std::size_t degeneracy = 1;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LpplRecord {
  std::string scenario_id;
  std::size_t n_sites = 0;
  double s = 0.0;
  double p_scale = 0.0;
  std::size_t branch = 0;
  std::size_t observable = 0;
  std::string label;
  Distance dist_yx = kInfiniteDistance;
  Distance dist_y_defect = kInfiniteDistance;  // dist(Y, Lambda \ Lambda') in local-gap mode
  Distance dist_y_edge = kInfiniteDistance;    // dist(Y, Z^nu \ Lambda^o) in bulk mode
  std::size_t abs_y = 0;
  double norm_a = 0.0;
  double discrepancy_obs = 0.0;        // |tr((rho_P - rho) A)|
  double discrepancy_tracenorm = 0.0;  // ||(rho_P - rho)_Y||_1
  // Local-gap triangle route through the ground state of H_tilde.
  double obs_perturbed_reference = kNaN;  // |tr((rho_P - rho_tilde) A)|
  double obs_reference = kNaN;            // |tr((rho - rho_tilde) A)|
  double tn_perturbed_reference = kNaN;
  double tn_reference = kNaN;
  double gap_h = kNaN;
  double gap_hp = kNaN;
  double resid = 0.0;
  bool converged = true;
  double oracle_energy_error = kNaN;
  std::uint64_t seed = 0;
  SolveDiagnostics solve_h;
  SolveDiagnostics solve_hp;
};

/// Ground-state data of one Hamiltonian.
struct SolvedGround {
  GroundSpace space;
  std::vector<DensityState> branches;  // basis states, then the uniform mixture when degenerate
  SolveDiagnostics diag;
  double oracle_energy_error = kNaN;
};

inline SolvedGround solve_ground(const EmbeddedOperator& h, const TensorLayout& layout, SolverOptions opt,
                                 const std::string& stream, bool dense_check) {
  opt.seed = derive_seed(opt.seed, stream);
  opt.allow_unconverged = true;
  SolvedGround out;
  out.space = ground_space(h, opt);
  const auto& spec = out.space.spectrum;
  out.diag = SolveDiagnostics{spec.matvecs, spec.restarts, spec.wall_seconds, spec.max_residual(), spec.converged,
                              out.space.degeneracy()};
  for (Eigen::Index c = 0; c < out.space.basis.cols(); ++c)
    out.branches.push_back(DensityState::pure(layout, out.space.basis.col(c)));
  if (out.space.degeneracy() > 1) out.branches.push_back(DensityState::uniform_mixture(layout, out.space.basis));
  if (dense_check && h.dimension() <= kDefaultDenseCap) {
    const SpectralResult dense = dense_spectrum(h);
    double err = 0.0;
    for (std::size_t i = 0; i < spec.energies.size(); ++i) err = std::max(err, std::abs(spec.energies[i] - dense.energies[i]));
    out.oracle_energy_error = err;
  }
  return out;
}

namespace detail {

inline void validate_geometry(const LpplScenario& sc) {
  const SiteSet& lattice = sc.system.lattice();
  if (sc.geometry == Geometry::local_gap && !sc.defect)
    throw GeometryError("scenario '" + sc.id + "': local-gap geometry needs a defect");
  if (sc.defect && !(sc.defect->reference().layout() == sc.system.layout()))
    throw GeometryError("scenario '" + sc.id + "': defect system and scenario system differ");
  if (sc.perturbation && !sc.perturbation->support().is_subset_of(lattice))
    throw GeometryError("scenario '" + sc.id + "': perturbation support is not inside Lambda");
  for (std::size_t i = 0; i < sc.observables.size(); ++i) {
    const auto& y = sc.observables[i].op.support();
    const std::string name = sc.observables[i].label.empty() ? "#" + std::to_string(i) : sc.observables[i].label;
    if (!y.is_subset_of(lattice))
      throw GeometryError("observable " + name + " has support " + to_string(y) + " outside Lambda");
    if (sc.geometry == Geometry::local_gap && !y.is_subset_of(sc.defect->region()))
      throw GeometryError("observable " + name + " has support " + to_string(y) + " outside Lambda' = " +
                          to_string(sc.defect->region()));
  }
}

} // namespace detail

/// Solves H and H + P once each and evaluates every observable on every branch of H + P.
/// In local-gap mode the ground state of H_tilde is solved as well and both legs
/// of the triangle route are recorded.
inline std::vector<LpplRecord> run_scenario(const LpplScenario& sc) {
  detail::validate_geometry(sc);
  const TensorLayout& layout = sc.system.layout();
  const SiteSet& lattice = layout.sites();
  const EmbeddedOperator h = sc.defect ? sc.defect->assemble() : assemble(sc.system);
  const EmbeddedOperator hp = sc.defect ? sc.defect->assemble(sc.perturbation) : assemble(sc.system, sc.perturbation);

  const SolvedGround ground = solve_ground(h, layout, sc.solver, "solve-h", sc.dense_cross_check);
  const SolvedGround perturbed = solve_ground(hp, layout, sc.solver, "solve-hp", sc.dense_cross_check);
  std::optional<SolvedGround> reference;
  if (sc.defect) reference = solve_ground(assemble(sc.system), layout, sc.solver, "solve-reference", false);

  // rho: the (unique in the intended regime) ground state of H; uniform mixture if degenerate.
  const DensityState& rho = ground.branches.back();
  const DensityState* rho_tilde = reference ? &reference->branches.back() : nullptr;

  const SiteSet x = sc.perturbation ? sc.perturbation->support() : SiteSet(lattice.dimension());
  const SiteSet outside = sc.defect ? sc.defect->outside() : SiteSet(lattice.dimension());
  const SiteSet interior = bulk(lattice, sc.system.range());

  std::vector<LpplRecord> out;
  for (std::size_t b = 0; b < perturbed.branches.size(); ++b) {
    const DensityState& rho_p = perturbed.branches[b];
    for (std::size_t i = 0; i < sc.observables.size(); ++i) {
      const auto& a = sc.observables[i].op;
      const SiteSet& y = a.support();
      LpplRecord r;
      r.scenario_id = sc.id;
      r.n_sites = lattice.size();
      r.s = sc.strength_param;
      r.p_scale = sc.p_scale;
      r.branch = b;
      r.observable = i;
      r.label = sc.observables[i].label;
      r.dist_yx = set_distance(y, x);
      if (sc.defect) r.dist_y_defect = set_distance(y, outside);
      if (sc.geometry == Geometry::bulk) r.dist_y_edge = complement_distance(y, interior);
      r.abs_y = y.size();
      r.norm_a = operator_norm(a);
      r.discrepancy_obs = observable_discrepancy(rho_p, rho, a);
      r.discrepancy_tracenorm = trace_distance_on(rho_p, rho, y);
      if (rho_tilde) {
        r.obs_perturbed_reference = observable_discrepancy(rho_p, *rho_tilde, a);
        r.obs_reference = observable_discrepancy(rho, *rho_tilde, a);
        r.tn_perturbed_reference = trace_distance_on(rho_p, *rho_tilde, y);
        r.tn_reference = trace_distance_on(rho, *rho_tilde, y);
      }
      r.gap_h = ground.space.spectrum.gap;
      r.gap_hp = perturbed.space.spectrum.gap;
      r.resid = std::max(ground.diag.max_residual, perturbed.diag.max_residual);
      r.converged = ground.diag.converged && perturbed.diag.converged && (!reference || reference->diag.converged);
      r.oracle_energy_error = std::max(ground.oracle_energy_error, perturbed.oracle_energy_error);
      r.seed = sc.seed;
      r.solve_h = ground.diag;
      r.solve_hp = perturbed.diag;
      out.push_back(std::move(r));
    }
  }
  return out;
}

/// Local-gap scenario: every observable must lie in Lambda'; records carry
/// dist(Y, X) and dist(Y, Lambda \ Lambda').
inline std::vector<LpplRecord> run_local_gap_scenario(LpplScenario sc) {
  if (!sc.defect) throw GeometryError("run_local_gap_scenario: scenario '" + sc.id + "' has no defect");
  sc.geometry = Geometry::local_gap;
  return run_scenario(sc);
}

// ---------------------------------------------------------------------------
// Decay fits.

enum class Metric {
  observable,                   // |tr((rho_P - rho) A)| / ||A||
  trace_norm,                   // ||(rho_P - rho)_Y||_1
  reference_observable,         // |tr((rho - rho_tilde) A)| / ||A||
  reference_trace_norm,         // ||(rho - rho_tilde)_Y||_1
  perturbed_reference_observable,
  perturbed_reference_trace_norm,
};

enum class Regressor {
  dist_yx,
  dist_y_defect,
  min_local_gap,  // min{dist(Y,X), dist(Y, Lambda \ Lambda')}
  bulk_min,       // min{dist(Y, Z^nu \ Lambda^o), dist(Y,X) - 2R}
};

struct FitOptions {
  Metric metric = Metric::observable;
  Regressor regressor = Regressor::dist_yx;
  double noise_floor = kNoiseFloor;
  Distance min_distance = 0;
  Distance max_distance = kInfiniteDistance;
  Distance range = 1;       // R, used by Regressor::bulk_min
  bool fit_abs_y = false;   // |Y| as a second regressor
  std::optional<std::size_t> branch;  // restrict to one branch; default: envelope over all branches
};

enum class FitStatus { ok, non_decaying, too_few_points, below_measurable_range };

inline const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::ok: return "ok";
    case FitStatus::non_decaying: return "non_decaying";
    case FitStatus::too_few_points: return "too_few_points";
    case FitStatus::below_measurable_range: return "below_measurable_range";
  }
  return "?";
}

struct DecayPoint {
  Distance distance = 0;
  std::size_t abs_y = 0;
  double value = 0.0;
};

struct DecayFit {
  FitStatus status = FitStatus::too_few_points;
  double c2_hat = kNaN;
  double c1_hat = kNaN;
  double intercept = kNaN;  // log prefactor at distance 0
  double r_squared = kNaN;
  bool abs_y_fitted = false;       // c1_hat from a separate |Y| column rather than intercept / |Y|
  std::vector<DecayPoint> points;  // the envelope actually fitted
  std::vector<DecayPoint> envelope;  // all envelope points before the noise-floor cut

  bool decays() const noexcept { return status == FitStatus::ok && c2_hat > 0.0; }
  /// Fitted discrepancy at distance d (and |Y| when fitted).
  double predict(double d, double abs_y = 1.0) const {
    return std::exp(intercept - c2_hat * d + (abs_y_fitted ? c1_hat * abs_y : 0.0));
  }
};

inline double metric_value(const LpplRecord& r, Metric m) {
  const double scale = r.norm_a > 0.0 ? r.norm_a : 1.0;
  switch (m) {
    case Metric::observable: return r.discrepancy_obs / scale;
    case Metric::trace_norm: return r.discrepancy_tracenorm;
    case Metric::reference_observable: return r.obs_reference / scale;
    case Metric::reference_trace_norm: return r.tn_reference;
    case Metric::perturbed_reference_observable: return r.obs_perturbed_reference / scale;
    case Metric::perturbed_reference_trace_norm: return r.tn_perturbed_reference;
  }
  return kNaN;
}

inline Distance regressor_value(const LpplRecord& r, Regressor reg, Distance range) {
  switch (reg) {
    case Regressor::dist_yx: return r.dist_yx;
    case Regressor::dist_y_defect: return r.dist_y_defect;
    case Regressor::min_local_gap: return std::min(r.dist_yx, r.dist_y_defect);
    case Regressor::bulk_min: {
      const Distance shifted = is_infinite(r.dist_yx) ? kInfiniteDistance : r.dist_yx - 2 * range;
      return std::min(r.dist_y_edge, shifted);
    }
  }
  return kInfiniteDistance;
}

/// Least-squares fit of log(discrepancy) = b - c2 * d (+ c1 |Y|) on the upper
/// envelope over observables and branches at each distance.
inline DecayFit fit_decay(const std::vector<LpplRecord>& records, const FitOptions& opt = {}) {
  std::map<std::pair<Distance, std::size_t>, double> envelope;
  for (const auto& r : records) {
    if (opt.branch && r.branch != *opt.branch) continue;
    const Distance d = regressor_value(r, opt.regressor, opt.range);
    if (is_infinite(d) || d < opt.min_distance || d > opt.max_distance) continue;
    const double v = metric_value(r, opt.metric);
    if (std::isnan(v)) continue;
    const auto key = std::make_pair(d, opt.fit_abs_y ? r.abs_y : std::size_t{0});
    auto [it, inserted] = envelope.try_emplace(key, v);
    if (!inserted) it->second = std::max(it->second, v);
  }
  DecayFit fit;
  std::map<std::pair<Distance, std::size_t>, std::size_t> abs_y_of;
  for (const auto& r : records) abs_y_of[{regressor_value(r, opt.regressor, opt.range), opt.fit_abs_y ? r.abs_y : 0}] = r.abs_y;
  for (const auto& [key, v] : envelope) {
    DecayPoint p{key.first, abs_y_of[key], v};
    fit.envelope.push_back(p);
    if (v > opt.noise_floor) fit.points.push_back(p);
  }
  if (!fit.envelope.empty() && fit.points.empty()) {
    fit.status = FitStatus::below_measurable_range;
    return fit;
  }
  std::vector<Distance> distinct;
  for (const auto& p : fit.points) distinct.push_back(p.distance);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) {
    fit.status = FitStatus::too_few_points;
    return fit;
  }

  bool vary_abs_y = false;
  if (opt.fit_abs_y)
    for (const auto& p : fit.points) vary_abs_y |= p.abs_y != fit.points.front().abs_y;
  const auto n = static_cast<Eigen::Index>(fit.points.size());
  const Eigen::Index cols = vary_abs_y ? 3 : 2;
  Eigen::MatrixXd design(n, cols);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = fit.points[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = static_cast<double>(p.distance);
    if (vary_abs_y) design(i, 2) = static_cast<double>(p.abs_y);
    rhs(i) = std::log(p.value);
  }
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(rhs);
  fit.intercept = beta(0);
  fit.c2_hat = -beta(1);
  const double abs_y0 = static_cast<double>(std::max<std::size_t>(1, fit.points.front().abs_y));
  fit.c1_hat = vary_abs_y ? beta(2) : beta(0) / abs_y0;
  fit.abs_y_fitted = vary_abs_y;
  const Eigen::VectorXd resid = rhs - design * beta;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (rhs.array() - rhs.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : kNaN;
  fit.status = (fit.c2_hat > 0.0 && ss_tot > 0.0) ? FitStatus::ok : FitStatus::non_decaying;
  return fit;
}

// ---------------------------------------------------------------------------

struct GapCertificate {
  double gap_h = kNaN;
  double gap_hp = kNaN;
  std::size_t degeneracy_hp = 1;
  DecayFit worst_branch;                 // envelope over every branch
  std::vector<DecayFit> per_branch;
  std::vector<LpplRecord> records;

  double gap_ratio() const { return gap_hp / gap_h; }
  bool decay_persists() const { return worst_branch.decays(); }
};

/// Reports gap(H), gap(H + P) and the decay fit, to show decay without a gap above rho_P.
inline GapCertificate gap_closing_certificate(const LpplScenario& sc, const FitOptions& fit_opt) {
  GapCertificate cert;
  cert.records = run_scenario(sc);
  if (cert.records.empty()) throw GeometryError("gap_closing_certificate: scenario has no observables");
  cert.gap_h = cert.records.front().gap_h;
  cert.gap_hp = cert.records.front().gap_hp;
  cert.degeneracy_hp = cert.records.front().solve_hp.degeneracy;
  cert.worst_branch = fit_decay(cert.records, fit_opt);
  std::size_t branches = 0;
  for (const auto& r : cert.records) branches = std::max(branches, r.branch + 1);
  for (std::size_t b = 0; b < branches; ++b) {
    FitOptions o = fit_opt;
    o.branch = b;
    cert.per_branch.push_back(fit_decay(cert.records, o));
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Level-crossing constructions for gap-closing perturbations.

/// Diagonal of the global parity prod_x sigma_z (qubit layouts only).
inline RealVector global_parity(const TensorLayout& layout) {
  for (const auto& d : layout.dims())
    if (d != 2) throw DimensionError("global_parity: every site must be a qubit");
  const auto n = static_cast<Eigen::Index>(layout.dimension());
  RealVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = (__builtin_popcountll(static_cast<unsigned long long>(i)) % 2) ? -1.0 : 1.0;
  return out;
}

struct CrossingResult {
  double parameter = kNaN;
  double gap = kNaN;
  std::size_t iterations = 0;
};

/// Bisects t in [lo, hi] on the parity of the ground state of family(t), which must
/// commute with the parity and have ground states of opposite parity at the two ends.
/// Stops once the gap is positive and below target_gap.
inline CrossingResult tune_level_crossing(const std::function<EmbeddedOperator(double)>& family,
                                          const RealVector& parity, double lo, double hi, double target_gap,
                                          const SolverOptions& opt, std::size_t max_iterations = 80) {
  auto probe = [&](double t) {
    const GroundSpace g = ground_space(family(t), opt);
    double p = 0.0;
    for (Eigen::Index c = 0; c < g.basis.cols(); ++c)
      p += (parity.array() * g.basis.col(c).cwiseAbs2().array()).sum();
    return std::make_pair(p / static_cast<double>(g.basis.cols()), g.spectrum.gap);
  };
  const double sign_lo = probe(lo).first;
  const double sign_hi = probe(hi).first;
  if (!(sign_lo * sign_hi < 0.0))
    throw ValidationError("tune_level_crossing: ground-state parity does not change sign on the bracket");
  CrossingResult out;
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    const double mid = 0.5 * (lo + hi);
    const auto [p, gap] = probe(mid);
    out.parameter = mid;
    out.gap = gap;
    if (std::abs(p) > 0.5 && gap > 0.0 && gap < target_gap) return out;
    if (p * sign_lo > 0.0) lo = mid; else hi = mid;
  }
  throw SolverError("tune_level_crossing: target gap not reached", out.gap);
}

/// P = -t |1><1| on one site: cancels most of the on-site gap there and, on qubit
/// chains, opens a level crossing between the two global parity sectors.
inline Perturbation edge_mode_perturbation(const Site& x, double t, int local_dim = 2) {
  return Perturbation(LocalOperator(x, Matrix(-t * presets::projector(local_dim, 1))));
}

/// Random Hermitian defect Q of operator norm `scale` on `support`. With parity set
/// (qubits only) Q commutes with prod sigma_z and gets an extra -shift * (odd-parity projector).
inline LocalOperator random_defect(const TensorLayout& support, double scale, Rng& rng, bool parity = false,
                                   double shift = 0.0) {
  if (support.dimension() > kDefaultDenseCap) throw CapacityError("random_defect: support exceeds the dense cap");
  const auto n = static_cast<Eigen::Index>(support.dimension());
  Matrix g = random_hermitian(n, rng);
  const RealVector p = parity ? global_parity(support) : RealVector::Ones(n);
  if (parity) {
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        if (p(a) != p(b)) g(a, b) = 0.0;
  }
  const double norm = operator_norm(LocalOperator(support, g));
  if (norm > 0.0) g *= scale / norm;
  if (parity)
    for (Eigen::Index a = 0; a < n; ++a)
      if (p(a) < 0.0) g(a, a) -= shift;
  return LocalOperator(support, g);
}

} // namespace lppl
