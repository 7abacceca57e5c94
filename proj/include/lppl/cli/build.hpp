#pragma once

// Sweep cells and their scenarios.

#include <cstdint>
#include <string>
#include <vector>

#include "lppl/cli/config.hpp"
#include "lppl/experiments.hpp"
#include "lppl/random.hpp"

namespace lppl::cli {

inline constexpr std::size_t kMaxHilbertDimension = std::size_t{1} << 24;

struct Cell {
  std::size_t index = 0;
  std::size_t n = 0;
  double s = 0.0;
  double p_scale = 0.0;
  std::uint64_t seed = 0;
  std::string id;
};

inline std::string cell_id(const std::string& name, std::size_t n, double s, double p, std::uint64_t seed) {
  return name + ":N" + format_int(n) + ":s" + format_double(s) + ":p" + format_double(p) + ":seed" + format_int(seed);
}

/// Grid order: N, then s, then p_scale, then seed.
inline std::vector<Cell> enumerate_cells(const ExperimentConfig& c) {
  std::vector<Cell> out;
  for (auto n : c.sweep.n)
    for (auto s : c.sweep.s)
      for (auto p : c.sweep.p_scale)
        for (auto seed : c.sweep.seeds)
          out.push_back(Cell{out.size(), n, s, p, seed, cell_id(c.name, n, s, p, seed)});
  return out;
}

inline SiteSet sites_from_coords(std::size_t dim, const std::vector<std::vector<Coord>>& coords) {
  std::vector<Site> v;
  for (const auto& c : coords) v.emplace_back(c);
  return SiteSet::from_sites(dim, std::move(v));
}

inline LocalOperator tensor_power(const TensorLayout& layout, const SiteSet& support, const std::string& name) {
  std::optional<LocalOperator> acc;
  for (const auto& x : support) {
    LocalOperator f(x, presets::by_name(name, layout.local_dim(x)));
    acc = acc ? tensor(*acc, f) : f;
  }
  return *acc;
}

inline SpinSystem build_cell_system(const ExperimentConfig& c, const Cell& cell) {
  const std::vector<CoordRange> ranges(c.lattice.dimension, CoordRange{0, static_cast<Coord>(cell.n) - 1});
  const SiteSet lattice = SiteSet::box(ranges);
  double dim = 1.0;
  for (std::size_t i = 0; i < lattice.size(); ++i) dim *= c.lattice.local_dim;
  if (dim > static_cast<double>(kMaxHilbertDimension))
    throw CapacityError("cell " + cell.id + ": Hilbert dimension " + format_double(dim) + " exceeds " +
                        format_int(kMaxHilbertDimension));
  const TensorLayout layout = TensorLayout::uniform(lattice, c.lattice.local_dim);

  OnSiteSpec onsite;
  Vector psi = Vector::Zero(c.lattice.local_dim);
  psi(c.onsite.ground_level) = 1.0;
  onsite.form = OnSiteSpec::GapProjector{psi};

  InteractionSpec inter;
  inter.strength = cell.s;
  if (c.interactions.kind == "nearest_neighbor")
    inter.form = InteractionSpec::NearestNeighbor{presets::by_name(c.interactions.left, c.lattice.local_dim),
                                                  presets::by_name(c.interactions.right, c.lattice.local_dim)};
  else if (c.interactions.kind == "random_ball")
    inter.form = InteractionSpec::RandomBall{derive_seed(cell.seed, "interactions")};
  return build_system(layout, onsite, inter, c.lattice.range, c.lattice.gap);
}

inline std::optional<Perturbation> build_cell_perturbation(const ExperimentConfig& c, const Cell& cell,
                                                           const SpinSystem& system) {
  const auto& pc = c.perturbation;
  if (pc.kind == "none") return std::nullopt;
  const SiteSet x = sites_from_coords(c.lattice.dimension, pc.sites);
  if (!x.is_subset_of(system.lattice()))
    throw GeometryError("perturbation.sites: " + to_string(x) + " is not inside Lambda for " + cell.id);
  if (pc.kind == "edge_mode") return edge_mode_perturbation(x[0], cell.p_scale, c.lattice.local_dim);
  if (pc.kind == "random") {
    const TensorLayout sub = system.layout().sub_layout(x);
    Rng rng(derive_seed(cell.seed, "perturbation"));
    return Perturbation(random_defect(sub, std::abs(cell.p_scale), rng));
  }
  const LocalOperator op = tensor_power(system.layout(), x, pc.op);
  return Perturbation(op.scaled(cell.p_scale));
}

inline std::vector<Observable> build_cell_observables(const ExperimentConfig& c, const SpinSystem& system,
                                                      const std::optional<SiteSet>& allowed) {
  const SiteSet& lattice = system.lattice();
  const std::size_t w = c.observables.width;
  std::vector<Site> anchors;
  if (c.observables.positions)
    for (const auto& p : *c.observables.positions) anchors.emplace_back(p);
  else
    anchors.assign(lattice.begin(), lattice.end());

  std::vector<Observable> out;
  for (const auto& a : anchors) {
    std::vector<Site> ys;
    for (std::size_t k = 0; k < w; ++k) {
      Site y = a;
      y.coords[0] += static_cast<Coord>(k);
      ys.push_back(std::move(y));
    }
    const SiteSet y = SiteSet::from_sites(lattice.dimension(), ys);
    if (!c.observables.positions) {
      if (!y.is_subset_of(lattice)) continue;
      if (allowed && !y.is_subset_of(*allowed)) continue;
    } else if (!y.is_subset_of(lattice)) {
      throw GeometryError("observables.positions: observable at " + to_string(a) + " has support " + to_string(y) +
                          " outside Lambda");
    }
    // Unchecked positions outside Lambda' are reported by run_scenario.
    out.push_back(Observable{tensor_power(system.layout(), y, c.observables.op), c.observables.op + "@" + to_string(a)});
  }
  if (out.empty()) throw GeometryError("observables: no admissible observable positions");
  return out;
}

inline SolverOptions solver_options(const ExperimentConfig& c, std::uint64_t seed) {
  SolverOptions o;
  o.k = c.solver.k;
  o.tol = c.solver.tol;
  o.max_matvecs = c.solver.max_matvecs;
  o.max_basis = c.solver.max_basis;
  o.seed = derive_seed(seed, "solver");
  if (c.solver.degeneracy_tol > 0.0) o.degeneracy_tol = c.solver.degeneracy_tol;
  return o;
}

inline Geometry geometry_of(const std::string& g) {
  if (g == "local_gap") return Geometry::local_gap;
  if (g == "bulk") return Geometry::bulk;
  return Geometry::plain;
}

inline LpplScenario build_scenario(const ExperimentConfig& c, const Cell& cell) {
  LpplScenario sc;
  sc.id = cell.id;
  sc.system = build_cell_system(c, cell);
  sc.perturbation = build_cell_perturbation(c, cell, sc.system);
  std::optional<SiteSet> allowed;
  if (c.defect.enabled) {
    const std::vector<CoordRange> box = [&] {
      std::vector<CoordRange> r;
      for (std::size_t i = 0; i < c.lattice.dimension; ++i) r.push_back(CoordRange{c.defect.region_lo[i], c.defect.region_hi[i]});
      return r;
    }();
    const SiteSet region = SiteSet::box(box);
    if (!region.is_subset_of(sc.system.lattice()))
      throw GeometryError("defect region " + to_string(region) + " is not inside Lambda for " + cell.id);
    const SiteSet outside = sc.system.lattice().set_difference(region);
    if (outside.empty()) throw GeometryError("defect region covers all of Lambda for " + cell.id);
    Rng rng(derive_seed(cell.seed, "defect"));
    LocalOperator q = random_defect(sc.system.layout().sub_layout(outside), c.defect.scale, rng,
                                    c.defect.kind == "random_parity", c.defect.shift);
    sc.defect = build_locally_weak_system(sc.system, region, std::move(q));
    allowed = region;
  }
  sc.geometry = geometry_of(c.geometry);
  sc.observables = build_cell_observables(c, sc.system, sc.geometry == Geometry::local_gap ? allowed : std::nullopt);
  sc.solver = solver_options(c, cell.seed);
  sc.dense_cross_check = c.solver.dense_oracle;
  sc.strength_param = cell.s;
  sc.p_scale = cell.p_scale;
  sc.seed = cell.seed;
  return sc;
}

inline Metric metric_of(const std::string& m) {
  if (m == "trace_norm") return Metric::trace_norm;
  if (m == "reference_observable") return Metric::reference_observable;
  if (m == "reference_trace_norm") return Metric::reference_trace_norm;
  return Metric::observable;
}

inline Regressor regressor_of(const std::string& r) {
  if (r == "dist_y_defect") return Regressor::dist_y_defect;
  if (r == "min_local_gap") return Regressor::min_local_gap;
  if (r == "bulk_min") return Regressor::bulk_min;
  return Regressor::dist_yx;
}

/// Expects a materialized config.
inline FitOptions fit_options(const ExperimentConfig& c) {
  FitOptions f;
  f.metric = metric_of(c.fit.metric);
  f.regressor = regressor_of(c.fit.regressor);
  f.noise_floor = c.fit.noise_floor;
  f.min_distance = c.fit.min_distance < 0 ? 2 * c.lattice.range + 1 : c.fit.min_distance;
  f.max_distance = c.fit.max_distance < 0 ? kInfiniteDistance : c.fit.max_distance;
  f.range = c.lattice.range;
  f.fit_abs_y = c.fit.fit_abs_y;
  return f;
}

} // namespace lppl::cli
