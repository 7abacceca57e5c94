#pragma once

// Experiment configuration: YAML in, fully materialized YAML out.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "lppl/errors.hpp"
#include "lppl/lattice.hpp"

namespace lppl::cli {

inline constexpr int kSchemaVersion = 1;

/// Schema violation; the message starts with the offending key path.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : ValidationError(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct LatticeConfig {
  std::size_t dimension = 1;  // nu; every axis has the swept side length N
  int local_dim = 2;
  Distance range = 1;         // R
  double gap = 1.0;           // g
};

struct OnsiteConfig {
  int ground_level = 0;  // h_x = g (1 - |k><k|)
};

struct InteractionsConfig {
  std::string kind = "nearest_neighbor";  // none | nearest_neighbor | random_ball
  std::string left = "pauli_x";
  std::string right = "pauli_x";
};

struct PerturbationConfig {
  std::string kind = "preset";  // none | preset | edge_mode | random
  std::vector<std::vector<Coord>> sites = {{0}};
  std::string op = "pauli_x";   // preset only; tensor power over the listed sites
};

struct DefectConfig {
  bool enabled = false;
  std::vector<Coord> region_lo = {0};  // Lambda' as a box
  std::vector<Coord> region_hi = {7};
  std::string kind = "random";         // random | random_parity
  double scale = 5.0;                  // operator norm of the random part
  double shift = 0.0;                  // weight of -|odd><odd| (random_parity only)
};

struct ObservablesConfig {
  std::string op = "pauli_z";
  std::optional<std::vector<std::vector<Coord>>> positions;  // nullopt: every admissible site
  std::size_t width = 1;  // |Y|: consecutive sites along the first axis
};

struct SweepConfig {
  std::vector<std::size_t> n = {12};
  std::vector<double> s = {0.1};
  std::vector<double> p_scale = {1.0};
  std::vector<std::uint64_t> seeds = {1};
};

struct SolverConfig {
  std::size_t k = 4;
  double tol = 1e-10;
  std::size_t max_matvecs = 20000;
  std::size_t max_basis = 0;
  double degeneracy_tol = 0.0;          // 0: 1e-8 * max(1, |E0|)
  std::string on_unconverged = "mark";  // mark | fail
  bool dense_oracle = false;
};

struct FitConfig {
  std::string metric = "observable";  // observable | trace_norm | reference_observable | reference_trace_norm
  std::string regressor = "auto";     // auto | dist_yx | dist_y_defect | min_local_gap | bulk_min
  Distance min_distance = -1;         // -1: 2R + 1
  Distance max_distance = -1;         // -1: unbounded
  double noise_floor = 1e-12;
  bool fit_abs_y = false;
};

struct CheckConfig {
  std::size_t trials = 200;
  std::size_t adversarial_restarts = 200;
  std::size_t max_support = 2;
  double tol = 1e-9;
  bool hopping = true;
};

struct OutputConfig {
  std::string dir = "lppl_out";
  std::string csv = "records.csv";
  std::string results = "results.json";
  std::string resolved_config = "resolved_config.yaml";
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  std::string geometry = "plain";  // plain | local_gap | bulk
  LatticeConfig lattice;
  OnsiteConfig onsite;
  InteractionsConfig interactions;
  PerturbationConfig perturbation;
  DefectConfig defect;
  ObservablesConfig observables;
  SweepConfig sweep;
  SolverConfig solver;
  FitConfig fit;
  CheckConfig check;
  OutputConfig output;
};

// ---------------------------------------------------------------------------
// Number formatting shared by the YAML echo and the CSV writer.

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string out(buf, res.ptr);
  // Keep reals recognisable as reals on re-parse.
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

template <class Int>
std::string format_int(Int v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

/// Map reader that tracks the key path and rejects unknown keys.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_, "expected a mapping");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    const YAML::Node n = get(key);
    return n && !n.IsNull();
  }
  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return get(key);
  }
  Section section(const std::string& key) { return Section(raw(key), child(key)); }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(get(key), child(key));
  }
  template <class T>
  void read_list(const std::string& key, std::vector<T>& out) {
    if (!has(key)) return;
    const YAML::Node n = get(key);
    const std::string p = child(key);
    if (n.IsScalar()) {
      out = {convert<T>(n, p)};
      return;
    }
    if (!n.IsSequence()) throw ConfigError(p, "expected a list");
    out.clear();
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(convert<T>(n[i], p + "[" + std::to_string(i) + "]"));
  }

  /// Called once every known key was requested.
  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(child(key), "unknown key");
    }
  }

  template <class T>
  static T convert(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected a scalar");
    const std::string text = n.Scalar();
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true") return true;
      if (text == "false") return false;
      throw ConfigError(path, "expected true or false, got '" + text + "'");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (text == "inf") return std::numeric_limits<T>::infinity();
      T v{};
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError(path, "expected a number, got '" + text + "'");
      return v;
    } else {
      T v{};
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError(path, "expected an integer" + std::string(std::is_signed_v<T> ? "" : " >= 0") +
                                    ", got '" + text + "'");
      return v;
    }
  }

 private:
  // Const lookup: never inserts into the document.
  YAML::Node get(const std::string& key) const {
    if (!node_ || !node_.IsMap()) return YAML::Node();
    const YAML::Node& n = node_;
    return n[key];
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

/// A site is a coordinate list, or a bare integer on a chain.
inline std::vector<Coord> read_site(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return {Section::convert<Coord>(n, path)};
  if (!n.IsSequence()) throw ConfigError(path, "expected a site (integer or coordinate list)");
  std::vector<Coord> c;
  for (std::size_t i = 0; i < n.size(); ++i) c.push_back(Section::convert<Coord>(n[i], path + "[" + std::to_string(i) + "]"));
  return c;
}

inline std::vector<std::vector<Coord>> read_sites(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(path, "expected a list of sites");
  std::vector<std::vector<Coord>> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(read_site(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline void require_one_of(const std::string& value, std::initializer_list<const char*> allowed, const std::string& path) {
  std::string list;
  for (const char* a : allowed) {
    if (value == a) return;
    list += list.empty() ? a : std::string(", ") + a;
  }
  throw ConfigError(path, "'" + value + "' is not one of " + list);
}

} // namespace detail

/// Checks everything that does not need a constructed system.
inline void validate(const ExperimentConfig& c) {
  using detail::require_one_of;
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(c.schema_version));
  if (c.name.empty() || c.name.find_first_of(",\n\"") != std::string::npos)
    throw ConfigError("name", "must be non-empty without commas, quotes or newlines");
  require_one_of(c.geometry, {"plain", "local_gap", "bulk"}, "geometry");
  if (c.lattice.dimension < 1 || c.lattice.dimension > 3) throw ConfigError("lattice.dimension", "must be 1, 2 or 3");
  if (c.lattice.local_dim < 2) throw ConfigError("lattice.local_dim", "must be >= 2");
  if (c.lattice.range < 1) throw ConfigError("lattice.range", "must be >= 1");
  if (!(c.lattice.gap > 0.0) || !std::isfinite(c.lattice.gap)) throw ConfigError("lattice.gap", "must be positive");
  if (c.onsite.ground_level < 0 || c.onsite.ground_level >= c.lattice.local_dim)
    throw ConfigError("onsite.ground_level", "must lie in [0, local_dim)");
  require_one_of(c.interactions.kind, {"none", "nearest_neighbor", "random_ball"}, "interactions.kind");
  require_one_of(c.perturbation.kind, {"none", "preset", "edge_mode", "random"}, "perturbation.kind");
  if (c.perturbation.kind != "none") {
    if (c.perturbation.sites.empty()) throw ConfigError("perturbation.sites", "must not be empty");
    for (std::size_t i = 0; i < c.perturbation.sites.size(); ++i)
      if (c.perturbation.sites[i].size() != c.lattice.dimension)
        throw ConfigError("perturbation.sites[" + std::to_string(i) + "]", "coordinate count differs from lattice.dimension");
    if (c.perturbation.kind == "edge_mode" && c.perturbation.sites.size() != 1)
      throw ConfigError("perturbation.sites", "edge_mode acts on exactly one site");
  }
  if (c.defect.enabled) {
    require_one_of(c.defect.kind, {"random", "random_parity"}, "defect.kind");
    if (c.defect.region_lo.size() != c.lattice.dimension) throw ConfigError("defect.region_lo", "coordinate count differs from lattice.dimension");
    if (c.defect.region_hi.size() != c.lattice.dimension) throw ConfigError("defect.region_hi", "coordinate count differs from lattice.dimension");
    if (!(c.defect.scale >= 0.0)) throw ConfigError("defect.scale", "must be >= 0");
  }
  if (c.geometry == "local_gap" && !c.defect.enabled) throw ConfigError("defect.enabled", "local_gap geometry needs a defect");
  if (c.observables.width < 1) throw ConfigError("observables.width", "must be >= 1");
  if (c.observables.positions)
    for (std::size_t i = 0; i < c.observables.positions->size(); ++i)
      if ((*c.observables.positions)[i].size() != c.lattice.dimension)
        throw ConfigError("observables.positions[" + std::to_string(i) + "]", "coordinate count differs from lattice.dimension");
  if (c.sweep.n.empty()) throw ConfigError("sweep.N", "must not be empty");
  for (auto n : c.sweep.n)
    if (n < 1) throw ConfigError("sweep.N", "side lengths must be >= 1");
  if (c.sweep.s.empty()) throw ConfigError("sweep.s", "must not be empty");
  for (auto s : c.sweep.s)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sweep.s", "strengths must be finite and >= 0");
  if (c.sweep.p_scale.empty()) throw ConfigError("sweep.p_scale", "must not be empty");
  for (auto p : c.sweep.p_scale)
    if (!std::isfinite(p)) throw ConfigError("sweep.p_scale", "must be finite");
  if (c.sweep.seeds.empty()) throw ConfigError("sweep.seeds", "must not be empty");
  if (c.solver.k < 1) throw ConfigError("solver.k", "must be >= 1");
  if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
  if (c.solver.max_matvecs < 1) throw ConfigError("solver.max_matvecs", "must be >= 1");
  if (!(c.solver.degeneracy_tol >= 0.0)) throw ConfigError("solver.degeneracy_tol", "must be >= 0");
  require_one_of(c.solver.on_unconverged, {"mark", "fail"}, "solver.on_unconverged");
  require_one_of(c.fit.metric, {"observable", "trace_norm", "reference_observable", "reference_trace_norm"}, "fit.metric");
  require_one_of(c.fit.regressor, {"auto", "dist_yx", "dist_y_defect", "min_local_gap", "bulk_min"}, "fit.regressor");
  if (c.fit.metric.rfind("reference", 0) == 0 && !c.defect.enabled)
    throw ConfigError("fit.metric", "reference metrics need a defect");
  if (!(c.fit.noise_floor >= 0.0)) throw ConfigError("fit.noise_floor", "must be >= 0");
  if (!(c.check.tol >= 0.0)) throw ConfigError("check.tol", "must be >= 0");
  if (c.output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
  for (const auto* f : {&c.output.csv, &c.output.results, &c.output.resolved_config})
    if (f->empty()) throw ConfigError("output", "file names must not be empty");
}

/// Replaces the "auto" markers by concrete values.
inline ExperimentConfig materialize(ExperimentConfig c) {
  if (c.fit.min_distance < 0) c.fit.min_distance = 2 * c.lattice.range + 1;
  if (c.fit.regressor == "auto") {
    if (c.geometry == "local_gap") c.fit.regressor = c.perturbation.kind == "none" ? "dist_y_defect" : "min_local_gap";
    else if (c.geometry == "bulk") c.fit.regressor = "bulk_min";
    else c.fit.regressor = "dist_yx";
  }
  return c;
}

inline ExperimentConfig parse_config(const YAML::Node& root) {
  using detail::Section;
  if (!root || root.IsNull()) throw ConfigError("<root>", "empty configuration");
  ExperimentConfig c;
  Section top(root, "");
  top.read("schema_version", c.schema_version);
  top.read("name", c.name);
  top.read("geometry", c.geometry);
  {
    auto s = top.section("lattice");
    s.read("dimension", c.lattice.dimension);
    s.read("local_dim", c.lattice.local_dim);
    s.read("range", c.lattice.range);
    s.read("gap", c.lattice.gap);
    s.finish();
  }
  {
    auto s = top.section("onsite");
    s.read("ground_level", c.onsite.ground_level);
    s.finish();
  }
  {
    auto s = top.section("interactions");
    s.read("kind", c.interactions.kind);
    s.read("left", c.interactions.left);
    s.read("right", c.interactions.right);
    s.finish();
  }
  {
    auto s = top.section("perturbation");
    s.read("kind", c.perturbation.kind);
    if (s.has("sites")) c.perturbation.sites = detail::read_sites(s.raw("sites"), s.child("sites"));
    s.read("operator", c.perturbation.op);
    s.finish();
  }
  {
    auto s = top.section("defect");
    s.read("enabled", c.defect.enabled);
    if (s.has("region_lo")) c.defect.region_lo = detail::read_site(s.raw("region_lo"), s.child("region_lo"));
    if (s.has("region_hi")) c.defect.region_hi = detail::read_site(s.raw("region_hi"), s.child("region_hi"));
    s.read("kind", c.defect.kind);
    s.read("scale", c.defect.scale);
    s.read("shift", c.defect.shift);
    s.finish();
  }
  {
    auto s = top.section("observables");
    s.read("operator", c.observables.op);
    if (s.has("positions")) {
      const YAML::Node p = s.raw("positions");
      if (p.IsScalar() && p.Scalar() == "all") c.observables.positions.reset();
      else c.observables.positions = detail::read_sites(p, s.child("positions"));
    }
    s.read("width", c.observables.width);
    s.finish();
  }
  {
    auto s = top.section("sweep");
    s.read_list("N", c.sweep.n);
    s.read_list("s", c.sweep.s);
    s.read_list("p_scale", c.sweep.p_scale);
    s.read_list("seeds", c.sweep.seeds);
    s.finish();
  }
  {
    auto s = top.section("solver");
    s.read("k", c.solver.k);
    s.read("tol", c.solver.tol);
    s.read("max_matvecs", c.solver.max_matvecs);
    s.read("max_basis", c.solver.max_basis);
    s.read("degeneracy_tol", c.solver.degeneracy_tol);
    s.read("on_unconverged", c.solver.on_unconverged);
    s.read("dense_oracle", c.solver.dense_oracle);
    s.finish();
  }
  {
    auto s = top.section("fit");
    s.read("metric", c.fit.metric);
    s.read("regressor", c.fit.regressor);
    s.read("min_distance", c.fit.min_distance);
    s.read("max_distance", c.fit.max_distance);
    s.read("noise_floor", c.fit.noise_floor);
    s.read("fit_abs_y", c.fit.fit_abs_y);
    s.finish();
  }
  {
    auto s = top.section("check");
    s.read("trials", c.check.trials);
    s.read("adversarial_restarts", c.check.adversarial_restarts);
    s.read("max_support", c.check.max_support);
    s.read("tol", c.check.tol);
    s.read("hopping", c.check.hopping);
    s.finish();
  }
  {
    auto s = top.section("output");
    s.read("dir", c.output.dir);
    s.read("csv", c.output.csv);
    s.read("results", c.output.results);
    s.read("resolved_config", c.output.resolved_config);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<yaml>", std::string("line ") + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return parse_config(root);
}

namespace detail {

inline void emit_sites(YAML::Emitter& out, const std::vector<std::vector<Coord>>& sites) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& s : sites) {
    out << YAML::Flow << YAML::BeginSeq;
    for (auto v : s) out << format_int(v);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

inline void emit_coords(YAML::Emitter& out, const std::vector<Coord>& c) {
  out << YAML::Flow << YAML::BeginSeq;
  for (auto v : c) out << format_int(v);
  out << YAML::EndSeq;
}

template <class T, class F>
void emit_list(YAML::Emitter& out, const std::vector<T>& values, F fmt) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& v : values) out << fmt(v);
  out << YAML::EndSeq;
}

inline const char* yes_no(bool b) { return b ? "true" : "false"; }

} // namespace detail

/// Every field, in schema order; parse_config(emit_config(c)) reproduces c.
inline std::string emit_config(const ExperimentConfig& c) {
  using detail::yes_no;
  auto fi = [](auto v) { return format_int(v); };
  auto fd = [](double v) { return format_double(v); };
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << fi(c.schema_version);
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "geometry" << YAML::Value << c.geometry;

  out << YAML::Key << "lattice" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dimension" << YAML::Value << fi(c.lattice.dimension);
  out << YAML::Key << "local_dim" << YAML::Value << fi(c.lattice.local_dim);
  out << YAML::Key << "range" << YAML::Value << fi(c.lattice.range);
  out << YAML::Key << "gap" << YAML::Value << fd(c.lattice.gap);
  out << YAML::EndMap;

  out << YAML::Key << "onsite" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ground_level" << YAML::Value << fi(c.onsite.ground_level);
  out << YAML::EndMap;

  out << YAML::Key << "interactions" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.interactions.kind;
  out << YAML::Key << "left" << YAML::Value << c.interactions.left;
  out << YAML::Key << "right" << YAML::Value << c.interactions.right;
  out << YAML::EndMap;

  out << YAML::Key << "perturbation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.perturbation.kind;
  out << YAML::Key << "sites" << YAML::Value;
  detail::emit_sites(out, c.perturbation.sites);
  out << YAML::Key << "operator" << YAML::Value << c.perturbation.op;
  out << YAML::EndMap;

  out << YAML::Key << "defect" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << yes_no(c.defect.enabled);
  out << YAML::Key << "region_lo" << YAML::Value;
  detail::emit_coords(out, c.defect.region_lo);
  out << YAML::Key << "region_hi" << YAML::Value;
  detail::emit_coords(out, c.defect.region_hi);
  out << YAML::Key << "kind" << YAML::Value << c.defect.kind;
  out << YAML::Key << "scale" << YAML::Value << fd(c.defect.scale);
  out << YAML::Key << "shift" << YAML::Value << fd(c.defect.shift);
  out << YAML::EndMap;

  out << YAML::Key << "observables" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "operator" << YAML::Value << c.observables.op;
  out << YAML::Key << "positions" << YAML::Value;
  if (c.observables.positions) detail::emit_sites(out, *c.observables.positions);
  else out << "all";
  out << YAML::Key << "width" << YAML::Value << fi(c.observables.width);
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "N" << YAML::Value;
  detail::emit_list(out, c.sweep.n, fi);
  out << YAML::Key << "s" << YAML::Value;
  detail::emit_list(out, c.sweep.s, fd);
  out << YAML::Key << "p_scale" << YAML::Value;
  detail::emit_list(out, c.sweep.p_scale, fd);
  out << YAML::Key << "seeds" << YAML::Value;
  detail::emit_list(out, c.sweep.seeds, fi);
  out << YAML::EndMap;

  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k" << YAML::Value << fi(c.solver.k);
  out << YAML::Key << "tol" << YAML::Value << fd(c.solver.tol);
  out << YAML::Key << "max_matvecs" << YAML::Value << fi(c.solver.max_matvecs);
  out << YAML::Key << "max_basis" << YAML::Value << fi(c.solver.max_basis);
  out << YAML::Key << "degeneracy_tol" << YAML::Value << fd(c.solver.degeneracy_tol);
  out << YAML::Key << "on_unconverged" << YAML::Value << c.solver.on_unconverged;
  out << YAML::Key << "dense_oracle" << YAML::Value << yes_no(c.solver.dense_oracle);
  out << YAML::EndMap;

  out << YAML::Key << "fit" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "metric" << YAML::Value << c.fit.metric;
  out << YAML::Key << "regressor" << YAML::Value << c.fit.regressor;
  out << YAML::Key << "min_distance" << YAML::Value << fi(c.fit.min_distance);
  out << YAML::Key << "max_distance" << YAML::Value << fi(c.fit.max_distance);
  out << YAML::Key << "noise_floor" << YAML::Value << fd(c.fit.noise_floor);
  out << YAML::Key << "fit_abs_y" << YAML::Value << yes_no(c.fit.fit_abs_y);
  out << YAML::EndMap;

  out << YAML::Key << "check" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "trials" << YAML::Value << fi(c.check.trials);
  out << YAML::Key << "adversarial_restarts" << YAML::Value << fi(c.check.adversarial_restarts);
  out << YAML::Key << "max_support" << YAML::Value << fi(c.check.max_support);
  out << YAML::Key << "tol" << YAML::Value << fd(c.check.tol);
  out << YAML::Key << "hopping" << YAML::Value << yes_no(c.check.hopping);
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << c.output.dir;
  out << YAML::Key << "csv" << YAML::Value << c.output.csv;
  out << YAML::Key << "results" << YAML::Value << c.output.results;
  out << YAML::Key << "resolved_config" << YAML::Value << c.output.resolved_config;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

} // namespace lppl::cli
