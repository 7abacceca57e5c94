#pragma once

// Subcommands of the lppl tool. Every command returns an exit code:
// 0 success, 1 validation, 2 solver, 3 I/O, 4 a certification battery failed.

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lppl/cli/build.hpp"
#include "lppl/cli/config.hpp"
#include "lppl/cli/output.hpp"
#include "lppl/experiments.hpp"
#include "lppl/states.hpp"

namespace lppl::cli {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitSolver = 2, kExitIo = 3, kExitCheckFailed = 4 };

struct CommonOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  bool dense_oracle = false;
};

struct CheckOptions {
  CommonOptions common;
  bool inject_excited = false;  // debug: replace the ground state by the first excited level
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

inline fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

/// Flag, then environment, then config.
inline ExperimentConfig load_config(const CommonOptions& o) {
  ExperimentConfig c = parse_config_text(read_file(o.config_path));
  if (o.seed) c.sweep.seeds = {*o.seed};
  if (o.dense_oracle) c.solver.dense_oracle = true;
  if (o.out_dir) c.output.dir = *o.out_dir;
  else if (const char* env = std::getenv("LPPL_OUT_DIR"); env && *env) c.output.dir = env;
  c = materialize(c);
  validate(c);
  return c;
}

inline std::size_t resolve_workers(const CommonOptions& o) {
  if (o.workers) return std::max<std::size_t>(1, *o.workers);
  if (const char* env = std::getenv("LPPL_WORKERS"); env && *env) {
    const std::string text(env);
    std::size_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v == 0)
      throw ConfigError("LPPL_WORKERS", "expected a positive integer, got '" + text + "'");
    return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs job(i) for i < count on a pool and hands results to sink(i, result) in index order
/// on the calling thread. The first failure (in index order) is rethrown after the pool drains.
template <class Result, class Job, class Sink>
void ordered_parallel(std::size_t count, std::size_t workers, Job job, Sink sink) {
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::vector<char> done(count, 0);
  std::mutex m;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      std::optional<Result> r;
      std::exception_ptr e;
      if (!stop.load()) {
        try {
          r.emplace(job(i));
        } catch (...) {
          e = std::current_exception();
          stop.store(true);
        }
      }
      {
        std::lock_guard<std::mutex> lk(m);
        slots[i] = std::move(r);
        errors[i] = e;
        done[i] = 1;
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(worker);

  std::exception_ptr first;
  for (std::size_t i = 0; i < count; ++i) {
    std::unique_lock<std::mutex> lk(m);
    cv.wait(lk, [&] { return done[i] != 0; });
    if (first) continue;
    if (errors[i]) {
      first = errors[i];
      continue;
    }
    if (!slots[i]) continue;  // skipped after an earlier failure
    Result r = std::move(*slots[i]);
    slots[i].reset();
    lk.unlock();
    try {
      sink(i, std::move(r));
    } catch (...) {
      first = std::current_exception();
      stop.store(true);
    }
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

/// Maps library exceptions to exit codes with a one-line diagnostic.
template <class F>
int guarded(std::ostream& err, F body) {
  try {
    return body();
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const YAML::Exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}

inline CellResult run_cell(const ExperimentConfig& c, const Cell& cell) {
  const LpplScenario sc = build_scenario(c, cell);
  CellResult out;
  out.scenario_id = cell.id;
  out.n = sc.system.lattice().size();
  out.s = cell.s;
  out.p_scale = cell.p_scale;
  out.seed = cell.seed;
  out.records = run_scenario(sc);
  if (c.solver.on_unconverged == "fail")
    for (const auto& r : out.records)
      if (!r.converged)
        throw SolverError("cell " + cell.id + ": eigensolver did not reach tol " + format_double(c.solver.tol) +
                              " (residual " + format_double(r.resid) + ")",
                          r.resid);
  out.fit = fit_decay(out.records, fit_options(c));
  return out;
}

/// run / sweep: CSV, results file and resolved config in the output directory.
inline int cmd_run(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load_config(o);
    const std::size_t workers = resolve_workers(o);
    const std::vector<Cell> cells = enumerate_cells(c);
    const fs::path dir = prepare_dir(c.output.dir);
    write_file(dir / c.output.resolved_config, emit_config(c));

    std::ofstream csv(dir / c.output.csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw IoError("cannot write '" + (dir / c.output.csv).string() + "'");
    csv << kCsvHeader << "\n";
    const FitOptions fo = fit_options(c);
    json cells_json = json::array();
    ordered_parallel<CellResult>(
        cells.size(), workers, [&](std::size_t i) { return run_cell(c, cells[i]); },
        [&](std::size_t, CellResult r) {
          for (const auto& rec : r.records) csv << csv_row(rec) << "\n";
          csv.flush();
          if (!csv) throw IoError("error while writing '" + (dir / c.output.csv).string() + "'");
          out << r.scenario_id << ": " << r.records.size() << " records, fit " << to_string(r.fit.status);
          if (r.fit.status == FitStatus::ok || r.fit.status == FitStatus::non_decaying)
            out << " c2_hat=" << format_double(r.fit.c2_hat) << " r2=" << format_double(r.fit.r_squared);
          out << "\n";
          cells_json.push_back(to_json(r, fo));
        });
    json results{{"schema_version", kSchemaVersion},
                 {"tool_version", kVersion},
                 {"name", c.name},
                 {"geometry", c.geometry},
                 {"resolved_config", emit_config(c)},
                 {"cells", cells_json}};
    write_file(dir / c.output.results, results.dump(2) + "\n");
    out << "wrote " << (dir / c.output.csv).string() << " and " << (dir / c.output.results).string() << "\n";
    return int(kExitOk);
  });
}

inline json to_json(const CommutatorReport& rep) {
  json b = json::array();
  for (const auto& s : rep.batteries)
    b.push_back(json{{"name", s.name}, {"evaluations", s.evaluations}, {"min_value", number(s.min_value)}});
  json j{{"pass", rep.pass}, {"min_value", number(rep.min_value)}, {"tol", rep.tol}, {"batteries", b}};
  if (rep.witness && !rep.pass) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < rep.witness->matrix.rows(); ++r) {
      json rr = json::array(), ii = json::array();
      for (Eigen::Index c = 0; c < rep.witness->matrix.cols(); ++c) {
        rr.push_back(rep.witness->matrix(r, c).real());
        ii.push_back(rep.witness->matrix(r, c).imag());
      }
      re.push_back(rr);
      im.push_back(ii);
    }
    j["witness"] = json{{"battery", rep.witness->battery},
                        {"support", to_string(rep.witness->support)},
                        {"value", rep.witness->value},
                        {"real", re},
                        {"imag", im}};
  }
  return j;
}

inline void print_report(std::ostream& out, const std::string& test, const CommutatorReport& rep) {
  for (const auto& b : rep.batteries)
    out << ((b.min_value >= -rep.tol) ? "PASS " : "FAIL ") << test << "/" << b.name << " min=" << format_double(b.min_value)
        << " evaluations=" << b.evaluations << "\n";
  out << (rep.pass ? "PASS " : "FAIL ") << test << " min=" << format_double(rep.min_value) << "\n";
  if (!rep.pass && rep.witness) {
    const auto& w = *rep.witness;
    out << "  witness from " << w.battery << " battery, m(A) = " << format_double(w.value) << ", support "
        << (w.support.empty() ? std::string("whole lattice") : to_string(w.support)) << "\n";
    if (!w.support.empty() && w.matrix.rows() <= 16) {
      std::ostringstream m;
      m.precision(6);
      m << w.matrix;
      std::istringstream lines(m.str());
      for (std::string line; std::getline(lines, line);) out << "    " << line << "\n";
    }
  }
}

/// check: commutator batteries on the ground state of H (+ P) and bulk batteries for H restricted to Lambda \ X.
inline int cmd_check(const CheckOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load_config(o.common);
    const std::vector<Cell> cells = enumerate_cells(c);
    const fs::path dir = prepare_dir(c.output.dir);
    CommutatorTestOptions topt;
    topt.trials = c.check.trials;
    topt.adversarial_restarts = c.check.adversarial_restarts;
    topt.max_support = c.check.max_support;
    topt.tol = c.check.tol;
    topt.hopping = c.check.hopping;
    bool all_pass = true;
    json report = json::array();
    for (const auto& cell : cells) {
      const LpplScenario sc = build_scenario(c, cell);
      const EmbeddedOperator k = sc.defect ? sc.defect->assemble(sc.perturbation) : assemble(sc.system, sc.perturbation);
      SolverOptions so = sc.solver;
      so.k = std::max<std::size_t>(so.k, 4);
      const GroundSpace g = ground_space(k, so);
      const TensorLayout& layout = sc.system.layout();
      DensityState rho = DensityState::uniform_mixture(layout, g.basis);
      if (o.inject_excited) {
        const auto level = static_cast<Eigen::Index>(g.spectrum.cluster_size);
        if (level >= g.spectrum.vectors.cols()) throw ValidationError("--inject-excited: no excited level available");
        rho = DensityState::pure(layout, g.spectrum.vectors.col(level));
        out << "note: state replaced by the excited level at E0 + " << format_double(g.spectrum.gap) << "\n";
      }
      out << "cell " << cell.id << "\n";
      topt.seed = derive_seed(cell.seed, "check");
      const CommutatorReport full = ground_state_commutator_test(rho, k, topt);
      print_report(out, "ground_state_commutator_test", full);
      all_pass &= full.pass;
      json entry{{"scenario_id", cell.id}, {"ground_state_commutator_test", to_json(full)}};

      SiteSet star = sc.defect ? sc.defect->region() : sc.system.lattice();
      if (sc.perturbation) star = star.set_difference(sc.perturbation->support());
      const SiteSet interior = bulk(star, sc.system.range());
      if (star.empty() || interior.empty()) {
        out << "SKIP bulk_ground_state_test: empty bulk, Lambda* = " << to_string(star)
            << " has no site farther than 2R = " << 2 * sc.system.range() << " from its complement\n";
        entry["bulk_ground_state_test"] = json{{"skipped", "empty bulk"}, {"lambda_star", to_string(star)}};
      } else {
        const SpinSystem restricted = restrict(sc.system, star);
        const CommutatorReport b = bulk_ground_state_test(rho, restricted, topt);
        print_report(out, "bulk_ground_state_test", b);
        all_pass &= b.pass;
        entry["bulk_ground_state_test"] = to_json(b);
      }
      report.push_back(entry);
    }
    write_file(dir / "check.json", report.dump(2) + "\n");
    return int(all_pass ? kExitOk : kExitCheckFailed);
  });
}

inline std::string plot_stem(std::size_t n, double s) { return "decay_N" + format_int(n) + "_s" + format_double(s); }

/// plot: one SVG per (N, s), per-series .dat files, a gnuplot script and a fit summary.
inline int cmd_plot(const std::string& results_path, const std::optional<std::string>& out_dir, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    json results;
    try {
      results = json::parse(read_file(results_path));
    } catch (const json::exception& e) {
      throw IoError("corrupt results file '" + results_path + "': " + e.what());
    }
    const std::vector<PlotSeries> series = read_plot_series(results);
    const fs::path dir = prepare_dir(out_dir ? *out_dir : (fs::path(results_path).parent_path() / "plots").string());
    std::map<std::pair<std::size_t, double>, std::vector<PlotSeries>> groups;
    for (const auto& s : series) groups[{s.n, s.s}].push_back(s);

    std::ostringstream summary;
    summary << "scenario_id,status,c2_hat,c1_hat,r_squared,points\n";
    std::vector<std::pair<std::string, std::vector<std::string>>> gp;
    std::size_t dat_index = 0;
    for (const auto& [key, group] : groups) {
      const std::string stem = plot_stem(key.first, key.second);
      write_file(dir / (stem + ".svg"), render_svg("N = " + format_int(key.first) + ", s = " + format_double(key.second), group));
      std::vector<std::string> dats;
      for (const auto& s : group) {
        const std::string dat = "series_" + format_int(dat_index++) + ".dat";
        std::ostringstream d;
        d << "# " << s.scenario_id << "\n# distance discrepancy fitted\n";
        for (const auto& p : s.envelope) {
          const bool fitted = s.fit.status == FitStatus::ok || s.fit.status == FitStatus::non_decaying;
          d << p.distance << " " << format_double(p.value) << " "
            << format_double(fitted ? s.fit.predict(double(p.distance), double(p.abs_y)) : kNaN) << "\n";
        }
        write_file(dir / dat, d.str());
        dats.push_back(dat);
        summary << s.scenario_id << "," << to_string(s.fit.status) << "," << format_double(s.fit.c2_hat) << ","
                << format_double(s.fit.c1_hat) << "," << format_double(s.fit.r_squared) << "," << s.fit.points.size()
                << "\n";
      }
      gp.emplace_back(stem, dats);
      out << "wrote " << (dir / (stem + ".svg")).string() << "\n";
    }
    write_file(dir / "plot.gp", render_gnuplot(gp));
    write_file(dir / "fit_summary.csv", summary.str());
    out << summary.str();
    return int(kExitOk);
  });
}

} // namespace lppl::cli
