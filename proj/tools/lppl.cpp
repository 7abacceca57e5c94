#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lppl/cli/app.hpp"

namespace {

void add_common(CLI::App* cmd, lppl::cli::CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "experiment config (YAML)")->required();
  cmd->add_option_function<std::string>("-o,--out-dir", [&o](const std::string& v) { o.out_dir = v; },
                                        "output directory (overrides LPPL_OUT_DIR and the config)");
  cmd->add_option_function<std::size_t>("-j,--workers", [&o](const std::size_t& v) { o.workers = v; },
                                        "worker threads (overrides LPPL_WORKERS; default: cores)");
  cmd->add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& v) { o.seed = v; },
                                          "replace the sweep seeds by this root seed");
  cmd->add_flag("--dense-oracle", o.dense_oracle, "cross-check Krylov energies by dense diagonalization");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-perturbation experiments on weakly interacting quantum spin lattices"};
  app.require_subcommand(1);

  lppl::cli::CommonOptions run_opts, sweep_opts;
  lppl::cli::CheckOptions check_opts;
  std::string results_path;
  std::optional<std::string> plot_dir;

  auto* run = app.add_subcommand("run", "solve every sweep cell and write CSV, results and the resolved config");
  add_common(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "alias of run");
  add_common(sweep, sweep_opts);
  auto* check = app.add_subcommand("check", "ground-state commutator batteries on the configured system");
  add_common(check, check_opts.common);
  check->add_flag("--inject-excited", check_opts.inject_excited, "debug: test the first excited level instead");
  auto* plot = app.add_subcommand("plot", "SVG decay plots and a gnuplot script from a results file");
  plot->add_option("results", results_path, "results.json written by run")->required();
  plot->add_option_function<std::string>("-o,--out-dir", [&](const std::string& v) { plot_dir = v; },
                                         "plot directory (default: plots/ next to the results)");
  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lppl::cli::kExitValidation;
  }

  if (*run) return lppl::cli::cmd_run(run_opts, std::cout, std::cerr);
  if (*sweep) return lppl::cli::cmd_run(sweep_opts, std::cout, std::cerr);
  if (*check) return lppl::cli::cmd_check(check_opts, std::cout, std::cerr);
  if (*plot) return lppl::cli::cmd_plot(results_path, plot_dir, std::cout, std::cerr);
  if (*version) {
    std::cout << "lppl " << lppl::cli::kVersion << "\n";
    return 0;
  }
  return lppl::cli::kExitValidation;
}
