#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "lppl/cli/app.hpp"

namespace fs = std::filesystem;
using namespace lppl;
using namespace lppl::cli;

namespace {

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lppl_cli_" + std::to_string(::getpid()) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  int run(const fs::path& config, const fs::path& out, std::size_t workers = 1) {
    CommonOptions o;
    o.config_path = config.string();
    o.out_dir = out.string();
    o.workers = workers;
    std::ostringstream so;
    return cmd_run(o, so, err_);
  }

  fs::path dir_;
  std::ostringstream err_;
};

const char* kMinimal = "schema_version: 1\nname: minimal\nsweep:\n  N: [4]\n";

} // namespace

TEST(Config, DefaultsAndRoundTrip) {
  const ExperimentConfig c = materialize(parse_config_text(kMinimal));
  EXPECT_EQ(c.sweep.n, std::vector<std::size_t>{4});
  EXPECT_EQ(c.fit.min_distance, 3);  // 2R + 1
  EXPECT_EQ(c.fit.regressor, "dist_yx");
  const std::string once = emit_config(c);
  const std::string twice = emit_config(materialize(parse_config_text(once)));
  EXPECT_EQ(once, twice);
}

TEST(Config, Errors) {
  try {
    parse_config_text("schema_version: 1\nname: x\nlattice:\n  dimenson: 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lattice.dimenson"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("schema_version: 1\nname: x\nsolver:\n  tol: -1\n"), ValidationError);
  EXPECT_THROW(parse_config_text("schema_version: 1\nname: x\nsweep:\n  N: [abc]\n"), ValidationError);
  EXPECT_THROW(parse_config_text("schema_version: 1\nname: x\ngeometry: sideways\n"), ValidationError);
  EXPECT_THROW(parse_config_text("schema_version: 2\nname: x\n"), ValidationError);
  EXPECT_THROW(parse_config_text("name: [unclosed\n"), ValidationError);
}

TEST(Config, FormatDouble) {
  EXPECT_EQ(format_double(1.0), "1.0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-13), "1e-13");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Output, CsvHeaderIsExact) {
  EXPECT_STREQ(kCsvHeader,
               "scenario_id,N,s,p_scale,branch,dist_YX,dist_Y_defect,abs_Y,discrepancy_obs,discrepancy_tracenorm,"
               "gap_H,gap_HP,resid,seed");
}

TEST(Output, FitLinePassesThroughExactPoints) {
  std::vector<LpplRecord> recs;
  for (Distance d = 1; d <= 8; ++d) {
    LpplRecord r;
    r.dist_yx = d;
    r.abs_y = 1;
    r.norm_a = 1.0;
    r.discrepancy_obs = 0.3 * std::exp(-0.8 * static_cast<double>(d));
    recs.push_back(r);
  }
  PlotSeries s;
  s.scenario_id = "synthetic";
  s.fit = fit_decay(recs);
  s.envelope = s.fit.envelope;
  for (const auto& p : s.envelope) EXPECT_NEAR(std::log(s.fit.predict(static_cast<double>(p.distance))), std::log(p.value), 1e-9);
  const std::string svg = render_svg("synthetic", {s});
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("c2_hat = 0.8"), std::string::npos);
  EXPECT_EQ(svg.find("below measurable range"), std::string::npos);
}

TEST(Output, BelowMeasurableRangeBanner) {
  std::vector<LpplRecord> recs;
  for (Distance d = 1; d <= 5; ++d) {
    LpplRecord r;
    r.dist_yx = d;
    r.norm_a = 1.0;
    r.discrepancy_obs = 1e-16;
    recs.push_back(r);
  }
  PlotSeries s;
  s.fit = fit_decay(recs);
  s.envelope = s.fit.envelope;
  EXPECT_NE(render_svg("floor", {s}).find("below measurable range"), std::string::npos);
}

TEST_F(CliTest, RunWritesOutputsAndIsDeterministic) {
  const fs::path cfg = write("sweep.yaml",
                             "schema_version: 1\nname: sweep\nperturbation:\n  operator: pauli_x\n  sites: [0]\n"
                             "sweep:\n  N: [5, 6]\n  s: [0.05, 0.1]\n  p_scale: [2.0]\n");
  ASSERT_EQ(run(cfg, dir_ / "a", 1), 0) << err_.str();
  ASSERT_EQ(run(cfg, dir_ / "b", 3), 0) << err_.str();
  const std::string a = read_file((dir_ / "a" / "records.csv").string());
  EXPECT_EQ(a, read_file((dir_ / "b" / "records.csv").string()));
  EXPECT_EQ(a.substr(0, a.find('\n')), kCsvHeader);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "results.json"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "resolved_config.yaml"));

  // The echoed config is a fixed point.
  const std::string echoed = read_file((dir_ / "a" / "resolved_config.yaml").string());
  EXPECT_EQ(emit_config(materialize(parse_config_text(echoed))), echoed);

  std::ostringstream po, pe;
  ASSERT_EQ(cmd_plot((dir_ / "a" / "results.json").string(), (dir_ / "plots").string(), po, pe), 0) << pe.str();
  std::size_t svgs = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "plots")) svgs += e.path().extension() == ".svg";
  EXPECT_EQ(svgs, 4u);
  EXPECT_TRUE(fs::exists(dir_ / "plots" / "plot.gp"));
  EXPECT_TRUE(fs::exists(dir_ / "plots" / "fit_summary.csv"));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run(dir_ / "missing.yaml", dir_ / "m"), kExitIo);
  EXPECT_EQ(run(write("bad.yaml", "schema_version: 1\nname: bad\nlattice:\n  gap: 0\n"), dir_ / "bad"), kExitValidation);
  const fs::path lg = write("lg.yaml",
                            "schema_version: 1\nname: lg\ngeometry: local_gap\ndefect:\n  enabled: true\n"
                            "  region_lo: [0]\n  region_hi: [3]\nobservables:\n  positions: [2, 5]\nsweep:\n  N: [6]\n");
  err_.str("");
  EXPECT_EQ(run(lg, dir_ / "lg"), kExitValidation);
  EXPECT_NE(err_.str().find("pauli_z@(5)"), std::string::npos) << err_.str();
  const fs::path stall = write("stall.yaml",
                               "schema_version: 1\nname: stall\nsweep:\n  N: [8]\nsolver:\n  max_matvecs: 5\n"
                               "  on_unconverged: fail\n");
  EXPECT_EQ(run(stall, dir_ / "stall"), kExitSolver);
  EXPECT_EQ(run(write("ok.yaml", kMinimal), dir_ / "ok"), kExitOk);

  std::ostringstream po, pe;
  EXPECT_EQ(cmd_plot((dir_ / "nothing.json").string(), std::nullopt, po, pe), kExitIo);
  write("corrupt.json", "{\"cells\": 3}");
  EXPECT_EQ(cmd_plot((dir_ / "corrupt.json").string(), std::nullopt, po, pe), kExitIo);
}

TEST_F(CliTest, CheckPassesAndInjectedExcitedFails) {
  const fs::path cfg = write("check.yaml",
                             "schema_version: 1\nname: check\nsweep:\n  N: [7]\ncheck:\n  trials: 50\n"
                             "  adversarial_restarts: 40\n");
  CheckOptions o;
  o.common.config_path = cfg.string();
  o.common.out_dir = (dir_ / "check").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check(o, out, err), kExitOk) << out.str() << err.str();
  EXPECT_NE(out.str().find("PASS"), std::string::npos);
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);

  o.inject_excited = true;
  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_check(o, out2, err2), kExitCheckFailed);
  EXPECT_NE(out2.str().find("FAIL"), std::string::npos);
  EXPECT_NE(out2.str().find("witness"), std::string::npos);

  const fs::path tiny = write("tiny.yaml", "schema_version: 1\nname: tiny\nsweep:\n  N: [3]\n");
  o.common.config_path = tiny.string();
  o.inject_excited = false;
  std::ostringstream out3, err3;
  EXPECT_EQ(cmd_check(o, out3, err3), kExitOk);
  EXPECT_NE(out3.str().find("empty bulk"), std::string::npos) << out3.str();
}
