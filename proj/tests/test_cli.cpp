#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kfp/errors.hpp"
#include "kfp_cli/config.hpp"
#include "kfp_cli/experiments.hpp"
#include "kfp_cli/scenario.hpp"

using namespace kfp;
using namespace kfp::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run_kfp(const std::string& args) {
  const std::string cmd = std::string(KFP_EXECUTABLE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "kfp_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Config, ParsesValuesAndComments) {
  const auto c = Config::parse("# comment\nexperiment = duality\ngrid.nx = 32  # trailing\nexponents = 1, 2 inf\n");
  EXPECT_EQ(c.str("experiment", ""), "duality");
  EXPECT_EQ(c.integer("grid.nx", 0), 32);
  const auto e = c.list("exponents", {});
  ASSERT_EQ(e.size(), 3u);
  EXPECT_TRUE(std::isinf(e[2]));
  EXPECT_EQ(c.integer("grid.nv", 7), 7);
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  try {
    Config::parse("grid.nx = 4\ngrid.nz = 5\n", "bad.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("grid.nz"), std::string::npos);
    EXPECT_NE(msg.find("bad.cfg:2"), std::string::npos);
  }
}

TEST(Config, RejectsDuplicatesAndMalformedLines) {
  EXPECT_THROW(Config::parse("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(Config::parse("seed 1\n"), ConfigError);
  EXPECT_THROW(Config::parse("grid.nx = abc\n").integer("grid.nx", 0), ConfigError);
}

TEST(Scenario, BuildsFromConfig) {
  const auto s = scenario_from_config(Config::parse(
      "experiment = relaxation\ndomain.kind = disk\ndomain.iota = 0.2 0.8\ngrid.nx = 6\ngrid.nv = 5\ngrid.angles = 16\n"
      "weights = poly:4 gauss:0.2\ntime.final = 2\nfit.window = 0.25 0.75\n"));
  EXPECT_EQ(s.experiment, "relaxation");
  EXPECT_EQ(s.weights.size(), 2u);
  EXPECT_DOUBLE_EQ(s.window_lo, 0.25);
  const auto g = s.make_grid();
  EXPECT_EQ(g->dim(), 2);
  EXPECT_EQ(g->nv(), 5 * 16);
}

TEST(Scenario, RejectsBadValues) {
  EXPECT_THROW(scenario_from_config(Config::parse("initial.kind = spike\n")), ConfigError);
  EXPECT_THROW(scenario_from_config(Config::parse("exponents = 0.5\n")), ConfigError);
  EXPECT_THROW(scenario_from_config(Config::parse("fit.window = 0.8 0.2\n")), ConfigError);
  EXPECT_THROW(parse_weight("cubic:3"), ConfigError);
}

TEST(Scenario, WeightTokens) {
  EXPECT_DOUBLE_EQ(parse_weight("poly:3")(2.0, 1), std::pow(5.0, 1.5));
  EXPECT_NEAR(parse_weight("gauss:0.2")(1.0, 1), std::exp(0.2), 1e-15);
  EXPECT_NEAR(parse_weight("stretched:0:1:1")(0.0, 1), std::exp(1.0), 1e-15);
}

TEST(Csv, RoundTrip) {
  Trajectory t;
  t.times = {0.0, 0.1};
  t.mass = {1.0, 1.0 + 1e-16};
  t.min = {0.0, 1.0 / 3.0};
  t.probe_names = {"L2[poly:3]"};
  t.probes = {{2.0, 1.0 / 7.0}};
  std::stringstream ss;
  write_trajectory_csv(ss, t);
  const auto table = read_csv(ss);
  ASSERT_EQ(table.header.size(), 4u);
  EXPECT_EQ(table.header[3], "L2[poly:3]");
  EXPECT_EQ(table.columns[2][1], 1.0 / 3.0);
  EXPECT_EQ(table.columns[3][1], 1.0 / 7.0);
  EXPECT_EQ(table.columns[1][1], 1.0 + 1e-16);
}

TEST(Experiments, MassConservationReportPasses) {
  const auto s = scenario_from_config(
      Config::parse("experiment = mass-conservation\ngrid.nx = 16\ngrid.nv = 16\ntime.final = 1\nseed = 4\n"));
  const Report r = run_experiment(s);
  EXPECT_TRUE(r.pass());
  const auto j = r.to_json();
  EXPECT_EQ(j["inputs"]["seed"], "4");
  EXPECT_TRUE(j.contains("version"));
  EXPECT_LE(j["measured"]["mass_drift"].get<double>(), 1e-12);
}

TEST(Experiments, RelaxationRecordsRatesAndResiduals) {
  const auto s = scenario_from_config(Config::parse(
      "experiment = relaxation\ngrid.nx = 8\ngrid.nv = 12\ntime.final = 4\ninitial.kind = random-seeded\n"
      "samples = 2\nexponents = 1 2\n"));
  const Report r = run_experiment(s);
  const auto& fits = r.measured["fits"];
  ASSERT_FALSE(fits.empty());
  for (const auto& [name, f] : fits.items()) {
    EXPECT_LT(f["mean"].get<double>(), 0.0) << name;
    EXPECT_TRUE(f.contains("max_residual"));
  }
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<int> hits(100, 0);
  parallel_for(100, [&](int i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](int i) { if (i == 3) throw PreconditionError("boom"); }), PreconditionError);
}

TEST(Executable, ExitCodes) {
  const auto good = scratch("good.cfg");
  write(good, "experiment = stationarity\ngrid.nx = 8\ngrid.nv = 8\ntime.final = 0.5\n");
  EXPECT_EQ(run_kfp("run --config " + good.string()), 0);
  const auto bad = scratch("bad.cfg");
  write(bad, "experiment = stationarity\ngrid.mx = 8\n");
  EXPECT_EQ(run_kfp("run --config " + bad.string()), 2);
  EXPECT_EQ(run_kfp("run --config " + scratch("missing.cfg").string()), 2);
  EXPECT_EQ(run_kfp("frobnicate"), 2);
  const auto pre = scratch("pre.cfg");
  write(pre, "experiment = evolve\ngrid.nx = 1\n");
  EXPECT_EQ(run_kfp("run --config " + pre.string()), 2);
  const auto cfl = scratch("cfl.cfg");
  write(cfl, "experiment = stationarity\ngrid.nx = 8\ngrid.nv = 8\nstepper.dt = 10\n");
  EXPECT_EQ(run_kfp("run --config " + cfl.string()), 2);
  // A failing check exits with 1: the L1 error bound cannot hold on a 16 x 16 grid.
  const auto fail = scratch("fail.cfg");
  write(fail, "experiment = reference-compare\ngrid.nx = 16\ngrid.nv = 16\ntime.final = 0.1\nrefinements = 1\n");
  EXPECT_EQ(run_kfp("run --config " + fail.string()), 1);
}

TEST(Executable, EvolveIsBitReproducible) {
  const auto cfg = scratch("evolve.cfg");
  write(cfg, "grid.nx = 16\ngrid.nv = 16\ntime.final = 0.5\ninitial.kind = random-seeded\nseed = 9\n"
             "weights = poly:3\nexponents = 1 inf\n");
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  ASSERT_EQ(run_kfp("evolve --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(run_kfp("evolve --config " + cfg.string() + " --out " + b.string()), 0);
  const std::string ca = slurp(a);
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(b));
  EXPECT_EQ(ca.substr(0, ca.find('\n')), "t,mass,min,L1[poly:3],Linf[poly:3]");
  EXPECT_EQ(run_kfp("rates --in " + a.string() + " --window 0.5 1.0"), 0);
  EXPECT_EQ(run_kfp("rates --in " + a.string() + " --column nope"), 2);
}

TEST(Executable, ClassifyAndExport) {
  EXPECT_EQ(run_kfp("classify-weight --k 3 --dim 1"), 0);
  EXPECT_EQ(run_kfp("classify-weight --k 0 --zeta 0.6 --s 2 --dim 1"), 0);
  EXPECT_EQ(run_kfp("classify-weight --zeta 0.7 --dim 1 --form gaussian"), 2);
  const auto cfg = scratch("export.cfg");
  write(cfg, "grid.nx = 4\ngrid.nv = 4\n");
  const auto prefix = scratch("op").string();
  EXPECT_EQ(run_kfp("export-operator --config " + cfg.string() + " --out " + prefix), 0);
  EXPECT_TRUE(std::filesystem::exists(prefix + "_L.coo"));
  EXPECT_TRUE(std::filesystem::exists(prefix + "_C.coo"));
  EXPECT_TRUE(std::filesystem::exists(prefix + "_T.coo"));
}
