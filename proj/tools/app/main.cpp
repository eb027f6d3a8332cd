#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include <kfp/errors.hpp>
#include <kfp/functionals.hpp>
#include <kfp/weights.hpp>

#include "kfp_cli/config.hpp"
#include "kfp_cli/experiments.hpp"
#include "kfp_cli/scenario.hpp"

namespace {

using namespace kfp;
using namespace kfp::cli;
using nlohmann::json;

int emit(const Report& r) {
  std::cout << r.to_json().dump(2) << '\n';
  return r.pass() ? 0 : 1;
}

Scenario load(const std::string& path, const std::string& experiment) {
  Scenario s = scenario_from_config(Config::load(path));
  if (!experiment.empty()) s.experiment = experiment;
  return s;
}

int cmd_rates(const std::string& in, const std::vector<double>& window, const std::string& column) {
  std::ifstream is(in);
  if (!is) throw ConfigError("cannot read '" + in + "'");
  const CsvTable t = read_csv(is);
  if (t.header.empty() || t.header.front() != "t") throw ConfigError(in + ": first column must be 't'");
  const auto& times = t.columns.front();
  if (times.empty()) throw ConfigError(in + ": no rows");
  const double T = times.back();
  json out = json::object();
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const std::string& name = t.header[c];
    if (column.empty() ? (name == "mass" || name == "min") : name != column) continue;
    const RateFit fit = fit_rate(times, t.columns[c], window[0] * T, window[1] * T);
    out[name] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}, {"points", fit.points}};
  }
  if (out.empty()) throw ConfigError(column.empty() ? in + ": no norm columns" : in + ": no column '" + column + "'");
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_classify(double k, double zeta, double s, int dim, const std::string& form) {
  WeightSpec w = WeightSpec::stretched(k, zeta, s);
  if (form == "gaussian") w = WeightSpec::gaussian(zeta);
  else if (form == "gaussian-negative") w = WeightSpec::gaussian_negative(zeta);
  else if (form == "maxwell") w = WeightSpec::maxwell_exponent(k);
  else if (form != "stretched") throw ConfigError("unknown weight form '" + form + "'");
  const auto cls = classify(w, dim);
  json tags = json::array();
  for (auto c : cls.classes) tags.push_back(to_string(c));
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
  std::cout << json{{"weight", w.describe()},
                    {"dim", dim},
                    {"classes", tags},
                    {"kappa", num(cls.kappa.kappa)},
                    {"kappa_star", num(cls.kappa.kappa_star)},
                    {"argmax_r", cls.kappa.argmax_r}}
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_export(const std::string& config, const std::string& prefix) {
  const Scenario s = load(config, "");
  const Generator gen = assemble_generator(s.make_grid());
  const std::string out = prefix.empty() ? s.operators_out : prefix;
  if (out.empty()) throw ConfigError("export-operator: no output prefix (--out or output.operators)");
  auto write = [&](const std::string& suffix, const SparseMatrix& m) {
    std::ofstream os(out + suffix);
    if (!os) throw ConfigError("cannot write '" + out + suffix + "'");
    write_coo(os, m);
  };
  write("_L.coo", gen.matrix);
  write("_C.coo", assemble_collision(*gen.grid));
  write("_T.coo", gen.transport);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic Fokker-Planck numerical lab"};
  app.set_version_flag("--version", std::string(KFP_VERSION_STRING));
  app.require_subcommand(1);

  std::string config, out, in, column, form = "stretched", prefix;
  std::vector<double> window{0.5, 1.0};
  double k = 0.0, zeta = 0.0, s = 0.0;
  int dim = 1;
  bool eps_scan = false;

  auto* run = app.add_subcommand("run", "Run the experiment named in a scenario file");
  run->add_option("--config", config, "Scenario file")->required();

  auto* evolve = app.add_subcommand("evolve", "Evolve a scenario and write the trajectory CSV");
  evolve->add_option("--config", config, "Scenario file")->required();
  evolve->add_option("--out", out, "Trajectory CSV (overrides output.csv)");

  auto* rates = app.add_subcommand("rates", "Fit exponential rates to trajectory CSV columns");
  rates->add_option("--in", in, "Trajectory CSV")->required();
  rates->add_option("--window", window, "Fit window as fractions of the final time")->expected(2);
  rates->add_option("--column", column, "Single column to fit");

  auto* cw = app.add_subcommand("classify-weight", "Print class tags and kappa of a weight as JSON");
  cw->add_option("--k", k, "Polynomial exponent (or Maxwellian power for --form maxwell)");
  cw->add_option("--zeta", zeta, "Exponential coefficient");
  cw->add_option("--s", s, "Stretch exponent");
  cw->add_option("--dim", dim, "Velocity dimension")->check(CLI::Range(1, 3));
  cw->add_option("--form", form, "stretched | gaussian | gaussian-negative | maxwell");

  auto* hc = app.add_subcommand("hypocoercivity", "Coercivity certificate of the twisted norm");
  hc->add_option("--config", config, "Scenario file")->required();
  hc->add_flag("--eps-scan", eps_scan, "Include the full eps scan in the output");

  auto* ex = app.add_subcommand("export-operator", "Write L, C and T in coordinate format");
  ex->add_option("--config", config, "Scenario file")->required();
  ex->add_option("--out", prefix, "Output prefix");

  std::vector<std::pair<std::string, CLI::App*>> experiments;
  for (const std::string name : {"mass-conservation", "stationarity", "dg-contraction", "duality", "relaxation",
                                 "ultracontractivity", "reference-compare", "splitting-decay",
                                 "boundary-penalization"}) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", config, "Scenario file")->required();
    experiments.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return emit(run_experiment(load(config, "")));
    if (*evolve) {
      Scenario sc = load(config, "evolve");
      if (!out.empty()) sc.csv_out = out;
      if (sc.csv_out.empty()) throw ConfigError("evolve: no output path (--out or output.csv)");
      return emit(run_experiment(sc));
    }
    if (*rates) return cmd_rates(in, window, column);
    if (*cw) return cmd_classify(k, zeta, s, dim, form);
    if (*ex) return cmd_export(config, prefix);
    if (*hc) {
      Report r = run_experiment(load(config, "hypocoercivity"));
      if (!eps_scan) r.measured.erase("scan");
      return emit(r);
    }
    for (const auto& [name, sub] : experiments)
      if (*sub) return emit(run_experiment(load(config, name)));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "kfp: %s\n", e.what());
    return 2;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "kfp: %s\n", e.what());
    return 2;
  } catch (const NumericalAbort& e) {
    std::fprintf(stderr, "kfp: numerical abort: %s\n", e.what());
    return 3;
  }
  return 2;
}
