#include "kfp_cli/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <kfp/errors.hpp>
#include <kfp/functionals.hpp>
#include <kfp/hypocoercivity.hpp>
#include <kfp/reference.hpp>

namespace kfp::cli {

using nlohmann::json;

namespace {

Check make_check(const std::string& name, double value, const std::string& rel, double b, double hi, bool pass) {
  Check c;
  c.name = name;
  c.value = value;
  c.relation = rel;
  c.bound = b;
  c.bound_hi = hi;
  c.pass = pass && std::isfinite(value);
  return c;
}

std::string p_name(double p) {
  if (std::isinf(p)) return "inf";
  std::ostringstream os;
  os << p;
  return os.str();
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Report start(const Scenario& s, const std::string& name) {
  Report r;
  r.experiment = name;
  r.inputs = s.echo();
  r.inputs["experiment"] = name;
  return r;
}

std::vector<Probe> norm_probes(const Scenario& s, const PhaseGrid& grid, const Field* shift) {
  std::vector<Probe> probes;
  for (std::size_t k = 0; k < s.weights.size(); ++k)
    for (double p : s.exponents) {
      const WeightSpec w = s.weights[k];
      const Eigen::VectorXd wv = [&] {
        Eigen::VectorXd out(grid.nv());
        for (int j = 0; j < grid.nv(); ++j) out[j] = w(grid.v(j), grid.dim());
        return out;
      }();
      const std::string name = "L" + p_name(p) + "[" + s.weight_names[k] + "]";
      if (shift) {
        const Field sh = *shift;
        probes.push_back({name, [&grid, wv, p, sh](const Field& f) { return weighted_lp_norm(grid, Field(f - sh), wv, p); }});
      } else {
        probes.push_back({name, [&grid, wv, p](const Field& f) { return weighted_lp_norm(grid, f, wv, p); }});
      }
    }
  return probes;
}

double max_rel_drift(const std::vector<double>& mass) {
  double worst = 0.0;
  const double m0 = mass.front();
  for (double m : mass) worst = std::max(worst, std::abs(m - m0) / std::abs(m0));
  return worst;
}

// Largest relative step-to-step increase of a series.
double max_increase(const std::vector<double>& series) {
  double worst = -kInfinity;
  for (std::size_t k = 1; k < series.size(); ++k)
    worst = std::max(worst, (series[k] - series[k - 1]) / std::max(series[k - 1], 1e-300));
  return worst;
}

double spread(const std::vector<double>& rates) {
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(rates.size());
  return (*hi - *lo) / std::abs(mean);
}

void write_outputs(const Scenario& s, const Trajectory& traj) {
  if (s.csv_out.empty()) return;
  std::ofstream out(s.csv_out);
  if (!out) throw ConfigError("cannot write '" + s.csv_out + "'");
  write_trajectory_csv(out, traj);
}

}  // namespace

Check check_le(const std::string& n, double v, double b) { return make_check(n, v, "<=", b, 0.0, v <= b); }
Check check_ge(const std::string& n, double v, double b) { return make_check(n, v, ">=", b, 0.0, v >= b); }
Check check_lt(const std::string& n, double v, double b) { return make_check(n, v, "<", b, 0.0, v < b); }
Check check_gt(const std::string& n, double v, double b) { return make_check(n, v, ">", b, 0.0, v > b); }
Check check_in(const std::string& n, double v, double lo, double hi) {
  return make_check(n, v, "in", lo, hi, v >= lo && v <= hi);
}

bool Report::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json Report::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["version"] = KFP_VERSION_STRING;
  j["inputs"] = inputs;
  j["measured"] = measured;
  json cs = json::array();
  for (const auto& c : checks) {
    json e{{"name", c.name}, {"value", number(c.value)}, {"relation", c.relation}, {"bound", number(c.bound)},
           {"pass", c.pass}};
    if (c.relation == "in") e["bound_hi"] = number(c.bound_hi);
    cs.push_back(e);
  }
  j["checks"] = cs;
  j["pass"] = pass();
  j["wall_clock_s"] = wall_clock;
  return j;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,mass,min";
  for (const auto& n : traj.probe_names) os << ',' << n;
  os << '\n';
  char buf[40];
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
    os << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", traj.mass[k]);
    os << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", traj.min[k]);
    os << buf;
    for (const auto& p : traj.probes) {
      std::snprintf(buf, sizeof buf, ",%.17g", p[k]);
      os << buf;
    }
    os << '\n';
  }
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  t.columns.resize(t.header.size());
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= t.header.size()) throw ConfigError("CSV row " + std::to_string(row) + ": too many cells");
      try {
        t.columns[c].push_back(parse_number(cell));
      } catch (const ConfigError&) {
        throw ConfigError("CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
      ++c;
    }
    if (c != t.header.size()) throw ConfigError("CSV row " + std::to_string(row) + ": too few cells");
  }
  return t;
}

std::vector<std::string> experiment_names() {
  return {"evolve",     "mass-conservation",  "stationarity",      "dg-contraction",  "duality",
          "hypocoercivity", "relaxation",    "ultracontractivity", "reference-compare", "splitting-decay",
          "boundary-penalization"};
}

Report run_experiment(const Scenario& s) {
  const auto t0 = std::chrono::steady_clock::now();
  Report r;
  const std::string& e = s.experiment;
  if (e == "evolve") r = experiment_evolve(s);
  else if (e == "mass-conservation") r = experiment_mass_conservation(s);
  else if (e == "stationarity") r = experiment_stationarity(s);
  else if (e == "dg-contraction") r = experiment_dg_contraction(s);
  else if (e == "duality") r = experiment_duality(s);
  else if (e == "hypocoercivity") r = experiment_hypocoercivity(s);
  else if (e == "relaxation") r = experiment_relaxation(s);
  else if (e == "ultracontractivity") r = experiment_ultracontractivity(s);
  else if (e == "reference-compare") r = experiment_reference_compare(s);
  else if (e == "splitting-decay") r = experiment_splitting_decay(s);
  else if (e == "boundary-penalization") r = experiment_boundary_penalization(s);
  else throw ConfigError("unknown experiment '" + e + "'");
  r.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!s.json_out.empty()) {
    std::ofstream out(s.json_out);
    if (!out) throw ConfigError("cannot write '" + s.json_out + "'");
    out << r.to_json().dump(2) << '\n';
  }
  return r;
}

Report experiment_evolve(const Scenario& s) {
  Report r = start(s, "evolve");
  const auto grid = s.make_grid();
  const Generator gen = assemble_generator(grid);
  const Field f0 = initial_datum(s, *grid);
  const auto traj = evolve(gen, f0, s.T, s.stepper, norm_probes(s, *grid, nullptr));
  write_outputs(s, traj);
  r.measured["steps"] = traj.steps;
  r.measured["dt"] = traj.dt;
  r.measured["mass_drift"] = max_rel_drift(traj.mass);
  r.measured["min"] = *std::min_element(traj.min.begin(), traj.min.end());
  json fin = json::object();
  for (std::size_t k = 0; k < traj.probe_names.size(); ++k) fin[traj.probe_names[k]] = number(traj.probes[k].back());
  r.measured["final_norms"] = fin;
  return r;
}

Report experiment_mass_conservation(const Scenario& s) {
  Report r = start(s, "mass-conservation");
  const auto grid = s.make_grid();
  const Generator gen = assemble_generator(grid);
  const Field f0 = initial_datum(s, *grid);
  const auto traj = evolve(gen, f0, s.T, s.stepper);
  write_outputs(s, traj);
  const double drift = max_rel_drift(traj.mass);
  const double mn = *std::min_element(traj.min.begin(), traj.min.end());
  r.measured["steps"] = traj.steps;
  r.measured["dt"] = traj.dt;
  r.measured["mass_drift"] = drift;
  r.measured["min"] = mn;
  r.checks.push_back(check_le("relative mass drift", drift, 1e-12));
  r.checks.push_back(check_ge("min f", mn, -1e-14));
  return r;
}

Report experiment_stationarity(const Scenario& s) {
  Report r = start(s, "stationarity");
  const auto grid = s.make_grid();
  const Generator gen = assemble_generator(grid);
  const Field finf = grid->steady_state();
  const double res = gen.apply(finf).cwiseAbs().maxCoeff();
  const auto traj = evolve(gen, finf, s.T, s.stepper);
  const double drift = (traj.final_state - finf).cwiseAbs().maxCoeff();
  r.measured["generator_residual"] = res;
  r.measured["evolution_drift"] = drift;
  r.checks.push_back(check_le("max |L f_inf|", res, 1e-12));
  r.checks.push_back(check_le("max |f(T) - f_inf|", drift, 1e-10));
  return r;
}

Report experiment_dg_contraction(const Scenario& s) {
  Report r = start(s, "dg-contraction");
  const auto grid = s.make_grid();
  const Generator gen = assemble_generator(grid);
  const std::vector<double> ps{1.0, 2.0};
  std::vector<std::vector<double>> inc(s.samples, std::vector<double>(ps.size()));
  parallel_for(s.samples, [&](int k) {
    const Field f0 = random_field(*grid, s.seed + k);
    std::vector<Probe> probes;
    for (double p : ps) probes.push_back({"DG" + p_name(p), [&grid, p](const Field& f) { return dg_norm(*grid, f, p); }});
    const auto traj = evolve(gen, f0, s.T, s.stepper, probes);
    for (std::size_t i = 0; i < ps.size(); ++i) inc[k][i] = max_increase(traj.probes[i]);
  });
  json per = json::array();
  double worst = -kInfinity;
  for (int k = 0; k < s.samples; ++k) {
    per.push_back(numbers(inc[k]));
    for (double v : inc[k]) worst = std::max(worst, v);
  }
  r.measured["max_relative_increase"] = per;
  r.checks.push_back(check_le("max per-step relative increase (p=1,2)", worst, 1e-8));
  return r;
}

Report experiment_duality(const Scenario& s) {
  Report r = start(s, "duality");
  const auto grid = s.make_grid();
  const Generator gen = assemble_generator(grid);
  const Generator dual = assemble_dual(gen);
  StepperSpec spec = s.stepper;
  spec.dt = resolve_dt(gen, spec);
  std::vector<double> err(s.pairs);
  parallel_for(s.pairs, [&](int k) {
    const Field f0 = random_field(*grid, s.seed + 2 * k);
    const Field gT = random_field(*grid, s.seed + 2 * k + 1);
    const auto fwd = evolve(gen, f0, s.T, spec);
    const auto bwd = evolve_dual(dual, gT, s.T, spec);
    const double lhs = grid->inner(fwd.final_state, gT);
    const double rhs = grid->inner(f0, bwd.final_state);
    const double scale = std::sqrt(grid->inner(f0, f0) * grid->inner(gT, gT));
    err[k] = std::abs(lhs - rhs) / scale;
  });
  r.measured["relative_error"] = numbers(err);
  r.checks.push_back(check_le("max |<f(T),g_T> - <f0,g(0)>| / (|f0| |g_T|)", *std::max_element(err.begin(), err.end()),
                              1e-12));
  return r;
}

namespace {

json certificate_json(const CoercivityCertificate& c) {
  json scan = json::array();
  for (const auto& p : c.scan)
    scan.push_back({{"eps", p.eps},
                    {"admissible", p.admissible},
                    {"lambda_h", number(p.lambda_h)},
                    {"c1", number(p.c1)},
                    {"c2", number(p.c2)},
                    {"residual", number(p.residual)}});
  return {{"eps", c.eps},         {"lambda_h", number(c.lambda_h)},
          {"c1", number(c.c1)},   {"c2", number(c.c2)},
          {"grid", {{"nx", c.nx}, {"nv", c.nv}, {"vmax", c.vmax}}},
          {"scan", scan}};
}

double worst_equivalence_ratio(const CoercivityCertificate& c) {
  double worst = 0.0;
  for (const auto& p : c.scan)
    if (p.admissible && p.eps <= 0.25) worst = std::max(worst, p.c2 / p.c1);
  return worst > 0.0 ? worst : kInfinity;
}

}  // namespace

Report experiment_hypocoercivity(const Scenario& s) {
  Report r = start(s, "hypocoercivity");
  const auto grid = s.make_grid();
  const Generator gen = assemble_generator(grid);
  const auto cert = coercivity_certificate(gen);
  r.measured = certificate_json(cert);
  r.checks.push_back(check_gt("lambda_h at best eps", cert.lambda_h, 0.0));
  r.checks.push_back(check_le("max c2/c1 over eps <= 1/4", worst_equivalence_ratio(cert), 3.0));
  return r;
}

Report experiment_relaxation(const Scenario& s) {
  Report r = start(s, "relaxation");
  const auto grid = s.make_grid();
  const Generator gen = assemble_generator(grid);
  const std::size_t nprobe = s.weights.size() * s.exponents.size();
  std::vector<std::vector<double>> rates(nprobe, std::vector<double>(s.samples));
  std::vector<double> residuals(nprobe, 0.0);
  std::mutex m;
  std::vector<std::string> names;
  parallel_for(s.samples, [&](int k) {
    Scenario sk = s;
    if (sk.initial.kind != "random-seeded" && k > 0) sk.initial.kind = "random-seeded";
    const Field f0 = initial_datum(sk, *grid, k);
    const Field shift = grid->mass(f0) * grid->steady_state();
    const auto traj = evolve(gen, f0, s.T, s.stepper, norm_probes(s, *grid, &shift));
    for (std::size_t i = 0; i < nprobe; ++i) {
      const RateFit fit = fit_rate(traj.times, traj.probes[i], s.window_lo * s.T, s.window_hi * s.T);
      rates[i][k] = fit.slope;
      std::lock_guard<std::mutex> lock(m);
      residuals[i] = std::max(residuals[i], fit.residual);
      if (names.empty()) names = traj.probe_names;
    }
  });
  json per = json::object();
  double worst_rate = -kInfinity, worst_spread = 0.0;
  std::vector<double> means;
  for (std::size_t i = 0; i < nprobe; ++i) {
    double mean = 0.0;
    for (double v : rates[i]) mean += v;
    mean /= s.samples;
    means.push_back(mean);
    per[names[i]] = {{"rates", numbers(rates[i])}, {"mean", mean}, {"max_residual", residuals[i]}};
    worst_rate = std::max(worst_rate, *std::max_element(rates[i].begin(), rates[i].end()));
    if (s.samples > 1) worst_spread = std::max(worst_spread, spread(rates[i]));
  }
  r.measured["fits"] = per;
  r.checks.push_back(check_lt("largest fitted rate", worst_rate, 0.0));
  r.checks.push_back(check_le("rate spread across data", worst_spread, 0.10));
  if (grid->size() <= kDenseEigenLimit) {
    const auto cert = coercivity_certificate(gen);
    double worst_factor = 0.0;
    for (double m : means) {
      const double ratio = std::abs(m) / cert.lambda_h;
      worst_factor = std::max(worst_factor, std::max(ratio, 1.0 / ratio));
    }
    r.measured["lambda_h"] = number(cert.lambda_h);
    r.measured["lambda_h_eps"] = cert.eps;
    r.checks.push_back(check_le("max factor between |rate| and lambda_h", worst_factor, 2.0));
  } else {
    r.measured["lambda_h"] = "skipped: state too large for the dense certificate";
  }
  return r;
}

Report experiment_ultracontractivity(const Scenario& s) {
  Report r = start(s, "ultracontractivity");
  Scenario sp = s;
  sp.initial.kind = "point";
  const auto grid = s.make_grid();
  const int d = grid->dim();
  const Generator gen = assemble_generator(grid);
  const Field f0 = initial_datum(sp, *grid);
  // Location of the point mass actually used.
  Eigen::Index at = 0;
  f0.maxCoeff(&at);
  const int ix = static_cast<int>(at / grid->nv()), iv = static_cast<int>(at % grid->nv());
  const Vec2 x0 = grid->centers()[ix], v0 = grid->v(iv);
  const double l1 = grid->mass(f0);
  const Probe sup{"sup", [](const Field& f) { return f.cwiseAbs().maxCoeff(); }};
  const auto traj = evolve(gen, f0, s.T, s.stepper, {sup});
  const double t1 = 4.0 * traj.dt;
  const RateFit fit = fit_power(traj.times, traj.probes[0], t1, s.T);
  double worst = 0.0;
  std::vector<double> ts, num, ref;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    if (t < t1 || t > s.T) continue;
    const double m = l1 * mehler_sup(mehler_propagate(GaussianState::point_mass(d, x0, v0), t));
    worst = std::max(worst, std::abs(traj.probes[0][k] / m - 1.0));
    ts.push_back(t);
    num.push_back(traj.probes[0][k]);
    ref.push_back(m);
  }
  const double target = -2.0 * d;
  r.measured["dt"] = traj.dt;
  r.measured["window"] = {t1, s.T};
  r.measured["power"] = fit.slope;
  r.measured["power_residual"] = fit.residual;
  r.measured["nu_hat"] = -fit.slope;
  r.measured["times"] = numbers(ts);
  r.measured["sup_numeric"] = numbers(num);
  r.measured["sup_mehler"] = numbers(ref);
  r.checks.push_back(check_le("|power + 2d| / 2d", std::abs(fit.slope - target) / std::abs(target), 0.15));
  r.checks.push_back(check_le("max |sup / mehler sup - 1|", worst, 0.20));
  return r;
}

Report experiment_reference_compare(const Scenario& s) {
  Report r = start(s, "reference-compare");
  const int d = s.domain_kind == "interval" ? 1 : 2;
  const auto s0 = GaussianState::isotropic(d, s.initial.x0, s.initial.v0, s.initial.sx * s.initial.sx,
                                           s.initial.sv * s.initial.sv);
  const auto sT = mehler_propagate(s0, s.T);
  std::vector<double> errors;
  json levels = json::array();
  for (int level = 0; level <= s.refinements; ++level) {
    Scenario sl = s;
    sl.grid.nx = s.grid.nx << level;
    const auto grid = sl.make_grid();
    const Generator gen = assemble_generator(grid);
    const Field f0 = sample_gaussian(*grid, s0);
    const auto traj = evolve(gen, f0, s.T, s.stepper);
    const auto rep = interior_compare(*grid, traj.final_state, sT);
    errors.push_back(rep.l1_error);
    levels.push_back({{"grid", {{"nx", sl.grid.nx}, {"nv", sl.grid.nv}}},
                      {"l1_error", rep.l1_error},
                      {"containment_mass", rep.containment_mass},
                      {"initial_l1_error", interior_compare(*grid, f0, s0).l1_error}});
  }
  r.measured["l1_error"] = errors.front();
  r.measured["grid"] = {{"nx", s.grid.nx}, {"nv", s.grid.nv}, {"vmax", s.grid.vmax}};
  r.measured["containment_mass"] = containment_mass(s.domain(), sT);
  r.measured["levels"] = levels;
  r.checks.push_back(check_le("L1 error at base grid", errors.front(), 5e-2));
  for (std::size_t k = 1; k < errors.size(); ++k)
    r.checks.push_back(check_in("error ratio nx=" + std::to_string(s.grid.nx << (k - 1)) + " vs " +
                                    std::to_string(s.grid.nx << k),
                                errors[k - 1] / errors[k], 1.4, 2.6));
  return r;
}

Report experiment_splitting_decay(const Scenario& s) {
  Report r = start(s, "splitting-decay");
  const auto grid = s.make_grid();
  const int d = grid->dim();
  const WeightSpec& w = s.weights.front();
  const auto cls = classify(w, d);
  json tags = json::array();
  for (auto c : cls.classes) tags.push_back(to_string(c));
  r.measured["weight"] = s.weight_names.front();
  r.measured["classes"] = tags;
  const Generator gen = assemble_generator(grid);
  const SplitChoice ch = choose_split(w, *grid);
  const Split sp = split_generator(gen, ch.M, ch.R);
  r.measured["M"] = ch.M;
  r.measured["R"] = ch.R;
  r.measured["kappa_star"] = ch.kappa_star;
  r.measured["kappa"] = ch.kappa;
  r.measured["bound"] = ch.bound;
  // varpi - M chi_R on the grid speeds, both endpoint exponents.
  double excess = -kInfinity;
  for (int j = 0; j < grid->nv(); ++j) {
    const double rr = grid->v(j).norm();
    const double vp = std::max(varpi(w, 1.0, rr, d), varpi(w, kInfinity, rr, d));
    excess = std::max(excess, vp - ch.M * cutoff(rr / ch.R) - ch.bound);
  }
  r.measured["max_excess_over_bound"] = excess;
  json fits = json::object();
  double worst = -kInfinity;
  for (double p : s.exponents) {
    const auto fit = decay_rate_of_B(sp.B, w, p, s.T, s.stepper, s.samples, s.seed);
    fits["L" + p_name(p)] = {{"rate", fit.rate}, {"rates", numbers(fit.rates)}};
    worst = std::max(worst, fit.rate);
  }
  r.measured["fits"] = fits;
  r.checks.push_back(check_lt("largest fitted rate of S_B", worst, 0.0));
  r.checks.push_back(check_le("max_v (varpi - M chi_R) - bound", excess, 0.0));
  return r;
}

Report experiment_boundary_penalization(const Scenario& s) {
  Report r = start(s, "boundary-penalization");
  const int d = s.domain_kind == "interval" ? 1 : 2;
  const double q = s.q > 0.0 ? s.q : Exponents::compute(d).q;
  const double beta = s.beta > 0.0 ? s.beta : 1.0 / (2.0 * (d + 1));
  const int levels = s.refinements + 1;
  std::vector<double> c(levels), c2(levels);
  json lv = json::array();
  parallel_for(levels, [&](int k) {
    Scenario sk = s;
    sk.grid.nx = s.grid.nx << k;
    sk.grid.nv = s.grid.nv << k;
    const auto grid = sk.make_grid();
    const Generator gen = assemble_generator(grid);
    Field f0 = initial_datum(sk, *grid);
    f0 /= grid->mass(f0);
    const auto traj = evolve(gen, f0, s.T, s.stepper);
    c[k] = boundary_penalization(*grid, traj, q, beta).ratio;
    c2[k] = boundary_penalization(*grid, traj, q, 2.0 * beta).ratio;
  });
  double worst = 0.0;
  bool increasing = true;
  for (int k = 0; k < levels; ++k) {
    lv.push_back({{"nx", s.grid.nx << k}, {"nv", s.grid.nv << k}, {"C", c[k]}, {"C_2beta", c2[k]}});
    if (k > 0) {
      worst = std::max(worst, std::abs(c[k] / c[k - 1] - 1.0));
      increasing = increasing && c2[k] > c2[k - 1];
    }
  }
  const double growth = c2.back() / c2.front();
  const double growth_ref = c.back() / c.front();
  r.measured["q"] = q;
  r.measured["beta"] = beta;
  r.measured["levels"] = lv;
  r.measured["control_growth"] = growth;
  r.measured["reference_growth"] = growth_ref;
  r.checks.push_back(check_le("max |C_fine / C_coarse - 1|", worst, 0.20));
  r.checks.push_back(check_gt("2beta control increasing under refinement", increasing ? 1.0 : 0.0, 0.5));
  r.checks.push_back(check_gt("2beta growth minus reference growth", growth - growth_ref, 0.0));
  return r;
}

}  // namespace kfp::cli
