#include "kfp_cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <numbers>
#include <thread>

#include <kfp/errors.hpp>

namespace kfp::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) out.push_back(item);
  return out;
}

Vec2 vec_of(const std::vector<double>& v) {
  if (v.size() == 1) return Vec2(v[0], 0.0);
  if (v.size() == 2) return Vec2(v[0], v[1]);
  throw ConfigError("expected one or two coordinates");
}

}  // namespace

WeightSpec parse_weight(const std::string& token) {
  const auto parts = split_colon(token);
  if (parts.empty()) throw ConfigError("empty weight");
  std::vector<double> a;
  for (std::size_t i = 1; i < parts.size(); ++i) a.push_back(parse_number(parts[i]));
  const std::string& kind = parts[0];
  try {
    if (kind == "poly" && a.size() == 1) return WeightSpec::polynomial(a[0]);
    if (kind == "stretched" && a.size() == 3) return WeightSpec::stretched(a[0], a[1], a[2]);
    if (kind == "gauss" && a.size() == 1) return WeightSpec::gaussian(a[0]);
    if (kind == "gaussneg" && a.size() == 1) return WeightSpec::gaussian_negative(a[0]);
    if (kind == "maxwell" && a.size() == 1) return WeightSpec::maxwell_exponent(a[0]);
  } catch (const PreconditionError& e) {
    throw ConfigError("weight '" + token + "': " + e.what());
  }
  throw ConfigError("cannot parse weight '" + token + "' (use poly:k, stretched:k:zeta:s, gauss:z, gaussneg:z, maxwell:a)");
}

Domain Scenario::domain() const {
  const Accommodation acc = iota.size() == 1 ? Accommodation(iota[0]) : Accommodation(iota);
  if (domain_kind == "interval") return Domain::interval(extent, acc);
  if (domain_kind == "disk") return Domain::disk(extent, acc);
  throw ConfigError("domain.kind must be 'interval' or 'disk', got '" + domain_kind + "'");
}

std::shared_ptr<const PhaseGrid> Scenario::make_grid() const { return build_grid(domain(), grid); }

std::map<std::string, std::string> Scenario::echo() const {
  std::map<std::string, std::string> e;
  e["experiment"] = experiment;
  e["domain.kind"] = domain_kind;
  e["domain.extent"] = fmt(extent);
  std::string io;
  for (double v : iota) io += (io.empty() ? "" : ",") + fmt(v);
  e["domain.iota"] = io;
  e["grid.nx"] = std::to_string(grid.nx);
  e["grid.nv"] = std::to_string(grid.nv);
  e["grid.vmax"] = fmt(grid.vmax);
  if (domain_kind == "disk") e["grid.angles"] = std::to_string(grid.spatial_angles);
  e["stepper.scheme"] = to_string(stepper.scheme);
  e["stepper.dt"] = fmt(stepper.dt);
  e["time.final"] = fmt(T);
  e["fit.window"] = fmt(window_lo) + "," + fmt(window_hi);
  e["initial.kind"] = initial.kind;
  e["initial.x0"] = fmt(initial.x0[0]) + "," + fmt(initial.x0[1]);
  e["initial.v0"] = fmt(initial.v0[0]) + "," + fmt(initial.v0[1]);
  e["initial.sx"] = fmt(initial.sx);
  e["initial.sv"] = fmt(initial.sv);
  e["initial.width"] = fmt(initial.width);
  std::string ws;
  for (const auto& w : weight_names) ws += (ws.empty() ? "" : ",") + w;
  e["weights"] = ws;
  std::string ex;
  for (double p : exponents) ex += (ex.empty() ? "" : ",") + fmt(p);
  e["exponents"] = ex;
  e["samples"] = std::to_string(samples);
  e["duality.pairs"] = std::to_string(pairs);
  e["refinements"] = std::to_string(refinements);
  e["penalization.q"] = fmt(q);
  e["penalization.beta"] = fmt(beta);
  e["seed"] = std::to_string(seed);
  return e;
}

Scenario scenario_from_config(const Config& c) {
  Scenario s;
  s.experiment = c.str("experiment", s.experiment);
  s.domain_kind = c.str("domain.kind", s.domain_kind);
  s.extent = c.num("domain.extent", s.extent);
  s.iota = c.list("domain.iota", s.iota);
  s.grid.nx = static_cast<int>(c.integer("grid.nx", s.grid.nx));
  s.grid.nv = static_cast<int>(c.integer("grid.nv", s.grid.nv));
  s.grid.vmax = c.num("grid.vmax", s.grid.vmax);
  const int angles = static_cast<int>(c.integer("grid.angles", s.grid.spatial_angles));
  s.grid.spatial_angles = angles;
  s.grid.velocity_angles = angles;
  try {
    s.stepper.scheme = parse_scheme(c.str("stepper.scheme", "imex"));
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("key 'stepper.scheme': ") + e.what());
  }
  s.stepper.dt = c.num("stepper.dt", 0.0);
  s.T = c.num("time.final", s.T);
  const auto win = c.list("fit.window", {s.window_lo, s.window_hi});
  if (win.size() != 2 || !(win[0] >= 0.0 && win[0] < win[1] && win[1] <= 1.0))
    throw ConfigError("key 'fit.window': expected two fractions 0 <= a < b <= 1");
  s.window_lo = win[0];
  s.window_hi = win[1];
  s.initial.kind = c.str("initial.kind", s.initial.kind);
  const std::vector<std::string> kinds = {"gaussian-pulse", "equilibrium", "random-seeded", "wall-layer", "point"};
  if (std::find(kinds.begin(), kinds.end(), s.initial.kind) == kinds.end())
    throw ConfigError("key 'initial.kind': unknown datum '" + s.initial.kind + "'");
  try {
    if (c.has("initial.x0")) s.initial.x0 = vec_of(c.list("initial.x0", {}));
    if (c.has("initial.v0")) s.initial.v0 = vec_of(c.list("initial.v0", {}));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("initial.x0/v0: ") + e.what());
  }
  s.initial.sx = c.num("initial.sx", s.initial.sx);
  s.initial.sv = c.num("initial.sv", s.initial.sv);
  s.initial.width = c.num("initial.width", s.initial.width);
  s.weight_names = c.words("weights", {"poly:3"});
  for (const auto& w : s.weight_names) s.weights.push_back(parse_weight(w));
  s.exponents = c.list("exponents", s.exponents);
  for (double p : s.exponents)
    if (!(p >= 1.0)) throw ConfigError("key 'exponents': every p must be >= 1");
  s.samples = static_cast<int>(c.integer("samples", s.samples));
  s.pairs = static_cast<int>(c.integer("duality.pairs", s.pairs));
  s.refinements = static_cast<int>(c.integer("refinements", s.refinements));
  s.q = c.num("penalization.q", s.q);
  s.beta = c.num("penalization.beta", s.beta);
  const long seed = c.integer("seed", 1);
  if (seed < 0) throw ConfigError("key 'seed': must be >= 0");
  s.seed = static_cast<unsigned long long>(seed);
  s.csv_out = c.str("output.csv", "");
  s.json_out = c.str("output.json", "");
  s.operators_out = c.str("output.operators", "");
  if (s.samples < 1 || s.pairs < 1 || s.refinements < 1) throw ConfigError("samples, duality.pairs, refinements must be >= 1");
  if (!(s.T > 0.0)) throw ConfigError("key 'time.final': must be positive");
  return s;
}

Field random_field(const PhaseGrid& grid, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Field f(grid.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = u(rng);
  return f;
}

Field initial_datum(const Scenario& s, const PhaseGrid& grid, int sample) {
  const auto& in = s.initial;
  const int d = grid.dim();
  if (in.kind == "equilibrium") return grid.steady_state();
  if (in.kind == "random-seeded") return random_field(grid, s.seed + static_cast<unsigned long long>(sample));
  if (in.kind == "point") {
    // All mass in the cell and velocity node nearest to (x0, v0).
    int bx = 0, bv = 0;
    for (int i = 0; i < grid.nx(); ++i)
      if ((grid.centers()[i] - in.x0).norm() < (grid.centers()[bx] - in.x0).norm()) bx = i;
    for (int j = 0; j < grid.nv(); ++j)
      if ((grid.v(j) - in.v0).norm() < (grid.v(bv) - in.v0).norm()) bv = j;
    Field f = Field::Zero(grid.size());
    f[grid.index(bx, bv)] = 1.0 / (grid.volumes()[bx] * grid.wv(bv));
    return f;
  }
  if (in.kind == "wall-layer") {
    const Domain& dom = grid.domain();
    Field f = grid.sample([&](const Vec2& x, const Vec2& v) {
      return std::exp(-dom.signed_distance(x) / in.width) * maxwellian(v.norm(), d);
    });
    return f / grid.mass(f);
  }
  // gaussian-pulse: normalised Gaussian in x and v
  const double cx = std::pow(2.0 * std::numbers::pi * in.sx * in.sx, -0.5 * d);
  const double cv = std::pow(2.0 * std::numbers::pi * in.sv * in.sv, -0.5 * d);
  return grid.sample([&](const Vec2& x, const Vec2& v) {
    return cx * cv * std::exp(-(x - in.x0).squaredNorm() / (2.0 * in.sx * in.sx) -
                              (v - in.v0).squaredNorm() / (2.0 * in.sv * in.sv));
  });
}

int worker_count() {
  if (const char* env = std::getenv("KFP_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace kfp::cli
