#pragma once

#include <kfp/discretization.hpp>
#include <kfp/evolution.hpp>
#include <kfp/geometry.hpp>
#include <kfp/weights.hpp>
#include <map>
#include <string>
#include <vector>

#include "kfp_cli/config.hpp"

namespace kfp::cli {

struct InitialSpec {
  std::string kind = "gaussian-pulse";  // gaussian-pulse | equilibrium | random-seeded | wall-layer | point
  Vec2 x0{0.5, 0.0};
  Vec2 v0{0.0, 0.0};
  double sx = 0.06;
  double sv = 0.6;
  double width = 0.05;  // wall-layer thickness
};

struct Scenario {
  std::string experiment = "evolve";
  std::string domain_kind = "interval";
  double extent = 1.0;
  std::vector<double> iota{1.0};
  GridSpec grid{};
  StepperSpec stepper{};
  double T = 1.0;
  double window_lo = 0.5;  // fit window as fractions of T
  double window_hi = 1.0;
  InitialSpec initial{};
  std::vector<std::string> weight_names;
  std::vector<WeightSpec> weights;
  std::vector<double> exponents{1.0, 2.0, kInfinity};
  int samples = 5;
  int pairs = 20;
  int refinements = 1;  // dyadic refinements beyond the base grid
  double q = 0.0;     // 0 selects the default exponent
  double beta = 0.0;  // 0 selects 1/(2(d+1))
  unsigned long long seed = 1;
  std::string csv_out;
  std::string json_out;
  std::string operators_out;

  Domain domain() const;
  std::shared_ptr<const PhaseGrid> make_grid() const;
  /// Config echo: the keys that define this scenario, as text.
  std::map<std::string, std::string> echo() const;
};

/// Parses "poly:k", "stretched:k:zeta:s", "gauss:zeta", "gaussneg:zeta",
/// "maxwell:a" (M^a).
WeightSpec parse_weight(const std::string& token);

Scenario scenario_from_config(const Config& config);

/// Initial datum for a scenario; `sample` offsets the seed for random data.
Field initial_datum(const Scenario& s, const PhaseGrid& grid, int sample = 0);

/// Uniform random field in [0,1) from a seed.
Field random_field(const PhaseGrid& grid, unsigned long long seed);

/// Number of workers from KFP_WORKERS (default: hardware concurrency, at least 1).
int worker_count();

}  // namespace kfp::cli
