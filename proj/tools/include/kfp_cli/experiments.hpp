#pragma once

#include <functional>
#include <iosfwd>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "kfp_cli/scenario.hpp"

namespace kfp::cli {

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "<", ">", "in"
  double bound = 0.0;
  double bound_hi = 0.0;  // upper end for "in"
  bool pass = false;
};

Check check_le(const std::string& name, double value, double bound);
Check check_ge(const std::string& name, double value, double bound);
Check check_lt(const std::string& name, double value, double bound);
Check check_gt(const std::string& name, double value, double bound);
Check check_in(const std::string& name, double value, double lo, double hi);

struct Report {
  std::string experiment;
  std::map<std::string, std::string> inputs;
  nlohmann::json measured = nlohmann::json::object();
  std::vector<Check> checks;
  double wall_clock = 0.0;

  bool pass() const;
  nlohmann::json to_json() const;
};

/// Runs the experiment named in the scenario.
Report run_experiment(const Scenario& s);

std::vector<std::string> experiment_names();

Report experiment_evolve(const Scenario& s);
Report experiment_mass_conservation(const Scenario& s);
Report experiment_stationarity(const Scenario& s);
Report experiment_dg_contraction(const Scenario& s);
Report experiment_duality(const Scenario& s);
Report experiment_hypocoercivity(const Scenario& s);
Report experiment_relaxation(const Scenario& s);
Report experiment_ultracontractivity(const Scenario& s);
Report experiment_reference_compare(const Scenario& s);
Report experiment_splitting_decay(const Scenario& s);
Report experiment_boundary_penalization(const Scenario& s);

/// CSV with columns t, mass, min and one column per probe; %.17g numbers.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};
CsvTable read_csv(std::istream& is);

/// Runs fn(i) for i in [0, n) on worker_count() threads; results are written
/// by index so the outcome does not depend on scheduling.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace kfp::cli
