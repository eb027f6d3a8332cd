// Runs the ten acceptance scenarios from configs/ and prints one line per
// criterion. Exit status is the number of failing criteria.

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "kfp_cli/config.hpp"
#include "kfp_cli/experiments.hpp"
#include "kfp_cli/scenario.hpp"

using namespace kfp::cli;

namespace {

struct Criterion {
  int id;
  const char* config;
  double time_limit;  // seconds, 0 for none
};

std::string summary(const Report& r) {
  std::string out;
  char buf[256];
  for (const auto& c : r.checks) {
    if (c.relation == "in")
      std::snprintf(buf, sizeof buf, "%s%s = %.4g in [%g, %g]%s", out.empty() ? "" : "; ", c.name.c_str(), c.value,
                    c.bound, c.bound_hi, c.pass ? "" : " (violated)");
    else
      std::snprintf(buf, sizeof buf, "%s%s = %.4g %s %g%s", out.empty() ? "" : "; ", c.name.c_str(), c.value,
                    c.relation.c_str(), c.bound, c.pass ? "" : " (violated)");
    out += buf;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : KFP_CONFIG_DIR;
  const std::vector<Criterion> criteria = {
      {1, "mass-conservation", 30.0}, {2, "stationarity", 0.0},      {3, "dg-contraction", 0.0},
      {4, "duality", 0.0},            {5, "hypocoercivity", 300.0},  {6, "relaxation", 0.0},
      {7, "ultracontractivity", 0.0}, {8, "reference-compare", 0.0}, {9, "splitting-decay", 0.0},
      {10, "boundary-penalization", 0.0}};
  int failures = 0;
  for (const auto& c : criteria) {
    bool pass = false;
    std::string detail;
    try {
      const Scenario s = scenario_from_config(Config::load(dir + "/" + c.config + ".cfg"));
      Report r = run_experiment(s);
      if (c.time_limit > 0.0) r.checks.push_back(check_le("runtime [s]", r.wall_clock, c.time_limit));
      pass = r.pass();
      detail = summary(r);
    } catch (const std::exception& e) {
      detail = std::string("error: ") + e.what();
    }
    std::printf("C%-2d %-22s %s  %s\n", c.id, c.config, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
