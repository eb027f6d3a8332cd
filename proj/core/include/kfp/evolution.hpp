#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kfp/discretization.hpp"

namespace kfp {

enum class Scheme { Imex, FullImplicit, DenseExponential };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct StepperSpec {
  Scheme scheme = Scheme::Imex;
  double dt = 0.0;  // 0 selects the transport CFL limit
};

/// One-step propagator for a generator. For an adjoint generator the IMEX
/// step is applied in reverse order, so that it is the exact discrete adjoint
/// of the forward step.
class Stepper {
 public:
  /// `dt` is used as given; it must satisfy the CFL bound for IMEX.
  Stepper(const Generator& generator, Scheme scheme, double dt);

  double dt() const { return dt_; }
  Scheme scheme() const { return scheme_; }
  double cfl_limit() const { return cfl_; }
  void step(Field& f) const;

 private:
  void solve_velocity(Field& f) const;

  const Generator* gen_;
  Scheme scheme_;
  double dt_;
  double cfl_;
  // IMEX: velocity block I - dt C_v, Thomas coefficients when tridiagonal.
  bool tridiagonal_ = false;
  Eigen::VectorXd lower_, diag_, upper_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> block_lu_;
  SparseMatrix explicit_;  // I + dt T
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> full_lu_;
  Eigen::MatrixXd dense_;
};

struct Probe {
  std::string name;
  std::function<double(const Field&)> fn;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> min;
  std::vector<std::string> probe_names;
  std::vector<std::vector<double>> probes;  // probes[k][step]
  std::vector<double> snapshot_times;
  std::vector<Field> snapshots;
  Field final_state;
  double dt = 0.0;
  long steps = 0;
};

/// Number of steps N = ceil(T / dt_req) and the adjusted step T / N.
std::pair<long, double> step_count(double T, double dt_req);

/// Time step for a spec: the CFL limit when spec.dt == 0.
double resolve_dt(const Generator& generator, const StepperSpec& spec);

/// Forward evolution f(t) = S_L(t) f0. Scalar probes are recorded every step,
/// snapshots every max(1, floor(N/200)) steps (or `snapshot_every` if > 0).
Trajectory evolve(const Generator& generator, const Field& f0, double T, const StepperSpec& stepper,
                  const std::vector<Probe>& probes = {}, long snapshot_every = 0);

/// Backward dual evolution from g(T) = gT down to t = 0 with the adjoint of
/// each forward step. Times are stored increasing; final_state is g(0).
Trajectory evolve_dual(const Generator& dual, const Field& gT, double T, const StepperSpec& stepper,
                       long snapshot_every = 0);

struct DecayFit {
  double rate;                     // mean slope
  std::vector<double> rates;       // per initial datum
};

/// Slope of log ||S_B(t) f0||_{L^p_omega} on [T/2, T], averaged over
/// `samples` random nonnegative data.
DecayFit decay_rate_of_B(const Generator& B, const WeightSpec& w, double p, double T, const StepperSpec& stepper,
                         int samples = 5, unsigned long long seed = 1);

struct DuhamelReport {
  std::vector<double> times;
  std::vector<double> discrepancy;  // relative, per time
  double max_discrepancy;
};

/// Compares S_L(t) Pi f0 with the iterated Duhamel representation of order n
/// (n = 0: the first Duhamel formula S_L = S_B + S_B A * S_L applied to f0).
/// Time convolutions use the trapezoid rule on the stepper grid; the steppers
/// are dense exponentials.
DuhamelReport duhamel_reconstruct(const Generator& generator, const Split& split, const Field& f0, double T, int n,
                                  double dt);

/// Pi g = g - <<g>> f_inf
Field project_mass_free(const PhaseGrid& grid, const Field& g);

}  // namespace kfp
