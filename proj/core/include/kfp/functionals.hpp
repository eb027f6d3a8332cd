#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "kfp/discretization.hpp"
#include "kfp/evolution.hpp"
#include "kfp/weights.hpp"

namespace kfp {

/// ||f||_{L^p_omega} with omega evaluated at the velocity nodes.
double weighted_lp_norm(const PhaseGrid& grid, const Field& f, const WeightSpec& w, double p);
/// Same with an explicit weight: one value per velocity node, or one per entry.
double weighted_lp_norm(const PhaseGrid& grid, const Field& f, const Eigen::VectorXd& weight, double p);

/// Darrozes-Guiraud functional ||f||_{L^p(M^{-1+1/p})}.
double dg_norm(const PhaseGrid& grid, const Field& f, double p);

struct Moments {
  Eigen::VectorXd rho;  // per cell
  Eigen::MatrixXd j;    // nx x 2 (second column zero in 1-D)
};

Moments moments(const PhaseGrid& grid, const Field& f);

/// max over boundary faces of |sum_v (n.v) f w_v| / sum_v |n.v| f w_v.
double zero_flux_residual(const PhaseGrid& grid, const Field& f);

struct BoundaryDGReport {
  std::vector<double> outgoing;  // per face: int (n.v)_+ |f|^p M_h^{1-p} w_v
  std::vector<double> incoming;  // per face: int (n.v)_- |gamma_- f|^p M_h^{1-p} w_v
  double max_violation = 0.0;    // max over faces of (incoming - outgoing) / outgoing
};

/// Boundary Darrozes-Guiraud inequality for the closure applied to f.
BoundaryDGReport dg_boundary_check(const PhaseGrid& grid, const Field& f, double p);

/// Time cutoff phi(t) = chi(|t - T/2| / (T/4)) with chi = 1 on [0,1],
/// 0 on [2,inf) and a quintic smoothstep in between.
struct TimeCutoff {
  double T;
  double value(double t) const;
  double derivative(double t) const;
};

struct PenalizationReport {
  double left = 0.0;
  double right = 0.0;
  double ratio = 0.0;  // left / right, 0 when both vanish
  double beta = 0.0;
};

/// Boundary-penalized estimate on the snapshots of a trajectory:
///   left  = int int f^q delta^{-beta} m^q <v>^{-2} phi^q
///   right = int int f^q m^q (|d_t phi^q| + <varpi_-> phi^q)
/// with m = <v>^{-(d+2)(1-q)}, varpi = varpi_{m^{-1},q}. beta <= 0 selects 1/(2(d+1)).
PenalizationReport boundary_penalization(const PhaseGrid& grid, const Trajectory& traj, double q, double beta = 0.0);

struct InterpolationReport {
  double left = 0.0;
  double right = 0.0;
  double ratio = 0.0;  // right / left, 0 when the left side vanishes
  double left_error = 0.0;  // Monte-Carlo standard errors
  double right_error = 0.0;
};

/// Monte-Carlo evaluation of both sides of the boundary interpolation
/// inequality in the unit ball of R^3 for g = psi(delta) exp(-a|v|^2):
///   left  = int g^2 delta^{-beta}
///   right = int <v>^2 g^2 (n.v/|v|)^2 delta^{-1/2} + |grad_v(g <v>)|^2
InterpolationReport interpolation_inequality_test(const std::function<double(double)>& psi, double a, long samples,
                                                  unsigned long long seed);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log residuals
  int points = 0;
};

/// Least-squares slope of log(values) against t on [t1, t2].
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& values, double t1, double t2);
/// Least-squares slope of log(values) against log(t) on [t1, t2].
RateFit fit_power(const std::vector<double>& t, const std::vector<double>& values, double t1, double t2);

}  // namespace kfp
