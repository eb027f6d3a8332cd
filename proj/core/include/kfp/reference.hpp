#pragma once

#include <Eigen/Core>
#include <vector>

#include "kfp/discretization.hpp"

namespace kfp {

/// Gaussian in phase space; coordinates ordered (x_1..x_d, v_1..v_d).
struct GaussianState {
  int dim = 1;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  static GaussianState isotropic(int d, const Vec2& x0, const Vec2& v0, double sx2, double sv2);
  /// Degenerate state at (x0, v0); only valid as input to mehler_propagate.
  static GaussianState point_mass(int d, const Vec2& x0, const Vec2& v0);
};

/// Exact whole-space evolution of dX = V dt, dV = -V dt + sqrt(2) dW.
GaussianState mehler_propagate(const GaussianState& state, double t);

/// Covariance blocks of the point-mass solution per coordinate: (xx, xv, vv).
struct PointMassCovariance {
  double xx;
  double xv;
  double vv;
};
PointMassCovariance point_mass_covariance(double t);

/// Density value; throws on a singular covariance.
double mehler_density(const GaussianState& state, const Vec2& x, const Vec2& v);
/// sup over phase space of the density.
double mehler_sup(const GaussianState& state);

struct KernelParams {
  double C1 = 1.0;
  double C2 = 1.0;
  double tau = 1.0;
};

/// (C1 / tau^{2d}) exp(-3 C2 |x - tau v / 2|^2 / tau^3 - C2 |v|^2 / (4 tau))
double kernel_envelope(const KernelParams& p, int d, const Vec2& x, const Vec2& v);

struct EnvelopeFit {
  double C1;
  double C2;
  double max_ratio;  // max density / envelope on the fitting points
};

/// Fits (C1, C2) so the envelope dominates the point-mass density at the
/// origin on a sample grid for each time: C2 fixed below the free-space value,
/// C1 a safety factor above the largest observed ratio.
EnvelopeFit fit_kernel_envelope(int d, const std::vector<double>& times, int points_per_axis, unsigned long long seed);

struct InteriorReport {
  double l1_error = 0.0;
  double containment_mass = 0.0;  // upper bound on reference mass outside the domain
  double reference_mass = 0.0;    // reference mass seen by the grid quadrature
};

/// L1 distance between a grid solution and the Gaussian at the nodes.
/// Throws when the Gaussian mass outside the domain may exceed 1e-6.
InteriorReport interior_compare(const PhaseGrid& grid, const Field& f, const GaussianState& reference);

/// Upper bound on the x-marginal mass of the Gaussian outside the domain.
double containment_mass(const Domain& domain, const GaussianState& state);

/// Node values of the Gaussian density on the grid.
Field sample_gaussian(const PhaseGrid& grid, const GaussianState& state);

}  // namespace kfp
