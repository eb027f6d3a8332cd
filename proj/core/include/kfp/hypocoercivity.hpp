#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <vector>

#include "kfp/discretization.hpp"

namespace kfp {

struct PoissonSolution {
  Eigen::VectorXd u;               // per cell, mean zero
  Eigen::MatrixXd grad;            // nx x 2
  Eigen::MatrixXd boundary_grad;   // per boundary face, x 2
  double mean = 0.0;               // volume average of u
  double flux_residual = 0.0;      // max |n.(grad u + eta2)| on boundary faces
  double balance_residual = 0.0;   // max cell residual of the discrete flux balance
};

/// Finite-volume Neumann solver for the variational problem
///   int grad u . grad w = int w eta1 - grad w . eta2,  <u> = 0,
/// i.e. -Lap u = eta1 + div eta2 with the natural condition n.(grad u + eta2) = 0.
/// Two-point fluxes on the spatial mesh, mean-zero constraint by bordering.
class PoissonSolver {
 public:
  explicit PoissonSolver(std::shared_ptr<const PhaseGrid> grid);

  /// eta1 per cell with zero integral; eta2 is nx x 2 (empty means zero).
  PoissonSolution solve(const Eigen::VectorXd& eta1, const Eigen::MatrixXd& eta2 = Eigen::MatrixXd()) const;

  /// Dense map rho -> grad (-Lap)^{-1}(rho - <rho>), rows [x components; y components].
  Eigen::MatrixXd gradient_operator() const;

  const PhaseGrid& grid() const { return *grid_; }

 private:
  Eigen::MatrixXd cell_gradient(const Eigen::VectorXd& u, const Eigen::MatrixXd& eta2) const;

  std::shared_ptr<const PhaseGrid> grid_;
  struct Factor;
  std::shared_ptr<Factor> factor_;
};

/// H^1 norm of a cell field given its cell gradient.
double h1_norm(const PhaseGrid& grid, const Eigen::VectorXd& u, const Eigen::MatrixXd& grad);
/// L^2 norm over the spatial mesh of a scalar (nx) or vector (nx x 2) field.
double l2_norm_x(const PhaseGrid& grid, const Eigen::MatrixXd& field);

struct MacroDecomposition {
  Field pi;    // rho_f(x) mu_h(v)
  Field perp;  // f - pi
};

MacroDecomposition macro_decompose(const PhaseGrid& grid, const Field& f);

/// (f, g)_H = sum f g / mu_h over phase-space quadrature.
double h_inner(const PhaseGrid& grid, const Field& f, const Field& g);
double h_norm(const PhaseGrid& grid, const Field& f);

/// ((f,g)) = (f,g)_H + eps (grad (-Lap)^{-1} rho_f, j_g) + eps (grad (-Lap)^{-1} rho_g, j_f)
class TwistedProduct {
 public:
  TwistedProduct(std::shared_ptr<const PhaseGrid> grid, double eps);

  double eps() const { return eps_; }
  double operator()(const Field& f, const Field& g) const;
  double norm(const Field& f) const;
  /// Dense Gram matrices of ((.,.)) and (.,.)_H.
  Eigen::MatrixXd gram() const;
  Eigen::MatrixXd h_gram() const;
  /// The twist part T with ((f,g)) = (f,g)_H + eps (f^T (T + T^T) g).
  const Eigen::MatrixXd& twist() const { return twist_; }

 private:
  std::shared_ptr<const PhaseGrid> grid_;
  double eps_;
  Eigen::MatrixXd twist_;
};

/// Dense twist matrix (P R)^T Mx J: rho = R f, j = J f, P the Poisson gradient map.
Eigen::MatrixXd twist_matrix(std::shared_ptr<const PhaseGrid> grid);

struct DirichletForm {
  double d1 = 0.0;  // (-L f, f)_H
  double d2 = 0.0;  // eps (grad Lap^{-1} rho_f, j[L f])
  double d3 = 0.0;  // eps (grad Lap^{-1} rho[L f], j_f)
  double total = 0.0;
};

DirichletForm dirichlet_form(const Generator& generator, const Field& f, double eps);

/// (grad Lap^{-1} rho_f, j[L f]) and its pieces, without the eps factor.
double mass_term(const Generator& generator, const Field& f);
double momentum_term(const Generator& generator, const Field& f);

/// 1/2 || sqrt(iota (2 - iota)) D^perp gamma_+ f ||^2 over the outgoing boundary,
/// with weight mu_h^{-1} (n.v) and D the diffusive re-emission.
double boundary_micro_term(const PhaseGrid& grid, const Field& f);
/// || iota D^perp gamma_+ f ||^2 with the same weight.
double boundary_iota_term(const PhaseGrid& grid, const Field& f);

struct EpsPoint {
  double eps = 0.0;
  bool admissible = false;  // twisted Gram positive definite on the mass-zero space
  double lambda_h = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double residual = 0.0;    // eigensolver residual
};

struct CoercivityCertificate {
  double eps = 0.0;
  double lambda_h = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  int nx = 0;
  int nv = 0;
  double vmax = 0.0;
  std::vector<EpsPoint> scan;
  bool valid() const { return lambda_h > 0.0 && eps > 0.0; }
};

/// Largest dimension handled by the dense eigensolver.
inline constexpr Eigen::Index kDenseEigenLimit = 5000;

std::vector<double> default_eps_scan();  // 2^-1 ... 2^-8

/// Smallest eigenvalue of the pencil (-sym_G(L), G) on {sum f w = 0}, for
/// every eps, and the eps that maximises it.
CoercivityCertificate coercivity_certificate(const Generator& generator,
                                             const std::vector<double>& eps_scan = default_eps_scan());

/// Spectral gap of -C_v in L^2(mu_h^{-1}) on the mass-zero velocity space.
double velocity_spectral_gap(const PhaseGrid& grid);

}  // namespace kfp
