#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <iosfwd>
#include <memory>
#include <vector>

#include "kfp/geometry.hpp"
#include "kfp/weights.hpp"

namespace kfp {

/// Discrete distribution f(x,v); entry (ix, iv) sits at ix * nv + iv.
using Field = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct GridSpec {
  int nx = 64;         // interval cells, or radial rings of the disk
  int nv = 64;         // velocity cells (1-D), or speed cells (2-D)
  double vmax = 6.0;
  int spatial_angles = 16;   // disk only
  int velocity_angles = 16;  // disk only; must equal spatial_angles
};

struct InteriorFace {
  int a;
  int b;
  Vec2 normal;  // unit, from a to b
  double length;
};

struct BoundaryFace {
  int cell;
  Vec2 normal;  // unit, outward
  Vec2 position;
  double length;
  double iota;
  std::vector<int> specular;  // velocity index -> index of v - 2n(n.v)
};

/// Phase-space mesh: finite-volume cells in x times a velocity quadrature.
/// Immutable after construction.
class PhaseGrid {
 public:
  PhaseGrid(const Domain& domain, const GridSpec& spec);

  const Domain& domain() const { return domain_; }
  const GridSpec& spec() const { return spec_; }
  int dim() const { return domain_.dim(); }
  int nx() const { return static_cast<int>(centers_.size()); }
  int nv() const { return static_cast<int>(velocity_.nodes.size()); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(nx()) * nv(); }
  Eigen::Index index(int ix, int iv) const { return static_cast<Eigen::Index>(ix) * nv() + iv; }

  const std::vector<Vec2>& centers() const { return centers_; }
  const std::vector<double>& volumes() const { return volumes_; }
  const VelocityQuadrature& velocity() const { return velocity_; }
  const Vec2& v(int iv) const { return velocity_.nodes[iv]; }
  double wv(int iv) const { return velocity_.weights[iv]; }
  const std::vector<InteriorFace>& interior_faces() const { return interior_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }

  /// Discrete Maxwellian, renormalised so that sum w_v mu_h = 1; the same
  /// factor is applied to the face values used by the collision operator.
  const Eigen::VectorXd& mu() const { return mu_; }
  double mu_scale() const { return mu_scale_; }
  /// Wall Maxwellian for a boundary face: mu_h / J with J the discrete
  /// incoming half-flux of mu_h, so that its half-flux is exactly 1.
  Eigen::VectorXd wall_maxwellian(const BoundaryFace& face) const;

  /// Spatial mesh size (interval cell width, disk radial step).
  double dx() const { return dx_; }
  double measure() const;  // sum of cell volumes
  /// Quadrature weight w_x w_v of every phase-space entry.
  Eigen::VectorXd weights() const;
  /// Integral of f over phase space.
  double mass(const Field& f) const;
  /// sum f g w_x w_v
  double inner(const Field& f, const Field& g) const;

  /// Discrete steady state mu_h / |Omega|_h.
  Field steady_state() const;
  /// Field with values F(x_i, v_j).
  template <class F>
  Field sample(F&& fn) const {
    Field f(size());
    for (int ix = 0; ix < nx(); ++ix)
      for (int iv = 0; iv < nv(); ++iv) f[index(ix, iv)] = fn(centers_[ix], velocity_.nodes[iv]);
    return f;
  }

 private:
  void build_interval();
  void build_disk();
  void build_specular_maps();

  Domain domain_;
  GridSpec spec_;
  std::vector<Vec2> centers_;
  std::vector<double> volumes_;
  std::vector<InteriorFace> interior_;
  std::vector<BoundaryFace> boundary_;
  VelocityQuadrature velocity_;
  Eigen::VectorXd mu_;
  double mu_scale_ = 1.0;
  double dx_ = 0.0;
};

std::shared_ptr<const PhaseGrid> build_grid(const Domain& domain, const GridSpec& spec);

/// Velocity block of the collision operator div_v(mu grad_v(f/mu)), shared by
/// every spatial cell.
SparseMatrix assemble_collision_block(const PhaseGrid& grid);
/// Full collision operator I_x (x) C_v.
SparseMatrix assemble_collision(const PhaseGrid& grid);

struct TransportParts {
  SparseMatrix free;        // upwind streaming incl. outflow through the wall
  SparseMatrix specular;    // (1 - iota) inflow from the mirrored velocity
  SparseMatrix diffusive;   // iota inflow re-emitted with the wall Maxwellian
  SparseMatrix total() const { return free + specular + diffusive; }
};

/// -v.grad_x with Maxwell reflection folded into the wall fluxes.
TransportParts assemble_transport_with_reflection(const PhaseGrid& grid);

/// Assembled generator and its structural parts.
struct Generator {
  std::shared_ptr<const PhaseGrid> grid;
  SparseMatrix collision_v;        // velocity block of the collision part
  Eigen::VectorXd absorption_v;    // per-velocity diagonal removed from the block (split)
  SparseMatrix transport;          // streaming + reflection
  SparseMatrix specular;
  SparseMatrix diffusive;
  SparseMatrix matrix;             // complete operator
  bool adjoint = false;

  /// collision_v - diag(absorption_v)
  SparseMatrix velocity_block() const;
  Field apply(const Field& f) const { return matrix * f; }
  Eigen::Index size() const { return matrix.rows(); }
};

Generator assemble_generator(std::shared_ptr<const PhaseGrid> grid);

/// Adjoint with respect to sum f g w_x w_v: L* = W^{-1} L^T W.
Generator assemble_dual(const Generator& generator);

struct Split {
  Eigen::VectorXd A;  // diagonal of A over all entries
  Generator B;        // L - A
  double M;
  double R;
};

/// A f = M chi_R(|v|) f, B = L - A.
Split split_generator(const Generator& generator, double M, double R);

struct SplitChoice {
  double M;
  double R;
  double kappa_star;
  double kappa;   // target rate of the split
  double bound;   // (kappa_star + kappa) / 2
};

/// (M, R) for a weight with limsup varpi < -1: R the smallest multiple of 1/2 for
/// which max_p varpi <= bound on grid velocities with |v| >= R, M large enough
/// to push varpi - M chi_R below the bound everywhere on the grid.
SplitChoice choose_split(const WeightSpec& w, const PhaseGrid& grid);

struct TraceField {
  int face;
  int sign;  // +1 outgoing, -1 incoming
  std::vector<int> velocity;
  std::vector<double> values;
};

TraceField outgoing_trace(const PhaseGrid& grid, const Field& f, int face);
/// Incoming trace produced by the reflection closure from the outgoing one.
TraceField incoming_trace(const PhaseGrid& grid, const Field& f, int face);

/// Largest time step for forward-Euler transport: dx / vmax in 1-D.
double transport_cfl(const PhaseGrid& grid, const SparseMatrix& transport);

/// Coordinate-format text: "rows cols nnz" header then "i j value" lines.
void write_coo(std::ostream& os, const SparseMatrix& m);

}  // namespace kfp
