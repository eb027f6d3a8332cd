#include "kfp/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "kfp/errors.hpp"

namespace kfp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNodeTol = 1e-9;

Vec2 polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

}  // namespace

PhaseGrid::PhaseGrid(const Domain& domain, const GridSpec& spec) : domain_(domain), spec_(spec) {
  require(spec.nx >= 4 && spec.nv >= 4, "build_grid: nx and nv must be >= 4");
  require(spec.vmax >= 4.0, "build_grid: vmax must be >= 4");
  if (domain.kind() == DomainKind::Interval) {
    build_interval();
  } else {
    require(spec.spatial_angles == spec.velocity_angles,
            "build_grid: spatial and velocity angular counts must match (got " + std::to_string(spec.spatial_angles) +
                " and " + std::to_string(spec.velocity_angles) + ")");
    require(spec.spatial_angles >= 4 && spec.spatial_angles % 2 == 0, "build_grid: angular count must be even and >= 4");
    build_disk();
  }
  const int d = dim();
  mu_.resize(nv());
  double total = 0.0;
  for (int j = 0; j < nv(); ++j) {
    mu_[j] = maxwellian(velocity_.nodes[j].norm(), d);
    total += mu_[j] * velocity_.weights[j];
  }
  mu_scale_ = 1.0 / total;
  mu_ *= mu_scale_;
  build_specular_maps();
}

void PhaseGrid::build_interval() {
  const int n = spec_.nx;
  const double L = domain_.extent();
  dx_ = L / n;
  for (int i = 0; i < n; ++i) {
    centers_.emplace_back((i + 0.5) * dx_, 0.0);
    volumes_.push_back(dx_);
  }
  for (int i = 0; i + 1 < n; ++i) interior_.push_back({i, i + 1, Vec2(1.0, 0.0), 1.0});
  for (int side = 0; side < 2; ++side) {
    const Vec2 p(side == 0 ? 0.0 : L, 0.0);
    boundary_.push_back({side == 0 ? 0 : n - 1, domain_.outward_normal(p), p, 1.0, domain_.iota_at(p), {}});
  }
  velocity_ = VelocityQuadrature::uniform_1d(spec_.vmax, spec_.nv);
}

void PhaseGrid::build_disk() {
  const int nr = spec_.nx;
  const int na = spec_.spatial_angles;
  const double R = domain_.extent();
  const double dr = R / nr;
  const double dth = 2.0 * kPi / na;
  dx_ = dr;
  auto cell = [na](int i, int b) { return i * na + ((b % na) + na) % na; };
  for (int i = 0; i < nr; ++i) {
    const double r0 = i * dr;
    const double r1 = (i + 1) * dr;
    for (int b = 0; b < na; ++b) {
      centers_.push_back(polar(0.5 * (r0 + r1), (b + 0.5) * dth));
      volumes_.push_back(0.5 * (r1 * r1 - r0 * r0) * std::sin(dth));
    }
  }
  for (int i = 0; i < nr; ++i) {
    const double r1 = (i + 1) * dr;
    for (int b = 0; b < na; ++b) {
      const double th = (b + 0.5) * dth;
      const double chord = 2.0 * r1 * std::sin(0.5 * dth);
      if (i + 1 < nr) {
        interior_.push_back({cell(i, b), cell(i + 1, b), polar(1.0, th), chord});
      } else {
        const Vec2 p = polar(R, th);
        boundary_.push_back({cell(i, b), polar(1.0, th), p, chord, domain_.iota_at(p), {}});
      }
      const double phi = (b + 1) * dth;
      interior_.push_back({cell(i, b), cell(i, b + 1), Vec2(-std::sin(phi), std::cos(phi)), dr});
    }
  }
  velocity_ = VelocityQuadrature::polar_2d(spec_.vmax, spec_.nv, spec_.velocity_angles);
}

void PhaseGrid::build_specular_maps() {
  // Nodes are looked up through a coarse lattice key; neighbouring keys are
  // probed so that rounding at a key boundary cannot miss a node.
  const double scale = 1e6;
  std::map<std::pair<long long, long long>, int> lookup;
  auto key = [scale](const Vec2& v) {
    return std::make_pair(std::llround(v[0] * scale), std::llround(v[1] * scale));
  };
  for (int j = 0; j < nv(); ++j) lookup[key(velocity_.nodes[j])] = j;
  const double tol = kNodeTol * std::max(1.0, spec_.vmax);
  for (auto& face : boundary_) {
    face.specular.assign(nv(), -1);
    for (int j = 0; j < nv(); ++j) {
      const Vec2& v = velocity_.nodes[j];
      const Vec2 w = v - 2.0 * face.normal * face.normal.dot(v);
      const auto k = key(w);
      for (long long dxk = -1; dxk <= 1 && face.specular[j] < 0; ++dxk) {
        for (long long dyk = -1; dyk <= 1 && face.specular[j] < 0; ++dyk) {
          auto it = lookup.find({k.first + dxk, k.second + dyk});
          if (it != lookup.end() && (velocity_.nodes[it->second] - w).norm() <= tol) face.specular[j] = it->second;
        }
      }
      if (face.specular[j] < 0) {
        throw PreconditionError("build_grid: specular reflection does not map velocity node " + std::to_string(j) +
                                " onto the grid");
      }
    }
  }
}

Eigen::VectorXd PhaseGrid::wall_maxwellian(const BoundaryFace& face) const {
  double J = 0.0;
  for (int j = 0; j < nv(); ++j) {
    const double un = face.normal.dot(velocity_.nodes[j]);
    if (un < 0.0) J += -un * velocity_.weights[j] * mu_[j];
  }
  return mu_ / J;
}

double PhaseGrid::measure() const {
  double s = 0.0;
  for (double w : volumes_) s += w;
  return s;
}

Eigen::VectorXd PhaseGrid::weights() const {
  Eigen::VectorXd w(size());
  for (int ix = 0; ix < nx(); ++ix)
    for (int iv = 0; iv < nv(); ++iv) w[index(ix, iv)] = volumes_[ix] * velocity_.weights[iv];
  return w;
}

double PhaseGrid::mass(const Field& f) const {
  double total = 0.0;
  for (int ix = 0; ix < nx(); ++ix) {
    double local = 0.0;
    for (int iv = 0; iv < nv(); ++iv) local += f[index(ix, iv)] * velocity_.weights[iv];
    total += local * volumes_[ix];
  }
  return total;
}

double PhaseGrid::inner(const Field& f, const Field& g) const {
  double total = 0.0;
  for (int ix = 0; ix < nx(); ++ix) {
    double local = 0.0;
    for (int iv = 0; iv < nv(); ++iv) local += f[index(ix, iv)] * g[index(ix, iv)] * velocity_.weights[iv];
    total += local * volumes_[ix];
  }
  return total;
}

Field PhaseGrid::steady_state() const {
  Field f(size());
  const double inv = 1.0 / measure();
  for (int ix = 0; ix < nx(); ++ix) f.segment(index(ix, 0), nv()) = mu_ * inv;
  return f;
}

std::shared_ptr<const PhaseGrid> build_grid(const Domain& domain, const GridSpec& spec) {
  return std::make_shared<const PhaseGrid>(domain, spec);
}

SparseMatrix assemble_collision_block(const PhaseGrid& grid) {
  const int n = grid.nv();
  const int d = grid.dim();
  const double c = grid.mu_scale();
  const auto& mu = grid.mu();
  std::vector<Triplet> t;
  // Two-point flux kappa * [(f/mu)_q - (f/mu)_p] between cells p and q.
  auto add_face = [&](int p, int q, double kappa) {
    const double wp = grid.wv(p);
    const double wq = grid.wv(q);
    t.emplace_back(p, q, kappa / (wp * mu[q]));
    t.emplace_back(p, p, -kappa / (wp * mu[p]));
    t.emplace_back(q, p, kappa / (wq * mu[p]));
    t.emplace_back(q, q, -kappa / (wq * mu[q]));
  };
  const double vmax = grid.spec().vmax;
  if (d == 1) {
    const double h = 2.0 * vmax / n;
    for (int j = 0; j + 1 < n; ++j) {
      const double vf = -vmax + (j + 1) * h;
      add_face(j, j + 1, c * maxwellian(std::abs(vf), 1) / h);
    }
  } else {
    const int ns = grid.spec().nv;
    const int na = grid.spec().velocity_angles;
    const double ds = vmax / ns;
    const double dphi = 2.0 * kPi / na;
    auto id = [na](int a, int k) { return a * na + ((k % na) + na) % na; };
    for (int a = 0; a < ns; ++a) {
      const double s = (a + 0.5) * ds;
      for (int k = 0; k < na; ++k) {
        if (a + 1 < ns) {
          const double sf = (a + 1) * ds;
          add_face(id(a, k), id(a + 1, k), c * maxwellian(sf, 2) * sf * dphi / ds);
        }
        add_face(id(a, k), id(a, k + 1), c * maxwellian(s, 2) * ds / (s * dphi));
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

namespace {

SparseMatrix kron_identity(int nx, const SparseMatrix& block) {
  const int nv = static_cast<int>(block.rows());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nx) * block.nonZeros());
  for (int ix = 0; ix < nx; ++ix)
    for (int r = 0; r < block.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(block, r); it; ++it)
        t.emplace_back(ix * nv + it.row(), ix * nv + it.col(), it.value());
  SparseMatrix m(static_cast<Eigen::Index>(nx) * nv, static_cast<Eigen::Index>(nx) * nv);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix weighted_transpose(const SparseMatrix& m, const Eigen::VectorXd& w) {
  // W^{-1} m^T W
  std::vector<Triplet> t;
  t.reserve(m.nonZeros());
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      t.emplace_back(it.col(), it.row(), it.value() * w[it.row()] / w[it.col()]);
  SparseMatrix out(m.cols(), m.rows());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrix diagonal(const Eigen::VectorXd& d) {
  SparseMatrix m(d.size(), d.size());
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.emplace_back(i, i, d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SparseMatrix assemble_collision(const PhaseGrid& grid) { return kron_identity(grid.nx(), assemble_collision_block(grid)); }

TransportParts assemble_transport_with_reflection(const PhaseGrid& grid) {
  const int nv = grid.nv();
  const auto& vol = grid.volumes();
  std::vector<Triplet> tf, ts, td;
  for (const auto& f : grid.interior_faces()) {
    for (int j = 0; j < nv; ++j) {
      const double un = f.normal.dot(grid.v(j)) * f.length;
      if (un > 0.0) {
        tf.emplace_back(grid.index(f.a, j), grid.index(f.a, j), -un / vol[f.a]);
        tf.emplace_back(grid.index(f.b, j), grid.index(f.a, j), un / vol[f.b]);
      } else if (un < 0.0) {
        tf.emplace_back(grid.index(f.b, j), grid.index(f.b, j), un / vol[f.b]);
        tf.emplace_back(grid.index(f.a, j), grid.index(f.b, j), -un / vol[f.a]);
      }
    }
  }
  for (const auto& f : grid.boundary_faces()) {
    const Eigen::VectorXd mw = grid.wall_maxwellian(f);
    const double scale = f.length / vol[f.cell];
    for (int j = 0; j < nv; ++j) {
      const double un = f.normal.dot(grid.v(j));
      const auto row = grid.index(f.cell, j);
      if (un > 0.0) {
        tf.emplace_back(row, row, -un * scale);
      } else if (un < 0.0) {
        if (f.iota < 1.0) ts.emplace_back(row, grid.index(f.cell, f.specular[j]), (1.0 - f.iota) * -un * scale);
        if (f.iota > 0.0) {
          for (int k = 0; k < nv; ++k) {
            const double wn = f.normal.dot(grid.v(k));
            if (wn > 0.0) td.emplace_back(row, grid.index(f.cell, k), f.iota * -un * scale * mw[j] * wn * grid.wv(k));
          }
        }
      }
    }
  }
  const auto n = grid.size();
  TransportParts parts{SparseMatrix(n, n), SparseMatrix(n, n), SparseMatrix(n, n)};
  parts.free.setFromTriplets(tf.begin(), tf.end());
  parts.specular.setFromTriplets(ts.begin(), ts.end());
  parts.diffusive.setFromTriplets(td.begin(), td.end());
  return parts;
}

SparseMatrix Generator::velocity_block() const {
  if (absorption_v.size() == 0 || absorption_v.isZero(0.0)) return collision_v;
  return collision_v - diagonal(absorption_v);
}

Generator assemble_generator(std::shared_ptr<const PhaseGrid> grid) {
  require(grid != nullptr, "assemble_generator: grid is null");
  Generator g;
  g.grid = grid;
  g.collision_v = assemble_collision_block(*grid);
  g.absorption_v = Eigen::VectorXd::Zero(grid->nv());
  TransportParts t = assemble_transport_with_reflection(*grid);
  g.specular = t.specular;
  g.diffusive = t.diffusive;
  g.transport = t.total();
  g.matrix = kron_identity(grid->nx(), g.collision_v) + g.transport;
  return g;
}

Generator assemble_dual(const Generator& generator) {
  const auto& grid = *generator.grid;
  const Eigen::VectorXd w = grid.weights();
  Eigen::VectorXd wv(grid.nv());
  for (int j = 0; j < grid.nv(); ++j) wv[j] = grid.wv(j);
  Generator d;
  d.grid = generator.grid;
  d.collision_v = weighted_transpose(generator.collision_v, wv);
  d.absorption_v = generator.absorption_v;
  d.transport = weighted_transpose(generator.transport, w);
  d.specular = weighted_transpose(generator.specular, w);
  d.diffusive = weighted_transpose(generator.diffusive, w);
  d.matrix = weighted_transpose(generator.matrix, w);
  d.adjoint = !generator.adjoint;
  return d;
}

Split split_generator(const Generator& generator, double M, double R) {
  require(M >= 0.0, "split_generator: M must be >= 0");
  require(R > 0.0, "split_generator: R must be > 0");
  const auto& grid = *generator.grid;
  Eigen::VectorXd av(grid.nv());
  for (int j = 0; j < grid.nv(); ++j) av[j] = M * cutoff(grid.v(j).norm() / R);
  Eigen::VectorXd A(grid.size());
  for (int ix = 0; ix < grid.nx(); ++ix) A.segment(grid.index(ix, 0), grid.nv()) = av;
  Split s{A, generator, M, R};
  s.B.absorption_v = generator.absorption_v + av;
  s.B.matrix = generator.matrix - diagonal(A);
  return s;
}

SplitChoice choose_split(const WeightSpec& w, const PhaseGrid& grid) {
  const int d = grid.dim();
  const double limsup = varpi_limsup(w, d);
  require(limsup < -1.0, "choose_split: weight needs limsup varpi < -1 (got " + std::to_string(limsup) + ")");
  SplitChoice c{};
  c.kappa_star = std::max(limsup, -4.0);
  c.kappa = c.kappa_star / 4.0;
  c.bound = 0.5 * (c.kappa_star + c.kappa);
  auto vmaxp = [&](double r) { return std::max(varpi(w, 1.0, r, d), varpi(w, kInfinity, r, d)); };
  // Radii probed: every grid speed plus a radial sweep beyond the grid.
  std::vector<double> radii;
  for (int j = 0; j < grid.nv(); ++j) radii.push_back(grid.v(j).norm());
  const double rfar = std::max(50.0, 10.0 * grid.spec().vmax);
  for (int i = 0; i <= 10000; ++i) radii.push_back(rfar * i / 10000.0);
  auto ok_beyond = [&](double R) {
    for (double r : radii)
      if (r >= R && vmaxp(r) > c.bound) return false;
    return true;
  };
  c.R = 0.0;
  for (int k = 1; k <= 2 * static_cast<int>(rfar); ++k) {
    if (ok_beyond(0.5 * k)) {
      c.R = 0.5 * k;
      break;
    }
  }
  require(c.R > 0.0, "choose_split: no radius found");
  double worst = -kInfinity;
  for (double r : radii)
    if (r < c.R) worst = std::max(worst, vmaxp(r));
  c.M = std::max(0.0, worst - c.bound) + 1.0;
  return c;
}

TraceField outgoing_trace(const PhaseGrid& grid, const Field& f, int face) {
  const auto& bf = grid.boundary_faces().at(face);
  TraceField t{face, +1, {}, {}};
  for (int j = 0; j < grid.nv(); ++j) {
    if (bf.normal.dot(grid.v(j)) > 0.0) {
      t.velocity.push_back(j);
      t.values.push_back(f[grid.index(bf.cell, j)]);
    }
  }
  return t;
}

TraceField incoming_trace(const PhaseGrid& grid, const Field& f, int face) {
  const auto& bf = grid.boundary_faces().at(face);
  const Eigen::VectorXd mw = grid.wall_maxwellian(bf);
  double outflux = 0.0;
  for (int j = 0; j < grid.nv(); ++j) {
    const double un = bf.normal.dot(grid.v(j));
    if (un > 0.0) outflux += un * grid.wv(j) * f[grid.index(bf.cell, j)];
  }
  TraceField t{face, -1, {}, {}};
  for (int j = 0; j < grid.nv(); ++j) {
    if (bf.normal.dot(grid.v(j)) < 0.0) {
      t.velocity.push_back(j);
      t.values.push_back((1.0 - bf.iota) * f[grid.index(bf.cell, bf.specular[j])] + bf.iota * mw[j] * outflux);
    }
  }
  return t;
}

double transport_cfl(const PhaseGrid& grid, const SparseMatrix& transport) {
  double worst = 0.0;
  for (int r = 0; r < transport.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(transport, r); it; ++it)
      if (it.row() == it.col()) worst = std::max(worst, -it.value());
  if (worst == 0.0) return kInfinity;
  double vnode = 0.0;
  for (int j = 0; j < grid.nv(); ++j) vnode = std::max(vnode, grid.v(j).norm());
  return vnode / grid.spec().vmax / worst;
}

void write_coo(std::ostream& os, const SparseMatrix& m) {
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  os.precision(17);
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace kfp
