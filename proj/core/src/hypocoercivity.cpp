#include "kfp/hypocoercivity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "kfp/errors.hpp"

namespace kfp {

struct PoissonSolver::Factor {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

namespace {

double face_distance(const PhaseGrid& grid, const InteriorFace& f) {
  return (grid.centers()[f.b] - grid.centers()[f.a]).norm();
}

Vec2 row2(const Eigen::MatrixXd& m, int i) {
  if (m.size() == 0) return Vec2::Zero();
  return Vec2(m(i, 0), m.cols() > 1 ? m(i, 1) : 0.0);
}

// Returns H A H restricted to the complement of c, H the Householder
// reflector that maps c onto a multiple of e_0.
Eigen::MatrixXd deflate(const Eigen::MatrixXd& A, const Eigen::VectorXd& c) {
  Eigen::VectorXd u = c;
  const double nc = c.norm();
  u[0] += (c[0] >= 0.0 ? nc : -nc);
  const double beta = 2.0 / u.squaredNorm();
  const Eigen::RowVectorXd uA = u.transpose() * A;
  const Eigen::VectorXd Au = A * u;
  const double uAu = u.dot(Au);
  Eigen::MatrixXd out = A;
  out.noalias() -= beta * u * uA;
  out.noalias() -= beta * Au * u.transpose();
  out.noalias() += (beta * beta * uAu) * u * u.transpose();
  const Eigen::Index n = A.rows() - 1;
  return out.bottomRightCorner(n, n);
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::VectorXd rho_of(const PhaseGrid& grid, const Field& f) {
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(grid.nx());
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iv = 0; iv < grid.nv(); ++iv) rho[ix] += f[grid.index(ix, iv)] * grid.wv(iv);
  return rho;
}

Eigen::MatrixXd j_of(const PhaseGrid& grid, const Field& f) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(grid.nx(), 2);
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iv = 0; iv < grid.nv(); ++iv) {
      const double fw = f[grid.index(ix, iv)] * grid.wv(iv);
      j(ix, 0) += fw * grid.v(iv)[0];
      j(ix, 1) += fw * grid.v(iv)[1];
    }
  return j;
}

Eigen::VectorXd remove_mean(const PhaseGrid& grid, Eigen::VectorXd rho) {
  double s = 0.0;
  for (int i = 0; i < grid.nx(); ++i) s += rho[i] * grid.volumes()[i];
  rho.array() -= s / grid.measure();
  return rho;
}

// sum over cells of vol * a . b
double x_inner(const PhaseGrid& grid, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double s = 0.0;
  for (int i = 0; i < grid.nx(); ++i) s += grid.volumes()[i] * (a(i, 0) * b(i, 0) + a(i, 1) * b(i, 1));
  return s;
}

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

}  // namespace

PoissonSolver::PoissonSolver(std::shared_ptr<const PhaseGrid> grid) : grid_(std::move(grid)) {
  require(grid_ != nullptr, "PoissonSolver: null grid");
  const auto& g = *grid_;
  const int n = g.nx();
  std::vector<Triplet> t;
  for (const auto& f : g.interior_faces()) {
    const double T = f.length / face_distance(g, f);
    t.emplace_back(f.a, f.a, T);
    t.emplace_back(f.b, f.b, T);
    t.emplace_back(f.a, f.b, -T);
    t.emplace_back(f.b, f.a, -T);
  }
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, n, g.volumes()[i]);
    t.emplace_back(n, i, g.volumes()[i]);
  }
  Eigen::SparseMatrix<double> K(n + 1, n + 1);
  K.setFromTriplets(t.begin(), t.end());
  factor_ = std::make_shared<Factor>();
  factor_->lu.compute(K);
  if (factor_->lu.info() != Eigen::Success) throw NumericalAbort("PoissonSolver: factorisation failed");
}

PoissonSolution PoissonSolver::solve(const Eigen::VectorXd& eta1, const Eigen::MatrixXd& eta2_in) const {
  const auto& g = *grid_;
  const int n = g.nx();
  require(eta1.size() == n, "poisson: eta1 size mismatch");
  Eigen::MatrixXd eta2 = eta2_in.size() == 0 ? Eigen::MatrixXd::Zero(n, 2) : eta2_in;
  if (eta2.cols() == 1) eta2.conservativeResize(n, 2), eta2.col(1).setZero();
  require(eta2.rows() == n && eta2.cols() == 2, "poisson: eta2 must be nx x 2");
  double total = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    total += eta1[i] * g.volumes()[i];
    scale += std::abs(eta1[i]) * g.volumes()[i];
  }
  require(std::abs(total) <= 1e-8 * std::max(1.0, scale),
          "poisson: compatibility violated, int eta1 = " + std::to_string(total));

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  for (int i = 0; i < n; ++i) rhs[i] = g.volumes()[i] * eta1[i];
  for (const auto& f : g.interior_faces()) {
    const double q = f.length * 0.5 * (row2(eta2, f.a) + row2(eta2, f.b)).dot(f.normal);
    rhs[f.a] += q;
    rhs[f.b] -= q;
  }
  const Eigen::VectorXd sol = factor_->lu.solve(rhs);
  if (factor_->lu.info() != Eigen::Success) throw NumericalAbort("poisson: solve failed");

  PoissonSolution out;
  out.u = sol.head(n);
  out.mean = 0.0;
  for (int i = 0; i < n; ++i) out.mean += out.u[i] * g.volumes()[i];
  out.mean /= g.measure();

  // Residual of the discrete balance (the multiplier absorbs round-off only).
  Eigen::VectorXd bal = -rhs.head(n);
  for (const auto& f : g.interior_faces()) {
    const double T = f.length / face_distance(g, f);
    bal[f.a] += T * (out.u[f.a] - out.u[f.b]);
    bal[f.b] += T * (out.u[f.b] - out.u[f.a]);
  }
  for (int i = 0; i < n; ++i) bal[i] += sol[n] * g.volumes()[i];
  out.balance_residual = bal.cwiseAbs().maxCoeff() / std::max(1.0, rhs.head(n).cwiseAbs().maxCoeff());

  out.grad = cell_gradient(out.u, eta2);
  const auto& bf = g.boundary_faces();
  out.boundary_grad.resize(static_cast<Eigen::Index>(bf.size()), 2);
  out.flux_residual = 0.0;
  for (std::size_t b = 0; b < bf.size(); ++b) {
    // Tangential part from the cell gradient, normal part from the natural condition.
    const Vec2 n_out = bf[b].normal;
    const Vec2 gc = row2(out.grad, bf[b].cell);
    const Vec2 e2 = row2(eta2, bf[b].cell);
    const Vec2 gb = gc - n_out * n_out.dot(gc) - n_out * n_out.dot(e2);
    out.boundary_grad.row(static_cast<Eigen::Index>(b)) = gb.transpose();
    out.flux_residual = std::max(out.flux_residual, std::abs(n_out.dot(gb + e2)));
  }
  return out;
}

Eigen::MatrixXd PoissonSolver::cell_gradient(const Eigen::VectorXd& u, const Eigen::MatrixXd& eta2) const {
  const auto& g = *grid_;
  const int n = g.nx();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, 2);
  if (g.domain().kind() == DomainKind::Interval) {
    const double h = g.dx();
    for (int i = 0; i < n; ++i) {
      const double left = i > 0 ? (u[i] - u[i - 1]) / h : -eta2(i, 0);
      const double right = i + 1 < n ? (u[i + 1] - u[i]) / h : -eta2(i, 0);
      grad(i, 0) = 0.5 * (left + right);
    }
    return grad;
  }
  const int na = g.spec().spatial_angles;
  const int nr = n / na;
  const double dr = g.dx();
  const double dth = 2.0 * std::acos(-1.0) / na;
  auto cell = [na](int i, int b) { return i * na + ((b % na) + na) % na; };
  for (int i = 0; i < nr; ++i) {
    const double rm = (i + 0.5) * dr;
    for (int b = 0; b < na; ++b) {
      const double th = (b + 0.5) * dth;
      const Vec2 er(std::cos(th), std::sin(th));
      const Vec2 et(-std::sin(th), std::cos(th));
      const int c = cell(i, b);
      const double inner = i > 0 ? (u[c] - u[cell(i - 1, b)]) / dr : (u[c] - u[cell(0, b + na / 2)]) / dr;
      const double outer = i + 1 < nr ? (u[cell(i + 1, b)] - u[c]) / dr : -row2(eta2, c).dot(er);
      const double gr = 0.5 * (inner + outer);
      const double gt = (u[cell(i, b + 1)] - u[cell(i, b - 1)]) / (2.0 * rm * std::sin(dth));
      const Vec2 gv = gr * er + gt * et;
      grad(c, 0) = gv[0];
      grad(c, 1) = gv[1];
    }
  }
  return grad;
}

Eigen::MatrixXd PoissonSolver::gradient_operator() const {
  const auto& g = *grid_;
  const int n = g.nx();
  Eigen::MatrixXd P(2 * n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Constant(n, -g.volumes()[i] / g.measure());
    e[i] += 1.0;
    const auto s = solve(e);
    P.col(i).head(n) = s.grad.col(0);
    P.col(i).tail(n) = s.grad.col(1);
  }
  return P;
}

double h1_norm(const PhaseGrid& grid, const Eigen::VectorXd& u, const Eigen::MatrixXd& grad) {
  double s = 0.0;
  for (int i = 0; i < grid.nx(); ++i)
    s += grid.volumes()[i] * (u[i] * u[i] + grad(i, 0) * grad(i, 0) + grad(i, 1) * grad(i, 1));
  return std::sqrt(s);
}

double l2_norm_x(const PhaseGrid& grid, const Eigen::MatrixXd& field) {
  double s = 0.0;
  for (int i = 0; i < grid.nx(); ++i) s += grid.volumes()[i] * field.row(i).squaredNorm();
  return std::sqrt(s);
}

MacroDecomposition macro_decompose(const PhaseGrid& grid, const Field& f) {
  require(f.size() == grid.size(), "macro_decompose: field size mismatch");
  const Eigen::VectorXd rho = rho_of(grid, f);
  MacroDecomposition out{Field(grid.size()), Field(grid.size())};
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iv = 0; iv < grid.nv(); ++iv) out.pi[grid.index(ix, iv)] = rho[ix] * grid.mu()[iv];
  out.perp = f - out.pi;
  return out;
}

double h_inner(const PhaseGrid& grid, const Field& f, const Field& g) {
  double s = 0.0;
  for (int ix = 0; ix < grid.nx(); ++ix) {
    double row = 0.0;
    for (int iv = 0; iv < grid.nv(); ++iv) {
      const auto k = grid.index(ix, iv);
      row += f[k] * g[k] * grid.wv(iv) / grid.mu()[iv];
    }
    s += row * grid.volumes()[ix];
  }
  return s;
}

double h_norm(const PhaseGrid& grid, const Field& f) { return std::sqrt(h_inner(grid, f, f)); }

Eigen::MatrixXd twist_matrix(std::shared_ptr<const PhaseGrid> grid) {
  const auto& g = *grid;
  const PoissonSolver solver(grid);
  const Eigen::MatrixXd P = solver.gradient_operator();  // 2nx x nx
  const int nx = g.nx();
  const Eigen::Index N = g.size();
  // (P R)^T Mx J, with R and J applied column by column.
  Eigen::MatrixXd PR(2 * nx, N), MJ = Eigen::MatrixXd::Zero(2 * nx, N);
  for (int ix = 0; ix < nx; ++ix)
    for (int iv = 0; iv < g.nv(); ++iv) {
      const auto k = g.index(ix, iv);
      PR.col(k) = P.col(ix) * g.wv(iv);
      MJ(ix, k) = g.volumes()[ix] * g.wv(iv) * g.v(iv)[0];
      MJ(nx + ix, k) = g.volumes()[ix] * g.wv(iv) * g.v(iv)[1];
    }
  return PR.transpose() * MJ;
}

TwistedProduct::TwistedProduct(std::shared_ptr<const PhaseGrid> grid, double eps)
    : grid_(std::move(grid)), eps_(eps) {
  require(eps >= 0.0 && eps < 1.0, "twisted product: eps must lie in [0,1)");
  require(grid_->size() <= kDenseEigenLimit, "twisted product: state dimension too large for the dense Gram matrix");
  twist_ = twist_matrix(grid_);
}

double TwistedProduct::operator()(const Field& f, const Field& g) const {
  return h_inner(*grid_, f, g) + eps_ * (f.dot(twist_ * g) + g.dot(twist_ * f));
}

double TwistedProduct::norm(const Field& f) const { return std::sqrt((*this)(f, f)); }

Eigen::MatrixXd TwistedProduct::h_gram() const {
  Eigen::VectorXd d(grid_->size());
  for (int ix = 0; ix < grid_->nx(); ++ix)
    for (int iv = 0; iv < grid_->nv(); ++iv)
      d[grid_->index(ix, iv)] = grid_->volumes()[ix] * grid_->wv(iv) / grid_->mu()[iv];
  return d.asDiagonal();
}

Eigen::MatrixXd TwistedProduct::gram() const { return h_gram() + eps_ * (twist_ + twist_.transpose()); }

double mass_term(const Generator& generator, const Field& f) {
  const auto& g = *generator.grid;
  const PoissonSolver solver(generator.grid);
  const auto s = solver.solve(remove_mean(g, rho_of(g, f)));
  // grad Lap^{-1} rho = -grad (-Lap)^{-1} rho
  return -x_inner(g, s.grad, j_of(g, generator.apply(f)));
}

double momentum_term(const Generator& generator, const Field& f) {
  const auto& g = *generator.grid;
  const PoissonSolver solver(generator.grid);
  const auto s = solver.solve(remove_mean(g, rho_of(g, generator.apply(f))));
  return -x_inner(g, s.grad, j_of(g, f));
}

DirichletForm dirichlet_form(const Generator& generator, const Field& f, double eps) {
  require(eps >= 0.0 && eps < 1.0, "dirichlet_form: eps must lie in [0,1)");
  const auto& g = *generator.grid;
  DirichletForm d;
  d.d1 = -h_inner(g, generator.apply(f), f);
  if (eps > 0.0) {
    d.d2 = eps * mass_term(generator, f);
    d.d3 = eps * momentum_term(generator, f);
  }
  d.total = d.d1 + d.d2 + d.d3;
  return d;
}

namespace {

// sum over faces of len * sum_{n.v>0} weight(iota) |D^perp gamma_+ f|^2 (n.v) w_v / mu_h
template <class W>
double boundary_perp(const PhaseGrid& grid, const Field& f, W&& weight) {
  double total = 0.0;
  for (int b = 0; b < static_cast<int>(grid.boundary_faces().size()); ++b) {
    const auto& face = grid.boundary_faces()[b];
    const Eigen::VectorXd mw = grid.wall_maxwellian(face);
    const auto out = outgoing_trace(grid, f, b);
    double flux = 0.0;
    for (std::size_t k = 0; k < out.velocity.size(); ++k) {
      const int j = out.velocity[k];
      flux += face.normal.dot(grid.v(j)) * grid.wv(j) * out.values[k];
    }
    double s = 0.0;
    for (std::size_t k = 0; k < out.velocity.size(); ++k) {
      const int j = out.velocity[k];
      const double perp = out.values[k] - mw[j] * flux;
      s += perp * perp * face.normal.dot(grid.v(j)) * grid.wv(j) / grid.mu()[j];
    }
    total += weight(face.iota) * s * face.length;
  }
  return total;
}

}  // namespace

double boundary_micro_term(const PhaseGrid& grid, const Field& f) {
  return 0.5 * boundary_perp(grid, f, [](double iota) { return iota * (2.0 - iota); });
}

double boundary_iota_term(const PhaseGrid& grid, const Field& f) {
  return boundary_perp(grid, f, [](double iota) { return iota * iota; });
}

std::vector<double> default_eps_scan() {
  std::vector<double> e;
  for (int k = 1; k <= 8; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

CoercivityCertificate coercivity_certificate(const Generator& generator, const std::vector<double>& eps_scan) {
  require(!generator.adjoint, "coercivity_certificate: expects a forward generator");
  const auto& g = *generator.grid;
  require(g.size() <= kDenseEigenLimit,
          "coercivity_certificate: state dimension " + std::to_string(g.size()) + " exceeds the dense limit");
  require(!eps_scan.empty(), "coercivity_certificate: empty eps scan");

  const Eigen::MatrixXd L = dense(generator.matrix);
  const TwistedProduct base(generator.grid, 0.0);
  // Congruence by K = H^{-1/2} (H is diagonal) keeps the pencils well scaled;
  // the eigenvalues do not change.
  const Eigen::VectorXd k = base.h_gram().diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd T = k.asDiagonal() * base.twist() * k.asDiagonal();
  const Eigen::MatrixXd Tsym = T + T.transpose();
  const Eigen::MatrixXd Lk = k.cwiseInverse().asDiagonal() * L * k.asDiagonal();
  const Eigen::VectorXd c = k.asDiagonal() * g.weights();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(g.size(), g.size());

  CoercivityCertificate cert;
  cert.nx = g.nx();
  cert.nv = g.nv();
  cert.vmax = g.spec().vmax;
  cert.lambda_h = -kInfinity;
  for (double eps : eps_scan) {
    require(eps > 0.0 && eps < 1.0, "coercivity_certificate: eps must lie in (0,1)");
    EpsPoint pt;
    pt.eps = eps;
    const Eigen::MatrixXd G = I + eps * Tsym;
    const Eigen::MatrixXd Gq = symmetrize(deflate(G, c));
    Eigen::LLT<Eigen::MatrixXd> llt(Gq);
    if (llt.info() != Eigen::Success) {
      cert.scan.push_back(pt);
      continue;
    }
    pt.admissible = true;
    const Eigen::MatrixXd GL = G * Lk;
    const Eigen::MatrixXd S = -0.5 * (GL + GL.transpose());
    const Eigen::MatrixXd Sq = symmetrize(deflate(S, c));

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sq, Gq, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw NumericalAbort("coercivity_certificate: eigensolver did not converge");
    pt.lambda_h = es.eigenvalues()[0];
    const Eigen::VectorXd x = es.eigenvectors().col(0);
    pt.residual = (Sq * x - pt.lambda_h * (Gq * x)).norm() / std::max(1e-300, (Gq * x).norm());

    // The deflated identity is the identity, so c1^2, c2^2 are the extreme eigenvalues of Gq.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ns(Gq, Eigen::EigenvaluesOnly);
    if (ns.info() != Eigen::Success) throw NumericalAbort("coercivity_certificate: norm equivalence solve failed");
    pt.c1 = std::sqrt(std::max(0.0, ns.eigenvalues()[0]));
    pt.c2 = std::sqrt(ns.eigenvalues()[ns.eigenvalues().size() - 1]);
    cert.scan.push_back(pt);
    if (pt.lambda_h > cert.lambda_h) {
      cert.lambda_h = pt.lambda_h;
      cert.eps = pt.eps;
      cert.c1 = pt.c1;
      cert.c2 = pt.c2;
    }
  }
  if (cert.eps == 0.0) cert.lambda_h = 0.0;
  return cert;
}

double velocity_spectral_gap(const PhaseGrid& grid) {
  // Similarity transform to the symmetric form M C M^{-1}, M = diag(sqrt(w/mu)),
  // which avoids the 1/mu scale of the weighted Gram near vmax.
  const Eigen::MatrixXd C = dense(assemble_collision_block(grid));
  const int n = grid.nv();
  Eigen::VectorXd m(n), u(n);
  for (int j = 0; j < n; ++j) {
    m[j] = std::sqrt(grid.wv(j) / grid.mu()[j]);
    u[j] = std::sqrt(grid.wv(j) * grid.mu()[j]);
  }
  u.normalize();
  const Eigen::MatrixXd S = m.asDiagonal() * C * m.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - u * u.transpose();
  // The equilibrium direction u is pushed to the top of the spectrum.
  const double shift = 10.0 * (1.0 + S.cwiseAbs().rowwise().sum().maxCoeff());
  const Eigen::MatrixXd A = symmetrize(P * (-0.5 * (S + S.transpose())) * P + shift * u * u.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalAbort("velocity_spectral_gap: eigensolver failed");
  return es.eigenvalues()[0];
}

}  // namespace kfp
