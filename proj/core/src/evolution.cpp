#include "kfp/evolution.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>

#include "kfp/errors.hpp"
#include "kfp/functionals.hpp"

namespace kfp {

namespace {

constexpr Eigen::Index kDenseLimit = 20000;

using ColMajor = Eigen::SparseMatrix<double>;

SparseMatrix identity(Eigen::Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

bool is_tridiagonal(const SparseMatrix& m) {
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      if (std::abs(it.row() - it.col()) > 1 && it.value() != 0.0) return false;
  return true;
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "imex") return Scheme::Imex;
  if (name == "full-implicit") return Scheme::FullImplicit;
  if (name == "dense-exponential") return Scheme::DenseExponential;
  throw PreconditionError("unknown time scheme '" + name + "'");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Imex: return "imex";
    case Scheme::FullImplicit: return "full-implicit";
    case Scheme::DenseExponential: return "dense-exponential";
  }
  return "?";
}

Stepper::Stepper(const Generator& generator, Scheme scheme, double dt)
    : gen_(&generator), scheme_(scheme), dt_(dt) {
  require(dt > 0.0 && std::isfinite(dt), "stepper: dt must be positive");
  const auto& grid = *generator.grid;
  cfl_ = transport_cfl(grid, generator.transport);  // the adjoint keeps the diagonal
  const auto n = generator.size();
  switch (scheme) {
    case Scheme::Imex: {
      if (dt > cfl_ * (1.0 + 1e-12)) {
        throw PreconditionError("stepper: CFL violation, dt = " + std::to_string(dt) +
                                " exceeds dx/vmax = " + std::to_string(cfl_));
      }
      const SparseMatrix block = identity(grid.nv()) - dt * generator.velocity_block();
      tridiagonal_ = is_tridiagonal(block);
      if (tridiagonal_) {
        const int m = grid.nv();
        lower_ = Eigen::VectorXd::Zero(m);
        diag_ = Eigen::VectorXd::Zero(m);
        upper_ = Eigen::VectorXd::Zero(m);
        for (int r = 0; r < block.outerSize(); ++r) {
          for (SparseMatrix::InnerIterator it(block, r); it; ++it) {
            if (it.col() == it.row()) diag_[r] = it.value();
            else if (it.col() == it.row() - 1) lower_[r] = it.value();
            else upper_[r] = it.value();
          }
        }
        // Thomas factorisation: diag_ <- pivots, upper_ <- c'
        for (int i = 0; i < m; ++i) {
          if (i > 0) diag_[i] -= lower_[i] * upper_[i - 1];
          upper_[i] /= diag_[i];
        }
      } else {
        block_lu_ = std::make_shared<Eigen::SparseLU<ColMajor>>();
        ColMajor b = block;
        block_lu_->compute(b);
        if (block_lu_->info() != Eigen::Success) throw NumericalAbort("stepper: velocity block factorisation failed");
      }
      explicit_ = identity(n) + dt * generator.transport;
      break;
    }
    case Scheme::FullImplicit: {
      full_lu_ = std::make_shared<Eigen::SparseLU<ColMajor>>();
      ColMajor a = identity(n) - dt * generator.matrix;
      full_lu_->compute(a);
      if (full_lu_->info() != Eigen::Success) throw NumericalAbort("stepper: implicit factorisation failed");
      break;
    }
    case Scheme::DenseExponential: {
      require(n <= kDenseLimit, "stepper: dense exponential limited to dimension <= 20000");
      Eigen::MatrixXd L = Eigen::MatrixXd(generator.matrix) * dt;
      dense_ = L.exp();
      break;
    }
  }
}

void Stepper::solve_velocity(Field& f) const {
  const int m = gen_->grid->nv();
  Eigen::Map<Eigen::MatrixXd> F(f.data(), m, f.size() / m);
  if (tridiagonal_) {
    for (Eigen::Index c = 0; c < F.cols(); ++c) {
      auto x = F.col(c);
      x[0] /= diag_[0];
      for (int i = 1; i < m; ++i) x[i] = (x[i] - lower_[i] * x[i - 1]) / diag_[i];
      for (int i = m - 2; i >= 0; --i) x[i] -= upper_[i] * x[i + 1];
    }
  } else {
    Eigen::MatrixXd X = block_lu_->solve(Eigen::MatrixXd(F));
    F = X;
  }
}

void Stepper::step(Field& f) const {
  switch (scheme_) {
    case Scheme::Imex:
      if (gen_->adjoint) {
        solve_velocity(f);
        f = explicit_ * f;
      } else {
        f = explicit_ * f;
        solve_velocity(f);
      }
      break;
    case Scheme::FullImplicit: f = full_lu_->solve(f); break;
    case Scheme::DenseExponential: f = dense_ * f; break;
  }
}

std::pair<long, double> step_count(double T, double dt_req) {
  require(T >= 0.0, "evolve: horizon T must be >= 0");
  require(dt_req > 0.0, "evolve: time step must be positive");
  if (T == 0.0) return {0, dt_req};
  const long n = std::max(1L, static_cast<long>(std::ceil(T / dt_req - 1e-9)));
  return {n, T / n};
}

double resolve_dt(const Generator& generator, const StepperSpec& spec) {
  if (spec.dt > 0.0) return spec.dt;
  return transport_cfl(*generator.grid, generator.transport);
}

namespace {

Trajectory run(const Generator& generator, const Field& x0, double T, const StepperSpec& spec,
               const std::vector<Probe>& probes, long snapshot_every, bool backward) {
  require(x0.size() == generator.size(), "evolve: initial field has the wrong size");
  require(x0.allFinite(), "evolve: initial field must be finite");
  const auto [n, dt] = step_count(T, resolve_dt(generator, spec));
  const Stepper stepper(generator, spec.scheme, dt);
  const auto& grid = *generator.grid;
  Trajectory tr;
  tr.dt = dt;
  tr.steps = n;
  for (const auto& p : probes) tr.probe_names.push_back(p.name);
  tr.probes.resize(probes.size());
  const long every = snapshot_every > 0 ? snapshot_every : std::max(1L, n / 200);
  Field f = x0;
  auto record = [&](long k) {
    const double t = backward ? T - k * dt : k * dt;
    tr.times.push_back(t);
    tr.mass.push_back(grid.mass(f));
    tr.min.push_back(f.minCoeff());
    for (std::size_t i = 0; i < probes.size(); ++i) tr.probes[i].push_back(probes[i].fn(f));
    if (k % every == 0 || k == n) {
      tr.snapshot_times.push_back(t);
      tr.snapshots.push_back(f);
    }
  };
  record(0);
  for (long k = 1; k <= n; ++k) {
    stepper.step(f);
    if (!f.allFinite()) throw NumericalAbort("evolve: non-finite state at step " + std::to_string(k), k);
    record(k);
  }
  tr.final_state = f;
  if (backward) {
    std::reverse(tr.times.begin(), tr.times.end());
    std::reverse(tr.mass.begin(), tr.mass.end());
    std::reverse(tr.min.begin(), tr.min.end());
    for (auto& p : tr.probes) std::reverse(p.begin(), p.end());
    std::reverse(tr.snapshot_times.begin(), tr.snapshot_times.end());
    std::reverse(tr.snapshots.begin(), tr.snapshots.end());
  }
  return tr;
}

}  // namespace

Trajectory evolve(const Generator& generator, const Field& f0, double T, const StepperSpec& stepper,
                  const std::vector<Probe>& probes, long snapshot_every) {
  require(!generator.adjoint, "evolve: expects a forward generator");
  return run(generator, f0, T, stepper, probes, snapshot_every, false);
}

Trajectory evolve_dual(const Generator& dual, const Field& gT, double T, const StepperSpec& stepper,
                       long snapshot_every) {
  require(dual.adjoint, "evolve_dual: expects a dual generator");
  return run(dual, gT, T, stepper, {}, snapshot_every, true);
}

DecayFit decay_rate_of_B(const Generator& B, const WeightSpec& w, double p, double T, const StepperSpec& stepper,
                         int samples, unsigned long long seed) {
  require(samples >= 1, "decay_rate_of_B: need at least one sample");
  const auto& grid = *B.grid;
  DecayFit out{0.0, {}};
  for (int s = 0; s < samples; ++s) {
    std::mt19937_64 rng(seed + static_cast<unsigned long long>(s));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Field f0(grid.size());
    for (auto& x : f0) x = u(rng);
    const Probe norm{"norm", [&](const Field& f) { return weighted_lp_norm(grid, f, w, p); }};
    const Trajectory tr = evolve(B, f0, T, stepper, {norm});
    const RateFit fit = fit_rate(tr.times, tr.probes[0], 0.5 * T, T);
    out.rates.push_back(fit.slope);
    out.rate += fit.slope / samples;
  }
  return out;
}

Field project_mass_free(const PhaseGrid& grid, const Field& g) { return g - grid.mass(g) * grid.steady_state(); }

namespace {

using Series = std::vector<Field>;

// c_k = int_0^{t_k} S(t_k - s) Y h(s) ds by the trapezoid rule, with S(dt) = P.
template <class Y>
Series convolve(const Eigen::MatrixXd& P, Y&& apply_y, const Series& h, double dt) {
  const std::size_t K = h.size();
  Series c(K);
  Field G = apply_y(h[0]);
  Field E = G;
  c[0] = Field::Zero(G.size());
  for (std::size_t k = 1; k < K; ++k) {
    const Field yk = apply_y(h[k]);
    G = P * G + yk;
    E = P * E;
    c[k] = dt * (G - 0.5 * E - 0.5 * yk);
  }
  return c;
}

Series orbit(const Eigen::MatrixXd& P, const Field& x0, std::size_t K) {
  Series s(K);
  s[0] = x0;
  for (std::size_t k = 1; k < K; ++k) s[k] = P * s[k - 1];
  return s;
}

Series add(const Series& a, const Series& b) {
  Series c(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = a[k] + b[k];
  return c;
}

}  // namespace

DuhamelReport duhamel_reconstruct(const Generator& generator, const Split& split, const Field& f0, double T, int n,
                                  double dt) {
  require(n >= 0 && n <= 2, "duhamel_reconstruct: order n must be 0, 1 or 2");
  require(generator.size() <= 5000, "duhamel_reconstruct: state dimension must be <= 5000");
  const auto& grid = *generator.grid;
  const auto [steps, h] = step_count(T, dt);
  const std::size_t K = static_cast<std::size_t>(steps) + 1;
  const Eigen::MatrixXd PL = (Eigen::MatrixXd(generator.matrix) * h).exp();
  const Eigen::MatrixXd PB = (Eigen::MatrixXd(split.B.matrix) * h).exp();
  const Eigen::VectorXd& a = split.A;
  auto times_a = [&](const Field& x) -> Field { return a.cwiseProduct(x); };
  auto ident = [](const Field& x) -> Field { return x; };
  auto pi = [&](const Field& x) -> Field { return project_mass_free(grid, x); };
  // U * h for U = S_B A
  auto sba = [&](const Series& s) { return convolve(PB, times_a, s, h); };

  Series lhs;
  Series rhs;
  if (n == 0) {
    lhs = orbit(PL, f0, K);
    rhs = add(orbit(PB, f0, K), sba(lhs));
  } else {
    lhs = orbit(PL, pi(f0), K);
    auto v1 = [&](const Field& x) {
      Series term = orbit(PB, x, K);
      Series total = term;
      for (int j = 1; j < n; ++j) {
        term = sba(term);
        total = add(total, term);
      }
      return total;
    };
    Series v1_pi = v1(pi(f0));
    Series pi_v1 = v1(f0);
    for (auto& x : pi_v1) x = pi(x);
    Series w1_pi_v1 = pi_v1;
    for (int j = 0; j < n; ++j) w1_pi_v1 = sba(w1_pi_v1);
    const Series v2 = add(v1_pi, w1_pi_v1);
    // W2 f0 = (A S_B)^{*n} f0
    Series w2 = orbit(PB, f0, K);
    for (auto& x : w2) x = times_a(x);
    for (int j = 1; j < n; ++j) {
      w2 = convolve(PB, ident, w2, h);
      for (auto& x : w2) x = times_a(x);
    }
    Series tail = convolve(PL, pi, w2, h);
    for (int j = 0; j < n; ++j) tail = sba(tail);
    rhs = add(v2, tail);
  }
  DuhamelReport rep{{}, {}, 0.0};
  for (int i = 1; i <= 5; ++i) {
    const std::size_t k = static_cast<std::size_t>(std::llround(i * (K - 1) / 5.0));
    const double ref = std::sqrt(grid.inner(lhs[k], lhs[k]));
    const Field diff = lhs[k] - rhs[k];
    const double err = std::sqrt(grid.inner(diff, diff)) / std::max(ref, 1e-300);
    rep.times.push_back(k * h);
    rep.discrepancy.push_back(err);
    rep.max_discrepancy = std::max(rep.max_discrepancy, err);
  }
  return rep;
}

}  // namespace kfp
