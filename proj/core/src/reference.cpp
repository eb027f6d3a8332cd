#include "kfp/reference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kfp/errors.hpp"

namespace kfp {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd phase_point(int d, const Vec2& x, const Vec2& v) {
  Eigen::VectorXd z(2 * d);
  for (int i = 0; i < d; ++i) {
    z[i] = x[i];
    z[d + i] = v[i];
  }
  return z;
}

}  // namespace

GaussianState GaussianState::isotropic(int d, const Vec2& x0, const Vec2& v0, double sx2, double sv2) {
  require(d == 1 || d == 2, "gaussian state: dimension must be 1 or 2");
  require(sx2 > 0.0 && sv2 > 0.0, "gaussian state: variances must be positive");
  GaussianState s;
  s.dim = d;
  s.mean = phase_point(d, x0, v0);
  s.cov = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) {
    s.cov(i, i) = sx2;
    s.cov(d + i, d + i) = sv2;
  }
  return s;
}

GaussianState GaussianState::point_mass(int d, const Vec2& x0, const Vec2& v0) {
  require(d == 1 || d == 2, "gaussian state: dimension must be 1 or 2");
  GaussianState s;
  s.dim = d;
  s.mean = phase_point(d, x0, v0);
  s.cov = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  return s;
}

PointMassCovariance point_mass_covariance(double t) {
  const double a = -std::expm1(-t);       // 1 - e^{-t}
  const double b = -std::expm1(-2.0 * t);  // 1 - e^{-2t}
  // t - 2(1 - e^{-t}) + (1 - e^{-2t})/2 = sum_{n>=3} (-1)^{n+1} (2^{n-1} - 2) t^n / n!,
  // summed directly for small t to avoid cancellation
  double xx;
  if (t < 0.5) {
    double term = t;  // t^n / n!
    double sum = 0.0;
    for (int n = 2; n <= 40; ++n) {
      term *= t / n;
      const double c = std::ldexp(1.0, n - 1) - 2.0;
      sum += (n % 2 == 1 ? 1.0 : -1.0) * c * term;
    }
    xx = 2.0 * sum;
  } else {
    xx = 2.0 * (t - 2.0 * a + 0.5 * b);
  }
  return {xx, a * a, b};
}

GaussianState mehler_propagate(const GaussianState& state, double t) {
  require(t >= 0.0, "mehler_propagate: t must be >= 0");
  const int d = state.dim;
  const double e = std::exp(-t);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) {
    Phi(i, i) = 1.0;
    Phi(i, d + i) = -std::expm1(-t);
    Phi(d + i, d + i) = e;
  }
  GaussianState out;
  out.dim = d;
  out.mean = Phi * state.mean;
  out.cov = Phi * state.cov * Phi.transpose();
  const auto pm = point_mass_covariance(t);
  for (int i = 0; i < d; ++i) {
    out.cov(i, i) += pm.xx;
    out.cov(i, d + i) += pm.xv;
    out.cov(d + i, i) += pm.xv;
    out.cov(d + i, d + i) += pm.vv;
  }
  return out;
}

double mehler_density(const GaussianState& state, const Vec2& x, const Vec2& v) {
  const int d = state.dim;
  Eigen::LLT<Eigen::MatrixXd> llt(state.cov);
  if (llt.info() != Eigen::Success) throw PreconditionError("mehler_density: singular covariance");
  const Eigen::VectorXd z = phase_point(d, x, v) - state.mean;
  const Eigen::VectorXd y = llt.matrixL().solve(z);
  double logdet = 0.0;
  for (int i = 0; i < 2 * d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return std::exp(-0.5 * y.squaredNorm() - 0.5 * logdet - d * std::log(2.0 * kPi));
}

double mehler_sup(const GaussianState& state) {
  const int d = state.dim;
  Eigen::LLT<Eigen::MatrixXd> llt(state.cov);
  if (llt.info() != Eigen::Success) throw PreconditionError("mehler_sup: singular covariance");
  double logdet = 0.0;
  for (int i = 0; i < 2 * d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return std::exp(-0.5 * logdet - d * std::log(2.0 * kPi));
}

double kernel_envelope(const KernelParams& p, int d, const Vec2& x, const Vec2& v) {
  require(p.C1 > 0.0 && p.C2 > 0.0 && p.tau > 0.0, "kernel_envelope: parameters must be positive");
  Vec2 xx = Vec2::Zero(), vv = Vec2::Zero();
  for (int i = 0; i < d; ++i) {
    xx[i] = x[i];
    vv[i] = v[i];
  }
  const double tau = p.tau;
  const double a = (xx - 0.5 * tau * vv).squaredNorm();
  return p.C1 / std::pow(tau, 2 * d) * std::exp(-3.0 * p.C2 * a / (tau * tau * tau) - p.C2 * vv.squaredNorm() / (4.0 * tau));
}

EnvelopeFit fit_kernel_envelope(int d, const std::vector<double>& times, int points_per_axis,
                                unsigned long long seed) {
  require(d == 1 || d == 2, "fit_kernel_envelope: dimension must be 1 or 2");
  require(!times.empty() && points_per_axis >= 2, "fit_kernel_envelope: empty sample");
  EnvelopeFit fit{1.0, 0.9, 0.0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double t : times) {
    require(t > 0.0, "fit_kernel_envelope: times must be positive");
    const GaussianState s = mehler_propagate(GaussianState::point_mass(d, Vec2::Zero(), Vec2::Zero()), t);
    const KernelParams kp{1.0, fit.C2, t};
    // Points scattered over a few standard deviations of the exact density.
    const double sx = std::sqrt(s.cov(0, 0)), sv = std::sqrt(s.cov(d, d));
    const int n = points_per_axis * points_per_axis;
    for (int k = 0; k < n; ++k) {
      Vec2 x = Vec2::Zero(), v = Vec2::Zero();
      for (int i = 0; i < d; ++i) {
        x[i] = 3.0 * sx * normal(rng);
        v[i] = 3.0 * sv * normal(rng);
      }
      const double env = kernel_envelope(kp, d, x, v);
      if (env <= 0.0) continue;
      fit.max_ratio = std::max(fit.max_ratio, mehler_density(s, x, v) / env);
    }
  }
  fit.C1 = 1.5 * fit.max_ratio;
  return fit;
}

double containment_mass(const Domain& domain, const GaussianState& state) {
  const int d = state.dim;
  require(d == domain.dim(), "containment_mass: dimension mismatch");
  if (domain.kind() == DomainKind::Interval) {
    const double m = state.mean[0];
    const double s = std::sqrt(state.cov(0, 0));
    const double L = domain.extent();
    return 0.5 * std::erfc(m / (s * std::sqrt(2.0))) + 0.5 * std::erfc((L - m) / (s * std::sqrt(2.0)));
  }
  const Eigen::Matrix2d cxx = state.cov.topLeftCorner(2, 2);
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cxx).eigenvalues()[1];
  const double r = domain.extent() - Vec2(state.mean[0], state.mean[1]).norm();
  if (r <= 0.0) return 1.0;
  // |z|^2 <= lmax chi^2_2
  return std::exp(-r * r / (2.0 * lmax));
}

Field sample_gaussian(const PhaseGrid& grid, const GaussianState& state) {
  require(state.dim == grid.dim(), "sample_gaussian: dimension mismatch");
  return grid.sample([&](const Vec2& x, const Vec2& v) { return mehler_density(state, x, v); });
}

InteriorReport interior_compare(const PhaseGrid& grid, const Field& f, const GaussianState& reference) {
  require(f.size() == grid.size(), "interior_compare: field size mismatch");
  InteriorReport rep;
  rep.containment_mass = containment_mass(grid.domain(), reference);
  if (!(rep.containment_mass < 1e-6))
    throw PreconditionError("interior_compare: reference mass outside the domain is " +
                            std::to_string(rep.containment_mass) + " (needs < 1e-6)");
  const Field ref = sample_gaussian(grid, reference);
  const Eigen::VectorXd w = grid.weights();
  rep.l1_error = ((f - ref).cwiseAbs().array() * w.array()).sum();
  rep.reference_mass = (ref.array() * w.array()).sum();
  return rep;
}

}  // namespace kfp
