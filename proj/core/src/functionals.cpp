#include "kfp/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kfp/errors.hpp"

namespace kfp {

namespace {

Eigen::VectorXd velocity_weight(const PhaseGrid& grid, const WeightSpec& w) {
  Eigen::VectorXd out(grid.nv());
  for (int j = 0; j < grid.nv(); ++j) out[j] = w(grid.v(j), grid.dim());
  return out;
}

double chi(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double s = t - 1.0;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double chi_prime(double t) {
  if (t <= 1.0 || t >= 2.0) return 0.0;
  const double s = t - 1.0;
  return -(30.0 * s * s - 60.0 * s * s * s + 30.0 * s * s * s * s);
}

RateFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  require(den > 0.0, "fit: abscissae are degenerate");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.points = static_cast<int>(x.size());
  return fit;
}

RateFit fit_log(const std::vector<double>& t, const std::vector<double>& values, double t1, double t2, bool log_t) {
  require(t.size() == values.size(), "fit: size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t1 || t[i] > t2) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw PreconditionError("fit: non-positive value at t = " + std::to_string(t[i]));
    if (log_t && !(t[i] > 0.0)) throw PreconditionError("fit: power fit needs t > 0");
    x.push_back(log_t ? std::log(t[i]) : t[i]);
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 8) throw PreconditionError("fit: fewer than 8 points in the window");
  return least_squares(x, y);
}

}  // namespace

double weighted_lp_norm(const PhaseGrid& grid, const Field& f, const Eigen::VectorXd& weight, double p) {
  require(f.size() == grid.size(), "weighted_lp_norm: field size mismatch");
  require(p >= 1.0, "weighted_lp_norm: p must be >= 1");
  const bool per_velocity = weight.size() == grid.nv();
  require(per_velocity || weight.size() == grid.size(), "weighted_lp_norm: weight size mismatch");
  const bool inf = std::isinf(p);
  double acc = 0.0;
  for (int ix = 0; ix < grid.nx(); ++ix) {
    const double vx = grid.volumes()[ix];
    for (int iv = 0; iv < grid.nv(); ++iv) {
      const auto k = grid.index(ix, iv);
      const double a = std::abs(f[k]) * (per_velocity ? weight[iv] : weight[k]);
      if (inf)
        acc = std::max(acc, a);
      else if (a > 0.0)
        acc += std::pow(a, p) * vx * grid.wv(iv);
    }
  }
  return inf ? acc : std::pow(acc, 1.0 / p);
}

double weighted_lp_norm(const PhaseGrid& grid, const Field& f, const WeightSpec& w, double p) {
  return weighted_lp_norm(grid, f, velocity_weight(grid, w), p);
}

double dg_norm(const PhaseGrid& grid, const Field& f, double p) {
  return weighted_lp_norm(grid, f, WeightSpec::maxwell_power(p), p);
}

Moments moments(const PhaseGrid& grid, const Field& f) {
  require(f.size() == grid.size(), "moments: field size mismatch");
  Moments m{Eigen::VectorXd::Zero(grid.nx()), Eigen::MatrixXd::Zero(grid.nx(), 2)};
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iv = 0; iv < grid.nv(); ++iv) {
      const double fw = f[grid.index(ix, iv)] * grid.wv(iv);
      m.rho[ix] += fw;
      m.j(ix, 0) += fw * grid.v(iv)[0];
      m.j(ix, 1) += fw * grid.v(iv)[1];
    }
  return m;
}

double zero_flux_residual(const PhaseGrid& grid, const Field& f) {
  double worst = 0.0;
  for (int b = 0; b < static_cast<int>(grid.boundary_faces().size()); ++b) {
    const auto out = outgoing_trace(grid, f, b);
    const auto in = incoming_trace(grid, f, b);
    const Vec2& n = grid.boundary_faces()[b].normal;
    double net = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < out.velocity.size(); ++k) {
      const double un = n.dot(grid.v(out.velocity[k])) * grid.wv(out.velocity[k]);
      net += un * out.values[k];
      scale += std::abs(un * out.values[k]);
    }
    for (std::size_t k = 0; k < in.velocity.size(); ++k) {
      const double un = n.dot(grid.v(in.velocity[k])) * grid.wv(in.velocity[k]);
      net += un * in.values[k];
      scale += std::abs(un * in.values[k]);
    }
    if (scale > 0.0) worst = std::max(worst, std::abs(net) / scale);
  }
  return worst;
}

BoundaryDGReport dg_boundary_check(const PhaseGrid& grid, const Field& f, double p) {
  require(p >= 1.0 && std::isfinite(p), "dg_boundary_check: p must lie in [1, inf)");
  BoundaryDGReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < static_cast<int>(grid.boundary_faces().size()); ++b) {
    const auto& face = grid.boundary_faces()[b];
    const Eigen::VectorXd mw = grid.wall_maxwellian(face);
    const auto side = [&](const TraceField& t) {
      double s = 0.0;
      for (std::size_t k = 0; k < t.velocity.size(); ++k) {
        const int j = t.velocity[k];
        const double un = std::abs(face.normal.dot(grid.v(j)));
        s += un * grid.wv(j) * std::pow(std::abs(t.values[k]), p) * std::pow(mw[j], 1.0 - p);
      }
      return s;
    };
    const double out = side(outgoing_trace(grid, f, b));
    const double in = side(incoming_trace(grid, f, b));
    rep.outgoing.push_back(out);
    rep.incoming.push_back(in);
    if (out > 0.0) rep.max_violation = std::max(rep.max_violation, (in - out) / out);
  }
  if (!std::isfinite(rep.max_violation)) rep.max_violation = 0.0;
  return rep;
}

double TimeCutoff::value(double t) const { return chi(std::abs(t - 0.5 * T) / (0.25 * T)); }

double TimeCutoff::derivative(double t) const {
  const double h = 0.25 * T;
  const double u = t - 0.5 * T;
  const double sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
  return chi_prime(std::abs(u) / h) * sign / h;
}

PenalizationReport boundary_penalization(const PhaseGrid& grid, const Trajectory& traj, double q, double beta) {
  require(q > 0.0 && q < 1.0, "boundary_penalization: q must lie in (0,1)");
  require(traj.snapshots.size() >= 2, "boundary_penalization: at least two snapshots are needed");
  const int d = grid.dim();
  if (beta <= 0.0) beta = 1.0 / (2.0 * (d + 1));
  const double T = traj.snapshot_times.back();
  const TimeCutoff cut{T};
  const WeightSpec m = WeightSpec::stretched(-(d + 2) * (1.0 - q));

  // Per-velocity factors m^q <v>^{-2} and m^q <varpi_->, per-cell delta^{-beta}.
  Eigen::VectorXd mq(grid.nv()), mq_left(grid.nv()), mq_right(grid.nv());
  for (int j = 0; j < grid.nv(); ++j) {
    const double r = grid.v(j).norm();
    mq[j] = std::pow(m(r, d), q) * grid.wv(j);
    mq_left[j] = mq[j] / (1.0 + r * r);
    const double vm = std::max(0.0, -varpi_inverse(m, q, r, d));
    mq_right[j] = mq[j] * std::sqrt(1.0 + vm * vm);
  }
  Eigen::VectorXd dist(grid.nx());
  for (int ix = 0; ix < grid.nx(); ++ix) {
    const double delta = grid.domain().signed_distance(grid.centers()[ix]);
    require(delta > 0.0, "boundary_penalization: cell center on the boundary");
    dist[ix] = std::pow(delta, -beta);
  }

  const std::size_t ns = traj.snapshots.size();
  std::vector<double> left(ns), right_cut(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const Field& f = traj.snapshots[s];
    double l = 0.0, rc = 0.0, rd = 0.0;
    for (int ix = 0; ix < grid.nx(); ++ix) {
      const double vx = grid.volumes()[ix];
      for (int iv = 0; iv < grid.nv(); ++iv) {
        const double fq = std::pow(std::max(0.0, f[grid.index(ix, iv)]), q) * vx;
        l += fq * dist[ix] * mq_left[iv];
        rc += fq * mq_right[iv];
        rd += fq * mq[iv];
      }
    }
    const double t = traj.snapshot_times[s];
    const double phi = cut.value(t);
    const double phiq = phi > 0.0 ? std::pow(phi, q) : 0.0;
    const double dphiq = phi > 0.0 ? q * std::pow(phi, q - 1.0) * std::abs(cut.derivative(t)) : 0.0;
    left[s] = l * phiq;
    right_cut[s] = rc * phiq + rd * dphiq;
  }
  PenalizationReport rep;
  rep.beta = beta;
  for (std::size_t s = 1; s < ns; ++s) {
    const double h = traj.snapshot_times[s] - traj.snapshot_times[s - 1];
    rep.left += 0.5 * h * (left[s] + left[s - 1]);
    rep.right += 0.5 * h * (right_cut[s] + right_cut[s - 1]);
  }
  rep.ratio = rep.right > 0.0 ? rep.left / rep.right : 0.0;
  return rep;
}

InterpolationReport interpolation_inequality_test(const std::function<double(double)>& psi, double a, long samples,
                                                  unsigned long long seed) {
  require(a > 0.0, "interpolation test: a must be positive");
  require(samples >= 2, "interpolation test: need at least two samples");
  constexpr int d = 3;
  constexpr double kPi = std::numbers::pi;
  const double beta = 1.0 / (2.0 * (d + 1));
  const double sigma = std::sqrt(1.0 / (4.0 * a));
  // g^2 / (gaussian density) is constant for this sampling density.
  const double vfactor = std::pow(2.0 * kPi * sigma * sigma, 1.5);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, sigma);
  double sl = 0, sl2 = 0, sr = 0, sr2 = 0;
  for (long i = 0; i < samples; ++i) {
    const double u = unif(rng);
    const double delta = u * u;
    if (delta <= 0.0) continue;
    // x-weight of the radial reduction over the sampling density 1/(2 sqrt(delta))
    const double wx = 4.0 * kPi * (1.0 - delta) * (1.0 - delta) * 2.0 * std::sqrt(delta);
    const double ps = psi(delta);
    const double base = ps * ps * wx * vfactor;
    const double v1 = normal(rng), v2 = normal(rng), v3 = normal(rng);
    const double r2 = v1 * v1 + v2 * v2 + v3 * v3;
    const double b = std::sqrt(1.0 + r2);
    const double gradfac = 1.0 / b - 2.0 * a * b;
    const double l = base * std::pow(delta, -beta);
    const double r = base * (v1 * v1 / std::sqrt(delta) + r2 * gradfac * gradfac);
    sl += l;
    sl2 += l * l;
    sr += r;
    sr2 += r * r;
  }
  const double n = static_cast<double>(samples);
  InterpolationReport rep;
  rep.left = sl / n;
  rep.right = sr / n;
  rep.left_error = std::sqrt(std::max(0.0, sl2 / n - rep.left * rep.left) / n);
  rep.right_error = std::sqrt(std::max(0.0, sr2 / n - rep.right * rep.right) / n);
  rep.ratio = rep.left > 0.0 ? rep.right / rep.left : 0.0;
  return rep;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& values, double t1, double t2) {
  return fit_log(t, values, t1, t2, false);
}

RateFit fit_power(const std::vector<double>& t, const std::vector<double>& values, double t1, double t2) {
  return fit_log(t, values, t1, t2, true);
}

}  // namespace kfp
