#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kfp/errors.hpp"
#include "kfp/functionals.hpp"

using namespace kfp;

namespace {

std::shared_ptr<const PhaseGrid> interval(int nx, int nv, double iota = 1.0, double L = 1.0) {
  GridSpec s;
  s.nx = nx;
  s.nv = nv;
  return build_grid(Domain::interval(L, Accommodation(iota)), s);
}

Field random_field(const PhaseGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Field f(g.size());
  for (auto& x : f) x = u(rng);
  return f;
}

Field from_mu(const PhaseGrid& g, const std::function<double(const Vec2&)>& rho) {
  Field f(g.size());
  for (int ix = 0; ix < g.nx(); ++ix)
    for (int j = 0; j < g.nv(); ++j) f[g.index(ix, j)] = rho(g.centers()[ix]) * g.mu()[j];
  return f;
}

}  // namespace

TEST(WeightedNorm, NormalisedMaxwellian) {
  const auto g = interval(16, 32);
  const Field f = from_mu(*g, [](const Vec2&) { return 1.0; });
  EXPECT_NEAR(weighted_lp_norm(*g, f, WeightSpec::polynomial(0.0), 1.0), 1.0, 1e-8);
}

TEST(WeightedNorm, SteadyStateInHilbertNorm) {
  const auto g = interval(16, 32, 1.0, 2.0);
  const Eigen::VectorXd w = g->mu().cwiseSqrt().cwiseInverse();
  EXPECT_NEAR(weighted_lp_norm(*g, g->steady_state(), w, 2.0), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(WeightedNorm, MonotoneInWeight) {
  const auto g = interval(8, 24);
  const WeightSpec small = WeightSpec::polynomial(1.0), large = WeightSpec::polynomial(3.0);
  for (unsigned k = 0; k < 10; ++k) {
    const Field f = random_field(*g, k).array() - 0.5;
    for (double p : {1.0, 2.0, 3.5, kInfinity})
      EXPECT_LE(weighted_lp_norm(*g, f, small, p), weighted_lp_norm(*g, f, large, p) * (1 + 1e-14));
  }
}

TEST(WeightedNorm, RejectsBadExponent) {
  const auto g = interval(4, 4);
  EXPECT_THROW(weighted_lp_norm(*g, g->steady_state(), WeightSpec::polynomial(0.0), 0.5), PreconditionError);
}

TEST(Moments, SteadyStateCarriesNoCurrent) {
  const auto g = interval(16, 32);
  const auto m = moments(*g, g->steady_state());
  EXPECT_LT(m.j.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((m.rho.array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(Moments, DensityMode) {
  const auto g = interval(32, 32);
  auto rho = [](const Vec2& x) { return 1.0 + 0.5 * std::sin(2 * std::numbers::pi * x.x()); };
  const auto m = moments(*g, from_mu(*g, rho));
  for (int ix = 0; ix < g->nx(); ++ix) EXPECT_NEAR(m.rho[ix], rho(g->centers()[ix]), 1e-14);
  EXPECT_LT(m.j.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ZeroFlux, HoldsOnTrajectory) {
  const auto g = interval(16, 16, 0.4);
  const Generator L = assemble_generator(g);
  const auto traj = evolve(L, random_field(*g, 2), 1.0, {}, {}, 5);
  ASSERT_FALSE(traj.snapshots.empty());
  for (const auto& f : traj.snapshots) EXPECT_LE(zero_flux_residual(*g, f), 1e-12);
}

TEST(DGBoundary, WallMaxwellianTraceIsEqualityCase) {
  for (double iota : {0.0, 0.4, 1.0}) {
    const auto g = interval(8, 16, iota);
    Field f = random_field(*g, 1);
    for (const auto& bf : g->boundary_faces()) {
      const Eigen::VectorXd M = g->wall_maxwellian(bf);
      for (int j = 0; j < g->nv(); ++j) f[g->index(bf.cell, j)] = 2.5 * M[j];
    }
    for (double p : {1.0, 2.0, 3.0}) {
      const auto rep = dg_boundary_check(*g, f, p);
      for (std::size_t b = 0; b < rep.outgoing.size(); ++b)
        EXPECT_NEAR(rep.incoming[b], rep.outgoing[b], 1e-12 * rep.outgoing[b]);
    }
  }
}

TEST(DGBoundary, RandomTraceStrictForP2) {
  const auto g = interval(8, 16, 0.6);
  for (unsigned k = 0; k < 5; ++k) {
    const Field f = random_field(*g, 10 + k);
    const auto rep = dg_boundary_check(*g, f, 2.0);
    for (std::size_t b = 0; b < rep.outgoing.size(); ++b) EXPECT_LT(rep.incoming[b], rep.outgoing[b]);
    EXPECT_LT(rep.max_violation, 0.0);
    const auto one = dg_boundary_check(*g, f, 1.0);
    for (std::size_t b = 0; b < one.outgoing.size(); ++b)
      EXPECT_NEAR(one.incoming[b], one.outgoing[b], 1e-12 * one.outgoing[b]);
  }
}

TEST(TimeCutoff, Shape) {
  const TimeCutoff phi{4.0};
  EXPECT_EQ(phi.value(2.0), 1.0);
  EXPECT_EQ(phi.value(1.0), 1.0);
  EXPECT_EQ(phi.value(0.0), 0.0);
  EXPECT_EQ(phi.value(4.0), 0.0);
  const double h = 1e-6;
  for (double t : {0.3, 0.7, 3.2, 3.6})
    EXPECT_NEAR(phi.derivative(t), (phi.value(t + h) - phi.value(t - h)) / (2 * h), 1e-6);
}

TEST(Penalization, ZeroDataGivesZero) {
  const auto g = interval(8, 8);
  const Generator L = assemble_generator(g);
  const auto traj = evolve(L, Field::Zero(g->size()), 1.0, {});
  const auto rep = boundary_penalization(*g, traj, 0.9);
  EXPECT_EQ(rep.left, 0.0);
  EXPECT_EQ(rep.right, 0.0);
  EXPECT_EQ(rep.ratio, 0.0);
  EXPECT_DOUBLE_EQ(rep.beta, 0.25);
}

TEST(Penalization, StableUnderRefinement) {
  std::vector<double> c;
  for (int n : {32, 64}) {
    const auto g = interval(n, n);
    const Generator L = assemble_generator(g);
    Field f0 = g->sample([](const Vec2& x, const Vec2& v) {
      return std::exp(-50.0 * (x.x() - 0.5) * (x.x() - 0.5) - 0.5 * v.x() * v.x());
    });
    f0 /= g->mass(f0);
    c.push_back(boundary_penalization(*g, evolve(L, f0, 1.0, {}), 0.95).ratio);
  }
  EXPECT_GT(c[0], 0.0);
  EXPECT_NEAR(c[1] / c[0], 1.0, 0.2);
}

TEST(Penalization, DoubledExponentRaisesTheRatio) {
  const auto g = interval(32, 32);
  Field f0 = g->sample([](const Vec2& x, const Vec2& v) {
    return std::exp(-50.0 * (x.x() - 0.5) * (x.x() - 0.5) - 0.5 * v.x() * v.x());
  });
  f0 /= g->mass(f0);
  const auto traj = evolve(assemble_generator(g), f0, 1.0, {});
  const auto a = boundary_penalization(*g, traj, 0.95);
  const auto b = boundary_penalization(*g, traj, 0.95, 2.0 * a.beta);
  EXPECT_DOUBLE_EQ(a.ratio, a.left / a.right);
  EXPECT_EQ(b.right, a.right);
  EXPECT_GT(b.left, a.left);
}

TEST(Interpolation, ScaleInvariant) {
  auto psi = [](double d) { return std::exp(-d / 0.3); };
  const auto a = interpolation_inequality_test(psi, 1.0, 200000, 4);
  const auto b = interpolation_inequality_test([&](double d) { return 2.0 * psi(d); }, 1.0, 200000, 4);
  EXPECT_NEAR(b.ratio, a.ratio, 1e-12 * a.ratio);
  EXPECT_NEAR(b.left, 4.0 * a.left, 1e-12 * b.left);
}

TEST(Interpolation, StableAcrossSeeds) {
  auto psi = [](double d) { return std::exp(-d / 0.3); };
  std::vector<double> r;
  for (unsigned long long seed : {1ull, 2ull, 3ull}) {
    const auto rep = interpolation_inequality_test(psi, 1.0, 10000000, seed);
    EXPECT_TRUE(std::isfinite(rep.ratio));
    EXPECT_GT(rep.ratio, 0.0);
    EXPECT_LT(rep.left_error, 0.05 * rep.left);
    r.push_back(rep.ratio);
  }
  for (double x : r) EXPECT_NEAR(x / r[0], 1.0, 0.3);
}

TEST(Interpolation, AwayFromWallIsDominated) {
  const double d0 = 0.3, a = 1.0;
  const auto rep = interpolation_inequality_test([&](double d) { return d >= d0 ? 1.0 : 0.0; }, a, 2000000, 8);
  const double pi = std::numbers::pi;
  // int g^2 = |ball of radius 1 - d0| * int exp(-2a|v|^2) dv
  const double g2 = 4.0 / 3.0 * pi * std::pow(1 - d0, 3) * std::pow(pi / (2 * a), 1.5);
  EXPECT_LE(rep.left, std::pow(d0, -0.125) * g2 + 4 * rep.left_error);
}

TEST(Fits, ExactExponential) {
  std::vector<double> t, y;
  for (int k = 0; k <= 50; ++k) {
    t.push_back(0.1 * k);
    y.push_back(3.0 * std::exp(-0.3 * t.back()));
  }
  const auto f = fit_rate(t, y, 1.0, 5.0);
  EXPECT_NEAR(f.slope, -0.3, 1e-9);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-9);
  EXPECT_LT(f.residual, 1e-12);
  EXPECT_EQ(f.points, 41);
}

TEST(Fits, ExactPower) {
  std::vector<double> t, y;
  for (int k = 1; k <= 40; ++k) {
    t.push_back(0.01 * k);
    y.push_back(std::pow(t.back(), -2.0));
  }
  EXPECT_NEAR(fit_power(t, y, 0.01, 0.4).slope, -2.0, 1e-9);
}

TEST(Fits, NoisyExponential) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.01);
  std::vector<double> t, y;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(0.05 * k);
    y.push_back(std::exp(-0.3 * t.back()) * (1.0 + n(rng)));
  }
  EXPECT_NEAR(fit_rate(t, y, 0.0, 10.0).slope, -0.3, 0.05 * 0.3);
}

TEST(Fits, Preconditions) {
  std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7, 8}, y(9, 1.0);
  y[4] = 0.0;
  EXPECT_THROW(fit_rate(t, y, 0.0, 8.0), PreconditionError);
  y[4] = 1.0;
  EXPECT_THROW(fit_rate(t, y, 0.0, 6.0), PreconditionError);
  EXPECT_NO_THROW(fit_rate(t, y, 0.0, 8.0));
}
