#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kfp/errors.hpp"
#include "kfp/evolution.hpp"
#include "kfp/functionals.hpp"

using namespace kfp;

namespace {

std::shared_ptr<const PhaseGrid> interval(int nx, int nv, double iota = 1.0) {
  GridSpec s;
  s.nx = nx;
  s.nv = nv;
  return build_grid(Domain::interval(1.0, Accommodation(iota)), s);
}

Field random_field(const PhaseGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Field f(g.size());
  for (auto& x : f) x = u(rng);
  return f;
}

}  // namespace

TEST(StepCount, AdjustsStepToHitFinalTime) {
  const auto [n, dt] = step_count(1.0, 0.3);
  EXPECT_EQ(n, 4);
  EXPECT_DOUBLE_EQ(dt, 0.25);
  EXPECT_THROW(step_count(-1.0, 0.1), PreconditionError);
}

TEST(Evolve, SteadyStateIsPreserved) {
  for (auto scheme : {Scheme::Imex, Scheme::FullImplicit}) {
    const auto g = interval(16, 16, 0.5);
    const Generator L = assemble_generator(g);
    const auto traj = evolve(L, g->steady_state(), 5.0, {scheme, 0.0});
    EXPECT_LT((traj.final_state - g->steady_state()).cwiseAbs().maxCoeff(), 1e-10) << to_string(scheme);
  }
}

TEST(Evolve, PositivityAndMass) {
  GridSpec s;
  s.nx = 4;
  s.nv = 6;
  s.spatial_angles = 16;
  s.velocity_angles = 16;
  for (const auto& g : {interval(24, 24, 0.3), build_grid(Domain::disk(1.0, Accommodation(0.7)), s)}) {
    const Generator L = assemble_generator(g);
    const Field f0 = random_field(*g, 4);
    const auto traj = evolve(L, f0, 5.0, {});
    for (double m : traj.min) EXPECT_GE(m, -1e-14);
    for (double m : traj.mass) EXPECT_NEAR(m, traj.mass.front(), 1e-12 * traj.mass.front());
  }
}

TEST(Evolve, RejectsStepAboveCfl) {
  const auto g = interval(16, 16);
  const Generator L = assemble_generator(g);
  const double cfl = resolve_dt(L, {});
  EXPECT_THROW(evolve(L, g->steady_state(), 1.0, {Scheme::Imex, 2.0 * cfl}), PreconditionError);
}

TEST(Evolve, RejectsNonFiniteData) {
  const auto g = interval(8, 8);
  const Generator L = assemble_generator(g);
  Field f = g->steady_state();
  f[3] = std::nan("");
  EXPECT_THROW(evolve(L, f, 0.1, {}), PreconditionError);
}

TEST(Evolve, DenseExponentialMatchesImplicitAsStepShrinks) {
  const auto g = interval(6, 8, 0.5);
  const Generator L = assemble_generator(g);
  const Field f0 = random_field(*g, 1);
  const Field ref = evolve(L, f0, 0.5, {Scheme::DenseExponential, 0.5}).final_state;
  double prev = kInfinity;
  for (double dt : {0.02, 0.01, 0.005}) {
    const double e = (evolve(L, f0, 0.5, {Scheme::FullImplicit, dt}).final_state - ref).cwiseAbs().maxCoeff();
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(Dual, ConstantsArePreserved) {
  const auto g = interval(12, 16, 0.4);
  const Generator D = assemble_dual(assemble_generator(g));
  const auto traj = evolve_dual(D, Field::Ones(g->size()), 2.0, {});
  EXPECT_LT((traj.final_state.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Dual, DualityIdentity) {
  const auto g = interval(16, 16, 0.5);
  const Generator L = assemble_generator(g);
  const Generator D = assemble_dual(L);
  for (auto scheme : {Scheme::Imex, Scheme::FullImplicit}) {
    StepperSpec spec{scheme, 0.0};
    spec.dt = resolve_dt(L, spec);
    for (unsigned k = 0; k < 20; ++k) {
      const Field f0 = random_field(*g, 2 * k), gT = random_field(*g, 2 * k + 1);
      const Field fT = evolve(L, f0, 1.0, spec).final_state;
      const Field g0 = evolve_dual(D, gT, 1.0, spec).final_state;
      const double scale = std::sqrt(g->inner(f0, f0) * g->inner(gT, gT));
      EXPECT_LE(std::abs(g->inner(fT, gT) - g->inner(f0, g0)), 1e-12 * scale);
    }
  }
}

TEST(Dual, WeightedL1GrowthIsExponentiallyBounded) {
  const auto g = interval(16, 24, 1.0);
  const Generator D = assemble_dual(assemble_generator(g));
  const WeightSpec m = WeightSpec::gaussian_negative(0.25);
  const Field gT = random_field(*g, 12);
  std::vector<double> ts, ratio;
  for (double T : {0.5, 1.0, 2.0, 3.0, 4.0}) {
    const Field g0 = evolve_dual(D, gT, T, {}).final_state;
    ts.push_back(T);
    ratio.push_back(weighted_lp_norm(*g, g0, m, 1.0) / weighted_lp_norm(*g, gT, m, 1.0));
  }
  for (double r : ratio) EXPECT_TRUE(std::isfinite(r));
  // C e^{kappa T} with C = ratio at the first time and kappa the largest slope.
  double kappa = 0.0;
  for (std::size_t k = 1; k < ts.size(); ++k)
    kappa = std::max(kappa, std::log(ratio[k] / ratio[k - 1]) / (ts[k] - ts[k - 1]));
  EXPECT_TRUE(std::isfinite(kappa));
  for (std::size_t k = 0; k < ts.size(); ++k)
    EXPECT_LE(ratio[k], ratio[0] * std::exp(kappa * (ts[k] - ts[0])) * (1 + 1e-12));
}

TEST(SplitDecay, NegativeRateForW2Weight) {
  const auto g = interval(16, 48, 1.0);
  const Generator L = assemble_generator(g);
  const WeightSpec w = WeightSpec::polynomial(3.0);
  const SplitChoice c = choose_split(w, *g);
  const Split s = split_generator(L, c.M, c.R);
  for (double p : {1.0, 2.0, kInfinity}) EXPECT_LT(decay_rate_of_B(s.B, w, p, 4.0, {}, 3, 2).rate, 0.0);
}

TEST(SplitDecay, ZeroMConservesL1) {
  const auto g = interval(12, 24, 1.0);
  const Generator L = assemble_generator(g);
  const Split s = split_generator(L, 0.0, 1.0);
  EXPECT_NEAR(decay_rate_of_B(s.B, WeightSpec::polynomial(0.0), 1.0, 2.0, {}, 3, 1).rate, 0.0, 1e-10);
}

TEST(SplitDecay, RateMonotoneInM) {
  const auto g = interval(8, 16, 1.0);
  const Generator L = assemble_generator(g);
  const WeightSpec w = WeightSpec::polynomial(3.0);
  double prev = kInfinity;
  for (double M : {1.0, 4.0, 16.0}) {
    const Split s = split_generator(L, M, 2.0);
    const double rate = decay_rate_of_B(s.B, w, 1.0, 4.0, {Scheme::DenseExponential, 0.02}, 3, 1).rate;
    EXPECT_LT(rate, prev) << M;
    prev = rate;
  }
}

TEST(Duhamel, FirstFormulaHolds) {
  const auto g = interval(6, 8, 1.0);
  const Generator L = assemble_generator(g);
  const Split s = split_generator(L, 2.0, 1.0);
  Field f0 = random_field(*g, 3);
  f0 = project_mass_free(*g, f0);
  EXPECT_NEAR(g->mass(f0), 0.0, 1e-13);
  EXPECT_LT((project_mass_free(*g, f0) - f0).cwiseAbs().maxCoeff(), 1e-13);
  const auto rep = duhamel_reconstruct(L, s, f0, 0.5, 0, 1e-3);
  EXPECT_LT(rep.max_discrepancy, 1e-3);
  const auto coarse = duhamel_reconstruct(L, s, f0, 0.5, 0, 4e-3);
  EXPECT_LT(rep.max_discrepancy, coarse.max_discrepancy);
}

TEST(Duhamel, NoSplitIsExact) {
  const auto g = interval(6, 8, 1.0);
  const Generator L = assemble_generator(g);
  const Split s = split_generator(L, 0.0, 1.0);
  const Field f0 = project_mass_free(*g, random_field(*g, 5));
  for (int n : {0, 1, 2}) EXPECT_LT(duhamel_reconstruct(L, s, f0, 0.3, n, 1e-2).max_discrepancy, 1e-12) << n;
}
