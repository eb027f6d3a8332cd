#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "kfp/errors.hpp"
#include "kfp/weights.hpp"

using namespace kfp;

namespace {

// varpi from its defining expression, derivatives by central differences of
// the weight in R^d.
double varpi_fd(const std::function<double(double)>& w, double p, const Eigen::Vector3d& v, int d) {
  auto om = [&](const Eigen::Vector3d& y) { return w(y.head(d).norm()); };
  const double h = 1e-4;
  const double o = om(v);
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  double lap = 0.0;
  for (int i = 0; i < d; ++i) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[i] = h;
    const double fp = om(v + e), fm = om(v - e);
    grad[i] = (fp - fm) / (2 * h);
    lap += (fp - 2 * o + fm) / (h * h);
  }
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  return 2 * (1 - ip) * grad.squaredNorm() / (o * o) + (2 * ip - 1) * lap / o + (1 - ip) * d - v.dot(grad) / o;
}

bool has(const Classification& c, WeightClass k) { return c.contains(k); }

}  // namespace

TEST(Varpi, ConstantWeight) {
  const auto one = WeightSpec::polynomial(0.0);
  for (double r : {0.0, 0.7, 3.0}) EXPECT_NEAR(varpi(one, 2.0, r, 1), 0.5, 1e-14);
}

TEST(Varpi, MaxwellPowerClosedForm) {
  // -(1/q)(1-1/q)|v|^2 + (1/p + 1/q - 2/(pq)) d
  EXPECT_NEAR(varpi(WeightSpec::maxwell_power(2.0), 2.0, 2.0, 3), 0.5, 1e-12);
  for (double q : {1.5, 3.0}) {
    for (double p : {1.0, 2.0, 4.0}) {
      const double r = 1.3;
      const double expect = -(1 / q) * (1 - 1 / q) * r * r + (1 / p + 1 / q - 2 / (p * q)) * 2;
      EXPECT_NEAR(varpi(WeightSpec::maxwell_power(q), p, r, 2), expect, 1e-12) << q << " " << p;
    }
  }
}

TEST(Varpi, InverseMaxwellianIsConstant) {
  // The q -> infinity end of the closed form: d/p.
  for (double r : {0.0, 1.0, 4.0}) {
    EXPECT_NEAR(varpi(WeightSpec::maxwell_power(kInfinity), 1.0, r, 3), 3.0, 1e-12);
    EXPECT_NEAR(varpi(WeightSpec::maxwell_power(kInfinity), 2.0, r, 3), 1.5, 1e-12);
  }
}

TEST(Varpi, AgreesWithFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const std::vector<WeightSpec> family = {WeightSpec::polynomial(3.0), WeightSpec::stretched(2.0, 0.5, 1.0),
                                          WeightSpec::stretched(-1.0, 0.3, 1.5), WeightSpec::gaussian(0.2),
                                          WeightSpec::gaussian_negative(0.25), WeightSpec::maxwell_power(2.0)};
  for (const auto& w : family)
    for (int d = 1; d <= 3; ++d)
      for (int k = 0; k < 100; ++k) {
        Eigen::Vector3d v(u(rng), u(rng), u(rng));
        for (int i = d; i < 3; ++i) v[i] = 0.0;
        for (double p : {1.0, 2.0, kInfinity}) {
          const double exact = varpi(w, p, v.norm(), d);
          EXPECT_NEAR(exact, varpi_fd([&](double r) { return w(r, d); }, p, v, d), 1e-6 * std::max(1.0, std::abs(exact)))
              << w.describe() << " d=" << d << " p=" << p << " |v|=" << v.norm();
        }
      }
}

TEST(Varpi, InverseWeight) {
  const auto w = WeightSpec::stretched(2.0, 0.3, 1.0);
  for (double r : {0.2, 1.0, 5.0})
    for (double p : {1.0, 2.0}) {
      const double exact = varpi_inverse(w, p, r, 2);
      const double fd = varpi_fd([&](double s) { return 1.0 / w(s, 2); }, p, Eigen::Vector3d(0.6 * r, 0.8 * r, 0.0), 2);
      EXPECT_NEAR(exact, fd, 1e-6 * std::max(1.0, std::abs(exact)));
    }
  const auto poly = WeightSpec::polynomial(3.0);
  for (double r : {0.5, 2.0}) EXPECT_NEAR(varpi_inverse(poly, 2.0, r, 1), varpi(WeightSpec::polynomial(-3.0), 2.0, r, 1), 1e-12);
}

TEST(KappaSup, Examples) {
  EXPECT_TRUE(std::isinf(kappa_sup(WeightSpec::stretched(0.0, 0.6, 2.0), 1).kappa));
  const auto k = kappa_sup(WeightSpec::stretched(0.0, 1.0, 1.0), 1);
  EXPECT_TRUE(std::isfinite(k.kappa));
  EXPECT_EQ(k.kappa_star, -kInfinity);
  const auto poly = kappa_sup(WeightSpec::polynomial(3.0), 3);
  EXPECT_TRUE(std::isfinite(poly.kappa));
  // d/p' - k with p = infinity
  EXPECT_NEAR(varpi_limsup(WeightSpec::polynomial(3.0), 3), 0.0, 1e-12);
  EXPECT_NEAR(varpi(WeightSpec::polynomial(3.0), kInfinity, 1e4, 3), 0.0, 1e-6);
}

TEST(Classify, PolynomialDPlusTwo) {
  for (int d = 1; d <= 3; ++d) {
    const auto c = classify(WeightSpec::polynomial(d + 2.0), d);
    EXPECT_TRUE(has(c, WeightClass::W));
    EXPECT_TRUE(has(c, WeightClass::W0));
    EXPECT_TRUE(has(c, WeightClass::W3));
    EXPECT_TRUE(has(c, WeightClass::W2));
    EXPECT_FALSE(has(c, WeightClass::N));
  }
  EXPECT_FALSE(classify(WeightSpec::polynomial(2.0), 1).contains(WeightClass::W0));
}

TEST(Classify, GaussianW1Window) {
  EXPECT_TRUE(classify(WeightSpec::gaussian(0.45), 1).contains(WeightClass::W1));
  EXPECT_FALSE(classify(WeightSpec::gaussian(0.3), 1).contains(WeightClass::W1));
  EXPECT_FALSE(classify(WeightSpec::gaussian(0.4), 1).contains(WeightClass::W1));
}

TEST(Classify, NegativeGaussian) {
  const auto c = classify(WeightSpec::gaussian_negative(0.25), 2);
  EXPECT_TRUE(c.contains(WeightClass::N));
  EXPECT_TRUE(c.contains(WeightClass::N0));
  EXPECT_TRUE(c.contains(WeightClass::N1));
  EXPECT_FALSE(c.contains(WeightClass::W));
}

TEST(Classify, Monotone) {
  std::vector<WeightSpec> family;
  for (double k : {-3.0, 0.0, 1.0, 2.5, 4.0})
    for (double z : {0.0, 0.3, 0.7})
      for (double s : {0.0, 0.5, 1.0, 2.0}) family.push_back(WeightSpec::stretched(k, z, s));
  for (double z : {0.1, 0.3, 0.45}) {
    family.push_back(WeightSpec::gaussian(z));
    family.push_back(WeightSpec::gaussian_negative(z));
  }
  for (const auto& w : family)
    for (int d = 1; d <= 3; ++d) {
      const auto c = classify(w, d);
      if (c.contains(WeightClass::W0)) EXPECT_TRUE(c.contains(WeightClass::W)) << w.describe();
      if (c.contains(WeightClass::W2)) EXPECT_TRUE(c.contains(WeightClass::W0)) << w.describe();
      if (c.contains(WeightClass::N1)) EXPECT_TRUE(c.contains(WeightClass::N0)) << w.describe();
      if (c.contains(WeightClass::N0)) EXPECT_TRUE(c.contains(WeightClass::N)) << w.describe();
    }
}

TEST(Classify, W2WeightsAreStronglyNegativeAtLargeSpeed) {
  for (const auto& w : {WeightSpec::polynomial(3.0), WeightSpec::gaussian(0.2), WeightSpec::stretched(0.0, 1.0, 1.0)}) {
    const auto c = classify(w, 1);
    ASSERT_TRUE(c.contains(WeightClass::W2)) << w.describe();
    const double vmax = 6.0;
    for (double r = 0.9 * vmax; r <= vmax; r += 0.01)
      for (double p : {1.0, 2.0, kInfinity}) EXPECT_LT(varpi(w, p, r, 1), -1.0) << w.describe() << " r=" << r;
  }
}

TEST(Cutoff, Shape) {
  EXPECT_EQ(cutoff(0.5), 1.0);
  EXPECT_EQ(cutoff(1.0), 1.0);
  EXPECT_EQ(cutoff(2.0), 0.0);
  EXPECT_NEAR(cutoff(1.5), 0.5, 1e-15);
  double prev = 1.0;
  for (double r = 1.0; r <= 2.0; r += 0.01) {
    EXPECT_LE(cutoff(r), prev + 1e-15);
    prev = cutoff(r);
  }
}

TEST(MomentIntegrals, HalfFluxOfWallMaxwellian) {
  for (int d = 1; d <= 3; ++d) {
    const auto k = moment_integrals_radial([](double) { return 0.0; }, d);
    EXPECT_NEAR(k.K1, 1.0, 1e-7) << d;
  }
  const auto quad = VelocityQuadrature::uniform_1d(10.0, 40000);
  const auto k = moment_integrals(std::vector<double>(quad.nodes.size(), 1.0), quad, Vec2(1.0, 0.0));
  EXPECT_NEAR(k.K1, 1.0, 1e-6);
  EXPECT_TRUE(std::isnan(k.K2));
}

TEST(MomentIntegrals, K0OneDimensional) {
  // Composite Simpson on [0, 40] of v^2/(1+v^2) exp(-v^2/2).
  const int n = 200000;
  const double h = 40.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double v = i * h;
    const double f = v * v / (1 + v * v) * std::exp(-0.5 * v * v);
    s += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
  }
  const double oracle = s * h / 3;
  EXPECT_NEAR(moment_integrals_radial([](double) { return 0.0; }, 1).K0, oracle, 1e-9);
  const auto quad = VelocityQuadrature::uniform_1d(12.0, 6000);
  const std::vector<double> one(quad.nodes.size(), 1.0);
  const double right = moment_integrals(one, quad, Vec2(1.0, 0.0)).K0;
  const double left = moment_integrals(one, quad, Vec2(-1.0, 0.0)).K0;
  EXPECT_NEAR(right, oracle, 1e-6);
  EXPECT_NEAR(left, right, 1e-14);
  EXPECT_GT(right, 0.0);
}

TEST(MomentIntegrals, K2OfMaxwellPowerIsOne) {
  for (int d = 1; d <= 3; ++d)
    for (double q : {0.6, 0.8, 0.95}) {
      const double a = (1 - q) / q;
      const auto k = moment_integrals_radial(
          [&](double r) { return a * (-0.5 * (d - 1) * std::log(2 * std::numbers::pi) - 0.5 * r * r); }, d, q);
      EXPECT_NEAR(k.K2, 1.0, 1e-7) << d << " " << q;
    }
}

TEST(Twisted, ForwardSandwich) {
  for (int d = 1; d <= 2; ++d) {
    const Domain dom = d == 1 ? Domain::interval(1.0) : Domain::disk(1.0);
    const auto tw = build_twisted(TwistVariant::Forward, WeightSpec::polynomial(d + 2.0), dom);
    EXPECT_GE(tw.A(), 1.0);
    EXPECT_LE(twist_condition(TwistVariant::Forward, WeightSpec::polynomial(d + 2.0), d, tw.A(), 0.5), 0.0);
    for (double x = 0.0; x <= 1.0; x += 0.05)
      for (double r = -6.0; r <= 6.0; r += 0.1) {
        const Vec2 xx = d == 1 ? Vec2(x, 0.0) : Vec2(0.7 * x, 0.3 * x);
        const Vec2 v = d == 1 ? Vec2(r, 0.0) : Vec2(r, 0.5 * r);
        const double w = tw.value(xx, v);
        const double wa = tw.cut(v);
        EXPECT_GE(w, 0.5 * wa);
        EXPECT_LE(w, 1.5 * wa);
        EXPECT_GE(0.5 * wa, tw.base_value(v) / tw.c_A() * (1 - 1e-12));
      }
  }
}

TEST(Twisted, K1DecreasesTowardOne) {
  const auto quad = VelocityQuadrature::uniform_1d(60.0, 60000);
  const double base = moment_integrals(std::vector<double>(quad.nodes.size(), 1.0), quad, Vec2(1.0, 0.0)).K1;
  double first = 0.0;
  double prev = kInfinity;
  for (double A : {4.0, 8.0, 16.0}) {
    TwistOptions opt;
    opt.A = A;
    const auto tw = build_twisted(TwistVariant::Forward, WeightSpec::polynomial(3.0), Domain::interval(1.0), opt);
    std::vector<double> w;
    for (const auto& v : quad.nodes) w.push_back(tw.cut(v));
    const double k1 = moment_integrals(w, quad, Vec2(1.0, 0.0)).K1;
    EXPECT_LE(k1, prev);
    EXPECT_GE(k1, base);
    if (first == 0.0) first = k1;
    prev = k1;
  }
  EXPECT_GT(first, prev);
  EXPECT_LT(prev - base, 1e-12);
  EXPECT_NEAR(base, 1.0, 1e-6);
}

TEST(Twisted, AllVariantsPositive) {
  const Domain dom = Domain::disk(1.0);
  const std::vector<std::pair<TwistVariant, WeightSpec>> cases = {
      {TwistVariant::Forward, WeightSpec::polynomial(4.0)},
      {TwistVariant::Dual, WeightSpec::gaussian_negative(0.25)},
      {TwistVariant::FrakM, WeightSpec::polynomial(0.0)}};
  for (const auto& [variant, base] : cases) {
    const auto tw = build_twisted(variant, base, dom);
    for (double x = 0.0; x < 1.0; x += 0.1)
      for (double r = 0.0; r <= 6.0; r += 0.25) EXPECT_GT(tw.value(Vec2(x, 0.0), Vec2(r, -r)), 0.0);
  }
}

TEST(Exponents, Relations) {
  for (int d = 1; d <= 3; ++d) {
    const auto e = Exponents::compute(d);
    EXPECT_DOUBLE_EQ(e.beta, 1.0 / (2 * (d + 1)));
    EXPECT_DOUBLE_EQ(e.theta1, 1.0 / (2 * d + 3));
    EXPECT_GT(e.q, (d + 1.0) / (d + 2.0));
    EXPECT_LT(e.q, 1.0);
    EXPECT_GT(e.p, 1.0);
    EXPECT_LT(e.p, 1.0 + 1.0 / (2 * d));
    EXPECT_NEAR(1.0 / e.r, (1 - e.theta1) / e.q + e.theta1 / e.p, 1e-14);
    EXPECT_GT(e.r, 1.0);
  }
  EXPECT_THROW(Exponents::compute(1, 0.5), PreconditionError);
}

TEST(WeightSpec, RejectsGaussianAboveHalf) {
  EXPECT_THROW(WeightSpec::gaussian(0.5), PreconditionError);
  EXPECT_THROW(WeightSpec::gaussian_negative(0.7), PreconditionError);
}
