#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kfp/geometry.hpp"

namespace kfp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class WeightForm { Stretched, Gaussian, GaussianNegative, MaxwellPower };

/// Radial profile log(omega) = phi(|v|) and the derivatives needed by varpi.
/// `phi1_over_r` is phi'(r)/r, kept separate so the Laplacian is regular at 0.
struct RadialJet {
  double phi;
  double phi1;
  double phi1_over_r;
  double phi2;
};

/// Parametric weight function on velocities.
///   Stretched:        <v>^k exp(zeta <v>^s)
///   Gaussian:         exp(zeta |v|^2),  zeta < 1/2
///   GaussianNegative: exp(-zeta |v|^2), zeta < 1/2
///   MaxwellPower:     wall Maxwellian raised to the power a
class WeightSpec {
 public:
  static WeightSpec stretched(double k, double zeta = 0.0, double s = 0.0);
  static WeightSpec polynomial(double k) { return stretched(k); }
  static WeightSpec gaussian(double zeta);
  static WeightSpec gaussian_negative(double zeta);
  /// M^(-1 + 1/q); q = infinity gives M^(-1).
  static WeightSpec maxwell_power(double q);
  static WeightSpec maxwell_exponent(double a);

  WeightForm form() const { return form_; }
  double k() const { return k_; }
  double zeta() const { return zeta_; }
  double s() const { return s_; }
  double exponent() const { return a_; }

  RadialJet jet(double r) const;
  double operator()(double r, int d) const;
  double operator()(const Vec2& v, int d) const { return (*this)(v.norm(), d); }

  /// The weight divided (k -> k-1) or inverted, when the result stays in the family.
  std::optional<WeightSpec> divided_by_bracket() const;
  std::string describe() const;

 private:
  WeightSpec(WeightForm form, double k, double zeta, double s, double a);

  WeightForm form_;
  double k_ = 0.0;
  double zeta_ = 0.0;
  double s_ = 0.0;
  double a_ = 0.0;
};

double bracket(double r);  // <v> = sqrt(1 + r^2)
double wall_maxwellian(double r, int d);
double maxwellian(double r, int d);

/// varpi_{omega,p} at a velocity of modulus r; p in [1, infinity].
double varpi(const WeightSpec& w, double p, double r, int d);
inline double varpi(const WeightSpec& w, double p, const Vec2& v, int d) { return varpi(w, p, v.norm(), d); }

/// varpi of the reciprocal weight 1/omega.
double varpi_inverse(const WeightSpec& w, double p, double r, int d);

/// limsup_{|v|->inf} varpi as given by the leading asymptotics, maximised over p.
/// +inf when the leading coefficient is positive, -inf when it is negative.
double varpi_limsup(const WeightSpec& w, int d);

struct KappaResult {
  double kappa;       // max over p in {1,inf} of sup_v varpi; +inf signals class failure
  double kappa_star;  // asymptotic limsup
  double argmax_r;    // radius where the grid sup was attained
};

/// Supremum searched on |v| <= max(50, 10 vmax) with 10^4 radial samples,
/// combined with the asymptotic limit.
KappaResult kappa_sup(const WeightSpec& w, int d, double vmax = 6.0);

enum class WeightClass { W, W0, W1, W2, W3, N, N0, N1 };
std::string to_string(WeightClass c);

struct Classification {
  std::set<WeightClass> classes;
  KappaResult kappa;
  bool contains(WeightClass c) const { return classes.count(c) > 0; }
};

Classification classify(const WeightSpec& w, int d);

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), quintic C^2 join in between.
double cutoff(double r);

/// Velocity quadrature: nodes with positive weights covering a ball of radius vmax.
struct VelocityQuadrature {
  int dim = 1;
  double vmax = 0.0;
  std::vector<Vec2> nodes;
  std::vector<double> weights;

  /// Midpoint rule on n cells of [-vmax, vmax].
  static VelocityQuadrature uniform_1d(double vmax, int n);
  /// Annular sectors: ns speed cells on [0,vmax], na angles centred at
  /// (c + 1/2) 2pi/na.
  static VelocityQuadrature polar_2d(double vmax, int ns, int na);
};

struct MomentIntegrals {
  double K0;
  double K1;
  double K2;
};

/// Velocity moments entering the boundary balance, for a weight tabulated on a
/// quadrature and a unit normal n.
///   K0 = int M (n.vhat)_+^2, K1 = int M w (n.v)_+, K2 = int w^(q/(1-q)) (n.v)_+.
/// With q = 0 (default) K2 is not evaluated and reported as NaN.
MomentIntegrals moment_integrals(const std::vector<double>& weight, const VelocityQuadrature& quad,
                                 const Vec2& normal, double q = 0.0);

/// Same integrals for a radial weight in any dimension d >= 1, given through
/// its logarithm, by a 1-D radial rule (r = sinh u, r <= 1e12) and the exact
/// angular factors.
MomentIntegrals moment_integrals_radial(const std::function<double(double)>& log_weight, int d, double q = 0.0);

enum class TwistVariant { Forward, Dual, MomentLq, FrakM };

struct TwistOptions {
  std::optional<double> A;  // cutoff radius; empty selects it automatically
  double q = 0.5;           // exponent for the moment-Lq variant
};

/// Boundary-adapted weight on phase space built from a base velocity weight.
class TwistedWeight {
 public:
  TwistedWeight(TwistVariant variant, WeightSpec base, Domain domain, double A, double q);

  TwistVariant variant() const { return variant_; }
  const WeightSpec& base() const { return base_; }
  double A() const { return A_; }
  double q() const { return q_; }
  /// Sandwich constant c_A (2 sup base/cut); set by build_twisted.
  double c_A() const { return c_A_; }
  void set_c_A(double c) { c_A_ = c; }

  /// omega_A (forward), m_A (dual), (m_A^q)^(1/q) (moment-Lq), M (frakM).
  double cut(const Vec2& v) const;
  double value(const Vec2& x, const Vec2& v) const;
  double base_value(const Vec2& v) const;

 private:
  TwistVariant variant_;
  WeightSpec base_;
  Domain domain_;
  double A_;
  double q_;
  double c_A_ = 0.0;
  int d_;
};

/// Closure condition at cutoff A: K1(w_A) - 1 - K0/2 for forward and dual
/// (must be <= 0), K0 + K1 - K2^(1-q) for moment-Lq (must be >= 0).
double twist_condition(TwistVariant variant, const WeightSpec& base, int d, double A, double q);

TwistedWeight build_twisted(TwistVariant variant, const WeightSpec& base, const Domain& domain,
                            const TwistOptions& options = {});

/// Exponent bookkeeping for the ultracontractivity chain.
struct Exponents {
  int d;
  double beta;    // 1/(2(d+1))
  double theta1;  // 1/(2d+3)
  double q;       // in ((d+1)/(d+2), 1)
  double p;       // in (1, 1 + 1/(2d))
  double r;       // 1/r = (1-theta1)/q + theta1/p
  double eta;     // (1-theta)(1/q-1) + theta(1/p + 2d(1-1/p))
  double nu1;     // 1/r - eta - 1/q
  double nu2;
  double nu;      // max(nu1,nu2)/(1-1/r)

  /// Default q, p pick the midpoint of their admissible intervals pushed
  /// towards 1 until r > 1.
  static Exponents compute(int d, std::optional<double> q = std::nullopt, std::optional<double> p = std::nullopt);
};

}  // namespace kfp
