#include "kfp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kfp/errors.hpp"

namespace kfp {

namespace {

constexpr double kPi = std::numbers::pi;

double log_wall_maxwellian(double r, int d) {
  return -0.5 * (d - 1) * std::log(2.0 * kPi) - 0.5 * r * r;
}

// log(c e^a + (1-c) e^b) for c in [0,1] without overflow.
double log_mix(double c, double a, double b) {
  if (c >= 1.0) return a;
  if (c <= 0.0) return b;
  const double m = std::max(a, b);
  return m + std::log(c * std::exp(a - m) + (1.0 - c) * std::exp(b - m));
}

// Increasing representative <v>^k exp(zeta <v>^s), up to a constant factor.
struct Canonical {
  double k;
  double zeta;
  double s;
  double s_eff() const { return zeta > 0.0 ? s : 0.0; }
};

Canonical canonical(const WeightSpec& w) {
  switch (w.form()) {
    case WeightForm::Stretched: return {w.k(), w.zeta(), w.s()};
    case WeightForm::Gaussian: return {0.0, w.zeta(), 2.0};
    case WeightForm::GaussianNegative: return {0.0, -w.zeta(), 2.0};
    case WeightForm::MaxwellPower: return {0.0, -0.5 * w.exponent(), 2.0};
  }
  return {0.0, 0.0, 0.0};
}

Canonical inverse(const Canonical& c) { return {-c.k, -c.zeta, c.s}; }

bool is_limit_maxwellian(const Canonical& c) { return c.s == 2.0 && c.zeta == 0.5 && c.k == 0.0; }

bool in_W(const Canonical& c) {
  if (c.zeta < 0.0) return false;
  if (c.k + c.zeta * c.s < 0.0) return false;  // nondecreasing
  const double s = c.s_eff();
  if (s == 0.0) return true;
  if (s < 2.0) return true;
  if (c.zeta < 0.5) return true;
  return is_limit_maxwellian(c);
}

// omega <~ M^{-1}
bool below_inverse_maxwellian(const Canonical& c) {
  const double s = c.s_eff();
  if (s < 2.0) return true;
  if (c.zeta < 0.5) return true;
  return c.zeta == 0.5 && c.k <= 0.0;
}

// omega^{-1} |v| integrable
bool inverse_moment_integrable(const Canonical& c, int d) { return c.s_eff() > 0.0 || c.k > d + 1; }

bool in_W0(const Canonical& c, int d) {
  if (!in_W(c)) return false;
  const double s = c.s_eff();
  if (s > 0.0 && s < 2.0) return true;
  if (s == 2.0) return c.zeta < 0.5;
  return c.k > d + 1;
}

WeightSpec to_spec(const Canonical& c) {
  if (c.zeta == 0.0) return WeightSpec::stretched(c.k);
  return WeightSpec::stretched(c.k, c.zeta, c.s);
}

// Radial integral int_0^inf F(r) dr on r = sinh(u), u in [0, asinh(1e12)].
template <class F>
double radial_integral(F&& integrand) {
  constexpr int n = 40000;
  const double umax = std::asinh(1e12);
  const double du = umax / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) * du;
    const double r = std::sinh(u);
    sum += integrand(r) * std::cosh(u) * du;
  }
  if (!std::isfinite(sum)) throw NumericalAbort("moment integral overflow: weight not integrable");
  return sum;
}

// int_{S^{d-1}} (sigma_1)_+ and int_{S^{d-1}} (sigma_1)_+^2.
double sphere_half_flux(int d) { return std::pow(kPi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d + 1)); }
double sphere_half_square(int d) {
  const double area = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
  return area / (2.0 * d);
}

double safe_exp(double x) {
  const double e = std::exp(x);
  if (!std::isfinite(e)) throw NumericalAbort("moment integral overflow: weight not integrable");
  return e;
}

}  // namespace

WeightSpec::WeightSpec(WeightForm form, double k, double zeta, double s, double a)
    : form_(form), k_(k), zeta_(zeta), s_(s), a_(a) {}

WeightSpec WeightSpec::stretched(double k, double zeta, double s) {
  require(std::isfinite(k), "weight exponent k must be finite");
  require(zeta >= 0.0, "weight rate zeta must be >= 0");
  require(s >= 0.0 && s <= 2.0, "weight power s must lie in [0,2]");
  return WeightSpec(WeightForm::Stretched, k, zeta, s, 0.0);
}

WeightSpec WeightSpec::gaussian(double zeta) {
  require(zeta >= 0.0 && zeta < 0.5, "gaussian weight requires 0 <= zeta < 1/2");
  return WeightSpec(WeightForm::Gaussian, 0.0, zeta, 2.0, 0.0);
}

WeightSpec WeightSpec::gaussian_negative(double zeta) {
  require(zeta >= 0.0 && zeta < 0.5, "gaussian weight requires 0 <= zeta < 1/2");
  return WeightSpec(WeightForm::GaussianNegative, 0.0, zeta, 2.0, 0.0);
}

WeightSpec WeightSpec::maxwell_power(double q) {
  require(q > 0.0, "maxwell_power: q must be positive");
  return maxwell_exponent(-1.0 + 1.0 / q);
}

WeightSpec WeightSpec::maxwell_exponent(double a) {
  require(std::isfinite(a), "maxwell exponent must be finite");
  return WeightSpec(WeightForm::MaxwellPower, 0.0, 0.0, 2.0, a);
}

RadialJet WeightSpec::jet(double r) const {
  switch (form_) {
    case WeightForm::Stretched: {
      const double b2 = 1.0 + r * r;
      const double b = std::sqrt(b2);
      const double bs = std::pow(b, s_);
      const double p1r = k_ / b2 + zeta_ * s_ * bs / b2;
      const double p2 = k_ * (1.0 / b2 - 2.0 * r * r / (b2 * b2)) +
                        zeta_ * s_ * (bs / b2 + (s_ - 2.0) * bs / (b2 * b2) * r * r);
      return {0.5 * k_ * std::log(b2) + zeta_ * bs, r * p1r, p1r, p2};
    }
    case WeightForm::Gaussian: return {zeta_ * r * r, 2.0 * zeta_ * r, 2.0 * zeta_, 2.0 * zeta_};
    case WeightForm::GaussianNegative: return {-zeta_ * r * r, -2.0 * zeta_ * r, -2.0 * zeta_, -2.0 * zeta_};
    case WeightForm::MaxwellPower: return {-0.5 * a_ * r * r, -a_ * r, -a_, -a_};
  }
  return {0.0, 0.0, 0.0, 0.0};
}

double WeightSpec::operator()(double r, int d) const {
  double phi = jet(r).phi;
  if (form_ == WeightForm::MaxwellPower) phi += a_ * log_wall_maxwellian(0.0, d);
  return std::exp(phi);
}

std::optional<WeightSpec> WeightSpec::divided_by_bracket() const {
  if (form_ == WeightForm::Stretched) return WeightSpec::stretched(k_ - 1.0, zeta_, s_);
  if (form_ == WeightForm::Gaussian) return WeightSpec::stretched(-1.0, zeta_, 2.0);
  return std::nullopt;
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  switch (form_) {
    case WeightForm::Stretched: os << "<v>^" << k_ << " exp(" << zeta_ << " <v>^" << s_ << ")"; break;
    case WeightForm::Gaussian: os << "exp(" << zeta_ << " |v|^2)"; break;
    case WeightForm::GaussianNegative: os << "exp(-" << zeta_ << " |v|^2)"; break;
    case WeightForm::MaxwellPower: os << "M^" << a_; break;
  }
  return os.str();
}

double bracket(double r) { return std::sqrt(1.0 + r * r); }

double wall_maxwellian(double r, int d) { return std::exp(log_wall_maxwellian(r, d)); }

double maxwellian(double r, int d) { return std::pow(2.0 * kPi, -0.5 * d) * std::exp(-0.5 * r * r); }

namespace {

double varpi_of_jet(const RadialJet& j, double p, double r, int d) {
  require(p > 0.0, "varpi: exponent p must be positive");
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double grad2 = j.phi1 * j.phi1;
  const double lap = j.phi2 + grad2 + (d - 1) * j.phi1_over_r;
  return 2.0 * (1.0 - ip) * grad2 + (2.0 * ip - 1.0) * lap + (1.0 - ip) * d - r * j.phi1;
}

}  // namespace

double varpi(const WeightSpec& w, double p, double r, int d) { return varpi_of_jet(w.jet(r), p, r, d); }

double varpi_inverse(const WeightSpec& w, double p, double r, int d) {
  const RadialJet j = w.jet(r);
  return varpi_of_jet({-j.phi, -j.phi1, -j.phi1_over_r, -j.phi2}, p, r, d);
}

double varpi_limsup(const WeightSpec& w, int d) {
  const Canonical c = canonical(w);
  const double s = c.s_eff();
  if (s == 0.0) return d - c.k;  // sup over p of d/p' - k
  if (s < 2.0) return c.zeta > 0.0 ? -kInfinity : kInfinity;
  const double lead = 2.0 * c.zeta * (2.0 * c.zeta - 1.0);
  if (lead > 0.0) return kInfinity;
  if (lead < 0.0) return -kInfinity;
  // zeta = 1/2: varpi -> k + d/p
  return c.k + d;
}

KappaResult kappa_sup(const WeightSpec& w, int d, double vmax) {
  const double limsup = varpi_limsup(w, d);
  if (limsup == kInfinity) return {kInfinity, limsup, kInfinity};
  const double rmax = std::max(50.0, 10.0 * vmax);
  constexpr int n = 10000;
  double best = -kInfinity;
  double arg = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = rmax * i / (n - 1);
    for (double p : {1.0, kInfinity}) {
      const double val = varpi(w, p, r, d);
      if (val > best) {
        best = val;
        arg = r;
      }
    }
  }
  if (std::isfinite(limsup) && limsup > best) {
    best = limsup;
    arg = kInfinity;
  }
  return {best, limsup, arg};
}

std::string to_string(WeightClass c) {
  switch (c) {
    case WeightClass::W: return "W";
    case WeightClass::W0: return "W0";
    case WeightClass::W1: return "W1";
    case WeightClass::W2: return "W2";
    case WeightClass::W3: return "W3";
    case WeightClass::N: return "N";
    case WeightClass::N0: return "N0";
    case WeightClass::N1: return "N1";
  }
  return "?";
}

Classification classify(const WeightSpec& w, int d) {
  require(d >= 1, "classify: dimension must be >= 1");
  Classification out;
  out.kappa = kappa_sup(w, d);
  const Canonical c = canonical(w);
  if (in_W(c)) {
    out.classes.insert(WeightClass::W);
    if (in_W0(c, d)) {
      out.classes.insert(WeightClass::W0);
      if (varpi_limsup(to_spec(c), d) < -1.0) out.classes.insert(WeightClass::W2);
    }
    if (in_W(Canonical{c.k - 1.0, c.zeta, c.s})) out.classes.insert(WeightClass::W3);
  }
  if (w.form() == WeightForm::Gaussian) {
    const double theta1 = 1.0 / (2.0 * d + 3.0);
    if (w.zeta() > 0.5 * (1.0 - theta1) && w.zeta() < 0.5) out.classes.insert(WeightClass::W1);
  }
  const Canonical inv = inverse(c);
  if (in_W(inv)) {
    out.classes.insert(WeightClass::N);
    if (below_inverse_maxwellian(inv) && inverse_moment_integrable(inv, d)) out.classes.insert(WeightClass::N0);
  }
  if (w.form() == WeightForm::GaussianNegative && w.zeta() > 0.0 && w.zeta() < 0.5) {
    out.classes.insert(WeightClass::N1);
  }
  return out;
}

double cutoff(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double t = r - 1.0;
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

VelocityQuadrature VelocityQuadrature::uniform_1d(double vmax, int n) {
  require(n >= 2 && vmax > 0.0, "uniform_1d: need n >= 2 and vmax > 0");
  VelocityQuadrature q;
  q.dim = 1;
  q.vmax = vmax;
  const double h = 2.0 * vmax / n;
  for (int j = 0; j < n; ++j) {
    q.nodes.emplace_back(-vmax + (j + 0.5) * h, 0.0);
    q.weights.push_back(h);
  }
  return q;
}

VelocityQuadrature VelocityQuadrature::polar_2d(double vmax, int ns, int na) {
  require(ns >= 1 && na >= 1 && vmax > 0.0, "polar_2d: need ns, na >= 1 and vmax > 0");
  VelocityQuadrature q;
  q.dim = 2;
  q.vmax = vmax;
  const double ds = vmax / ns;
  const double dphi = 2.0 * kPi / na;
  for (int a = 0; a < ns; ++a) {
    const double s = (a + 0.5) * ds;
    for (int c = 0; c < na; ++c) {
      const double phi = (c + 0.5) * dphi;
      q.nodes.emplace_back(s * std::cos(phi), s * std::sin(phi));
      q.weights.push_back(s * ds * dphi);
    }
  }
  return q;
}

MomentIntegrals moment_integrals(const std::vector<double>& weight, const VelocityQuadrature& quad,
                                 const Vec2& normal, double q) {
  require(weight.size() == quad.nodes.size(), "moment_integrals: weight size does not match quadrature");
  MomentIntegrals k{0.0, 0.0, q > 0.0 ? 0.0 : std::nan("")};
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const Vec2& v = quad.nodes[i];
    const double r = v.norm();
    const double nv = normal.dot(v);
    if (nv <= 0.0) continue;
    const double m = wall_maxwellian(r, quad.dim);
    const double nvhat = nv / bracket(r);
    k.K0 += m * nvhat * nvhat * quad.weights[i];
    k.K1 += m * weight[i] * nv * quad.weights[i];
    if (q > 0.0) k.K2 += std::pow(weight[i], q / (1.0 - q)) * nv * quad.weights[i];
  }
  if (!std::isfinite(k.K1) || (q > 0.0 && !std::isfinite(k.K2))) {
    throw NumericalAbort("moment integral overflow: weight not integrable");
  }
  return k;
}

MomentIntegrals moment_integrals_radial(const std::function<double(double)>& log_weight, int d, double q) {
  require(d >= 1, "moment_integrals_radial: dimension must be >= 1");
  const double a1 = sphere_half_flux(d);
  const double a2 = sphere_half_square(d);
  MomentIntegrals k{};
  k.K0 = a2 * radial_integral([&](double r) {
    return safe_exp(log_wall_maxwellian(r, d)) * r * r / (1.0 + r * r) * std::pow(r, d - 1);
  });
  k.K1 = a1 * radial_integral([&](double r) {
    return safe_exp(log_wall_maxwellian(r, d) + log_weight(r)) * std::pow(r, d);
  });
  k.K2 = std::nan("");
  if (q > 0.0) {
    require(q < 1.0, "moment_integrals_radial: K2 needs q in (0,1)");
    k.K2 = a1 * radial_integral([&](double r) { return safe_exp(q / (1.0 - q) * log_weight(r)) * std::pow(r, d); });
  }
  return k;
}

namespace {

double log_base(const WeightSpec& w, double r, int d) {
  double phi = w.jet(r).phi;
  if (w.form() == WeightForm::MaxwellPower) phi += w.exponent() * log_wall_maxwellian(0.0, d);
  return phi;
}

// log of omega_A, m_A or m_A^q, depending on the variant.
double log_cut(TwistVariant variant, const WeightSpec& base, int d, double A, double q, double r) {
  const double chi = cutoff(r / A);
  switch (variant) {
    case TwistVariant::Forward: return log_mix(chi, 0.0, log_base(base, r, d));
    case TwistVariant::Dual: return log_mix(chi, log_wall_maxwellian(r, d), log_base(base, r, d));
    case TwistVariant::MomentLq:
      return log_mix(chi, (1.0 - q) * log_wall_maxwellian(r, d), q * log_base(base, r, d));
    case TwistVariant::FrakM: return log_wall_maxwellian(r, d);
  }
  return 0.0;
}

}  // namespace

double twist_condition(TwistVariant variant, const WeightSpec& base, int d, double A, double q) {
  switch (variant) {
    case TwistVariant::Forward: {
      const auto k = moment_integrals_radial([&](double r) { return log_cut(variant, base, d, A, q, r); }, d);
      return k.K1 - 1.0 - 0.5 * k.K0;
    }
    case TwistVariant::Dual: {
      const auto k = moment_integrals_radial(
          [&](double r) { return log_cut(variant, base, d, A, q, r) - log_wall_maxwellian(r, d); }, d);
      return k.K1 - 1.0 - 0.5 * k.K0;
    }
    case TwistVariant::MomentLq: {
      require(q > 0.0 && q < 1.0, "moment-Lq twist requires q in (0,1)");
      // K1 = int M^q m_A^q (n.v)_-, K2 = int m_A^(q/(1-q)) (n.v)_+, K0 = 1/4 int M^q m_A^q (n.vhat)_-^2
      const auto k = moment_integrals_radial(
          [&](double r) {
            const double lmq = log_cut(variant, base, d, A, q, r);
            return q * log_wall_maxwellian(r, d) + lmq - log_wall_maxwellian(r, d);
          },
          d);
      const auto k2 = moment_integrals_radial([&](double r) { return log_cut(variant, base, d, A, q, r) / q; }, d, q);
      const double a2 = sphere_half_square(d);
      const double k0 = 0.25 * a2 * radial_integral([&](double r) {
        return safe_exp(q * log_wall_maxwellian(r, d) + log_cut(variant, base, d, A, q, r)) * r * r / (1.0 + r * r) *
               std::pow(r, d - 1);
      });
      return k0 + k.K1 - std::pow(k2.K2, 1.0 - q);
    }
    case TwistVariant::FrakM: return 0.0;
  }
  return 0.0;
}

TwistedWeight::TwistedWeight(TwistVariant variant, WeightSpec base, Domain domain, double A, double q)
    : variant_(variant), base_(std::move(base)), domain_(std::move(domain)), A_(A), q_(q), d_(domain_.dim()) {
  require(A >= 1.0, "twisted weight: cutoff radius A must be >= 1");
}

double TwistedWeight::base_value(const Vec2& v) const {
  if (variant_ == TwistVariant::FrakM) return wall_maxwellian(v.norm(), d_);
  return base_(v, d_);
}

double TwistedWeight::cut(const Vec2& v) const {
  const double l = log_cut(variant_, base_, d_, A_, q_, v.norm());
  return variant_ == TwistVariant::MomentLq ? std::exp(l / q_) : std::exp(l);
}

double TwistedWeight::value(const Vec2& x, const Vec2& v) const {
  const double r = v.norm();
  const double b2 = 1.0 + r * r;
  const double nvt = domain_.normal_field(x).dot(v) / b2;
  const double delta = std::max(0.0, domain_.signed_distance(x));
  const double layer = std::sqrt(delta / domain_.diameter_bound());
  switch (variant_) {
    case TwistVariant::Forward: return cut(v) + 0.5 * nvt;
    case TwistVariant::Dual: return cut(v) - 0.5 * nvt * wall_maxwellian(r, d_);
    case TwistVariant::MomentLq: {
      const double mq = std::exp(log_cut(variant_, base_, d_, A_, q_, r));
      return std::pow(mq * (1.0 - 0.25 * nvt + 0.25 * layer * nvt), 1.0 / q_);
    }
    case TwistVariant::FrakM: return wall_maxwellian(r, d_) * (1.0 - 0.25 * layer * nvt);
  }
  return 0.0;
}

TwistedWeight build_twisted(TwistVariant variant, const WeightSpec& base, const Domain& domain,
                            const TwistOptions& options) {
  const int d = domain.dim();
  double A = 1.0;
  if (options.A) {
    A = *options.A;
  } else if (variant != TwistVariant::FrakM) {
    bool found = false;
    for (int e = 0; e <= 16 && !found; ++e) {
      A = std::ldexp(1.0, e);
      const double c = twist_condition(variant, base, d, A, options.q);
      found = variant == TwistVariant::MomentLq ? c >= 0.0 : c <= 0.0;
    }
    if (!found) throw PreconditionError("build_twisted: no cutoff A <= 2^16 satisfies the closure condition");
  }
  TwistedWeight t(variant, base, domain, A, options.q);
  // c_A = 2 sup base/cut, attained on |v| <= 2A since the two agree beyond.
  double ratio = 1.0;
  constexpr int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const Vec2 v(2.0 * A * i / n, 0.0);
    ratio = std::max(ratio, t.base_value(v) / t.cut(v));
  }
  t.set_c_A(2.0 * ratio);
  return t;
}

Exponents Exponents::compute(int d, std::optional<double> q, std::optional<double> p) {
  require(d >= 1, "exponents: dimension must be >= 1");
  Exponents e{};
  e.d = d;
  e.beta = 1.0 / (2.0 * (d + 1));
  e.theta1 = 1.0 / (2.0 * d + 3.0);
  e.p = p.value_or(1.0 + 1.0 / (4.0 * d));
  require(e.p > 1.0 && e.p < 1.0 + 1.0 / (2.0 * d), "exponents: p must lie in (1, 1 + 1/(2d))");
  const double th = e.theta1;
  const double q_low = std::max((d + 1.0) / (d + 2.0), (1.0 - th) / (1.0 - th / e.p));
  e.q = q.value_or(0.5 * (q_low + 1.0));
  require(e.q > (d + 1.0) / (d + 2.0) && e.q < 1.0, "exponents: q must lie in ((d+1)/(d+2), 1)");
  e.r = 1.0 / ((1.0 - th) / e.q + th / e.p);
  require(e.r > 1.0, "exponents: q too small, interpolated exponent r <= 1");
  e.eta = (1.0 - th) * (1.0 / e.q - 1.0) + th * (1.0 / e.p + 2.0 * d * (1.0 - 1.0 / e.p));
  e.nu1 = 1.0 / e.r - e.eta - 1.0 / e.q;
  e.nu2 = e.nu1;
  e.nu = std::max(e.nu1, e.nu2) / (1.0 - 1.0 / e.r);
  return e;
}

}  // namespace kfp
