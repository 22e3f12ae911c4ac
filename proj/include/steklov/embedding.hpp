#pragma once

// Fractional embedding of the gradient class into the Slobodeckij-type space on the half
// line. After the change of variables y = xi x the double integral becomes a family of
// Hardy-Steklov operators with boundaries xi x and x, so the embedding constant is
// bracketed by supremum and integral surrogates of the family's functionals over xi.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steklov/boundary.hpp"
#include "steklov/errors.hpp"
#include "steklov/exponents.hpp"
#include "steklov/fairway.hpp"
#include "steklov/functional.hpp"
#include "steklov/numeric.hpp"
#include "steklov/quadrature.hpp"
#include "steklov/weight.hpp"

namespace steklov {

// u(x, y) on (0,inf)^2: identically one, a constant, a product f(x) g(y), or a table
// bilinear in (log x, log y) and clamped outside its grid.
class TwoVariableWeight {
 public:
  enum class Kind { one, constant, product, table };

  static TwoVariableWeight one() { return TwoVariableWeight(Kind::one); }
  static TwoVariableWeight constant(double c) {
    if (!(c >= 0) || !std::isfinite(c)) throw DegenerateWeightError("two-variable weight must be finite and >= 0");
    if (c == 1.0) return one();
    TwoVariableWeight u(Kind::constant);
    u.c_ = c;
    return u;
  }
  static TwoVariableWeight product(Weight f, Weight g) {
    TwoVariableWeight u(Kind::product);
    u.f_ = std::make_shared<Weight>(std::move(f));
    u.g_ = std::make_shared<Weight>(std::move(g));
    return u;
  }
  static TwoVariableWeight table(std::vector<double> xs, std::vector<double> ys, std::vector<double> values) {
    if (xs.size() < 2 || ys.size() < 2 || values.size() != xs.size() * ys.size())
      throw std::invalid_argument("two-variable table needs an nx by ny grid of values");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (!(xs[i] > 0) || !(xs[i + 1] > xs[i])) throw std::invalid_argument("table x nodes must increase");
    for (std::size_t i = 0; i + 1 < ys.size(); ++i)
      if (!(ys[i] > 0) || !(ys[i + 1] > ys[i])) throw std::invalid_argument("table y nodes must increase");
    for (double v : values)
      if (!(v >= 0) || !std::isfinite(v)) throw DegenerateWeightError("two-variable table values must be finite and >= 0");
    TwoVariableWeight u(Kind::table);
    for (double& x : xs) x = std::log(x);
    for (double& y : ys) y = std::log(y);
    u.lx_ = std::move(xs);
    u.ly_ = std::move(ys);
    u.vals_ = std::move(values);
    return u;
  }

  Kind kind() const { return kind_; }
  double coef() const { return kind_ == Kind::one ? 1.0 : c_; }
  const Weight& left() const { return *f_; }
  const Weight& right() const { return *g_; }
  std::vector<double> table_x() const { return exp_all(lx_); }
  std::vector<double> table_y() const { return exp_all(ly_); }
  const std::vector<double>& table_values() const { return vals_; }

  // u constant in both variables
  bool is_constant() const { return kind_ == Kind::one || kind_ == Kind::constant; }

  double operator()(double x, double y) const {
    switch (kind_) {
      case Kind::one: return 1.0;
      case Kind::constant: return c_;
      case Kind::product: return power_product({{(*f_)(x), 1.0}, {(*g_)(y), 1.0}});
      case Kind::table: return bilinear(std::log(x), std::log(y));
    }
    return 0.0;
  }

 private:
  explicit TwoVariableWeight(Kind k) : kind_(k) {}

  static std::vector<double> exp_all(const std::vector<double>& v) {
    std::vector<double> o(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) o[i] = std::exp(v[i]);
    return o;
  }
  static std::pair<std::size_t, double> locate(const std::vector<double>& g, double s) {
    if (s <= g.front()) return {0, 0.0};
    if (s >= g.back()) return {g.size() - 2, 1.0};
    std::size_t i = std::upper_bound(g.begin(), g.end(), s) - g.begin() - 1;
    return {i, (s - g[i]) / (g[i + 1] - g[i])};
  }
  double bilinear(double sx, double sy) const {
    auto [i, tx] = locate(lx_, sx);
    auto [j, ty] = locate(ly_, sy);
    std::size_t ny = ly_.size();
    auto at = [&](std::size_t a, std::size_t b) { return vals_[a * ny + b]; };
    return (1 - tx) * ((1 - ty) * at(i, j) + ty * at(i, j + 1)) + tx * ((1 - ty) * at(i + 1, j) + ty * at(i + 1, j + 1));
  }

  Kind kind_;
  double c_ = 1.0;
  std::shared_ptr<Weight> f_, g_;
  std::vector<double> lx_, ly_, vals_;
};

struct EmbeddingProblem {
  TwoVariableWeight u = TwoVariableWeight::one();
  Weight v = Weight::constant(1.0);
  Exponents exps;

  EmbeddingProblem(TwoVariableWeight u_, Weight v_, Exponents e) : u(std::move(u_)), v(std::move(v_)), exps(e) {
    if (!exps.lambda) throw std::invalid_argument("the embedding needs a smoothness index lambda in (0,1)");
  }
  double lq() const { return exps.lam() * exps.q; }
};

// weight of the reduced operator with boundaries xi x and x
inline double reduce_U(const EmbeddingProblem& pb, double xi, double x) {
  if (!(xi > 0 && xi < 1) || !(x > 0)) throw std::invalid_argument("reduce_U needs 0 < xi < 1 and x > 0");
  double c = pb.lq();
  double num = pb.u(x, xi * x) + pb.u(xi * x, x);
  if (num == 0.0) return 0.0;
  return num * std::exp(-c * std::log(x) - (1 + c) * std::log1p(-xi));
}

// int_0^xi U_t(x) dt
inline IntegralValue accumulate_W(const EmbeddingProblem& pb, double xi, double x, double tol = 1e-10) {
  if (!(xi >= 0 && xi < 1) || !(x > 0)) throw std::invalid_argument("accumulate_W needs 0 <= xi < 1 and x > 0");
  if (xi == 0.0) return IntegralValue::exact(0.0);
  QuadratureOptions opt;
  opt.tol = tol;
  return integrate_function([&](double t) { return t >= 1.0 ? 0.0 : reduce_U(pb, t, x); }, 0.0, xi, opt);
}

namespace detail {

inline bool unit_power(double c) { return std::abs(c - 1.0) < 1e-9; }

// log of zeta for the weight x^-c with boundaries xi x, x; L = log xi
inline double log_zeta(double L, double c) {
  if (unit_power(c)) return -0.5 * L;
  return std::log1p(0.5 * std::expm1((c - 1) * L)) / (1 - c);
}

// int_t^{t/xi} x^-c dx / t^(1-c)
inline double log_corridor_mass(double L, double c) {
  if (unit_power(c)) return std::log(-L);
  return std::log(std::expm1((c - 1) * L) / (1 - c));
}

}  // namespace detail

// rho(y) = zeta y splits the mass of x^{-lambda q} over [y, y/xi] in half
inline double zeta_factor(double xi, double lambda, double q) {
  if (!(xi > 0 && xi < 1)) throw std::invalid_argument("zeta_factor needs 0 < xi < 1");
  return std::exp(detail::log_zeta(std::log(xi), lambda * q));
}

// the same for a power weight x^e
inline double power_fairway_factor(double xi, double e) { return std::exp(detail::log_zeta(std::log(xi), -e)); }

struct PowerCriterion {
  bool holds = false;
  double alpha = 0.0;      // the exponent forced on v(z) = z^alpha
  double threshold = 0.0;  // 1/p' + 1/q
};

inline PowerCriterion check_power_criterion(const Exponents& e) {
  if (!(e.p <= e.q)) throw std::invalid_argument("the power criterion needs 1 < p <= q");
  double lam = e.lam();
  PowerCriterion c;
  c.alpha = (1 / e.q - lam + 1) * e.p - 1;
  c.threshold = 1 / e.p_conj() + 1 / e.q;
  c.holds = lam < c.threshold;
  return c;
}

struct GammaCriterion {
  bool holds = false;
  double distance = 0.0;  // |lambda - 1/q|
  double radius = 0.0;    // gamma / p'
};

inline GammaCriterion check_gamma_criterion(const Exponents& e, double gamma) {
  if (!(e.q < e.p)) throw std::invalid_argument("the gamma criterion needs 0 < q < p");
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  GammaCriterion c;
  c.distance = std::abs(e.lam() - 1 / e.q);
  c.radius = gamma / e.p_conj();
  c.holds = c.distance < c.radius;
  return c;
}

// Functionals of the reduced operator with w = x^{-lambda q}, boundaries xi x and x and the
// dual fairway zeta y. Values are the functionals themselves, so the displayed sup-type
// form differs from `A` by 2^{1/q} and the displayed integral-type form from `B` by 2^{1/p}.
struct U1Functionals {
  double A = 0, A_star = 0;
  std::optional<double> B, B_minus_star, B_plus_star;
};

struct U1Report {
  U1Functionals numeric;
  std::optional<U1Functionals> closed;
  double max_rel_gap = 0.0;  // between the two paths, finite entries only
};

namespace detail {

// v^{1-p'} in a form with an exact interval mass
struct DualDensity {
  enum class Kind { power, rational, general } kind = Kind::general;
  double log_c = 0;  // coefficient
  double beta = 0;   // power: density c z^{beta-1}
  double gamma = 0;  // rational: density c z^{gamma-1} (1+z^gamma)^-2

  static DualDensity classify(const Weight& v, const Exponents& e) {
    Weight rho = rho_density(v, e);
    DualDensity d;
    if (auto pw = rho.as_power()) {
      d.kind = Kind::power;
      d.log_c = std::log(pw->first);
      d.beta = pw->second + 1;
    } else if (auto rt = rho.as_rational()) {
      auto [c, ex, g, m] = *rt;
      if (g > 0 && std::abs(ex - (g - 1)) < 1e-12 && std::abs(m + 2) < 1e-12 && c > 0) {
        d.kind = Kind::rational;
        d.log_c = std::log(c);
        d.gamma = g;
      }
    }
    return d;
  }
  bool closed() const { return kind != Kind::general; }

  // log of the mass of [t e^a, t e^{a+width}]
  double log_mass(double lt, double a, double width) const {
    if (kind == Kind::power) {
      if (std::abs(beta) < 1e-14) return log_c + std::log(width);
      return log_c + beta * (lt + a) + std::log(std::expm1(beta * width) / beta);
    }
    double lx = gamma * (lt + a), ly = gamma * (lt + a + width);
    auto softplus = [](double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); };
    return log_c + lx + std::log(std::expm1(gamma * width)) - std::log(gamma) - softplus(lx) - softplus(ly);
  }
  double log_density(double lt) const {
    if (kind == Kind::power) return log_c + (beta - 1) * lt;
    double lx = gamma * lt;
    double sp = lx > 0 ? lx + std::log1p(std::exp(-lx)) : std::log1p(std::exp(lx));
    return log_c + (gamma - 1) * lt - 2 * sp;
  }
};

// sup over t > 0 of exp(phi(log t)); infinite when the log-profile keeps rising at an end
template <class Phi>
double log_sup(Phi&& phi, bool linear_profile) {
  if (linear_profile) {
    double f0 = phi(0.0), f1 = phi(1.0);
    double slope = f1 - f0;
    if (std::isinf(f0) && f0 < 0) return 0.0;
    if (std::abs(slope) > 1e-9 * std::max(1.0, std::abs(f0))) return kInf;
    return std::exp(f0);
  }
  const double T = 460.0, h = 0.25;
  int n = static_cast<int>(2 * T / h);
  double best = -kInf;
  int ib = 0;
  for (int i = 0; i <= n; ++i) {
    double f = phi(-T + i * h);
    if (f > best) {
      best = f;
      ib = i;
    }
  }
  if (std::isinf(best) && best < 0) return 0.0;
  if ((ib == 0 && phi(-T - 1) > best) || (ib == n && phi(T + 1) > best)) return kInf;
  double lo = -T + std::max(0, ib - 1) * h, hi = -T + std::min(n, ib + 1) * h;
  auto [s, v] = golden_max(phi, lo, hi, 60);
  (void)s;
  return std::exp(std::max(v, best));
}

// int_0^inf exp(phi(log t)) dt; the core [e^-span, e^span] must hold every bend of phi so
// that only power-law tails are left to the decade walk
template <class Phi>
double log_integral(Phi&& phi, bool linear_profile, double span = 28.0) {
  if (linear_profile) {
    if (std::isinf(phi(0.0)) && phi(0.0) < 0) return 0.0;
    return kInf;  // a pure power is never integrable over (0, inf)
  }
  QuadratureOptions opt;
  opt.tol = 1e-9;
  span = std::clamp(span, 28.0, 300.0);
  opt.core_lo = std::exp(-span);
  opt.core_hi = std::exp(span);
  auto r = integrate_function([&](double t) { return std::exp(phi(std::log(t))); }, 0.0, kInf, opt);
  return r.value;
}

}  // namespace detail

// Closed or semi-closed evaluation from L = log xi, usable right up to xi -> 1 when L is
// formed as log1p(-eps).
class U1Evaluator {
 public:
  U1Evaluator(const Exponents& e, const Weight& v) : e_(e), v_(v), dens_(detail::DualDensity::classify(v, e)) {}

  bool closed() const { return dens_.closed(); }
  const Exponents& exps() const { return e_; }

  // 'which': 0 A, 1 A_star, 2 B, 3 B_minus_star, 4 B_plus_star
  double closed_value(int which, double L) const {
    if (!closed()) throw std::logic_error("no closed form for this v");
    double c = e_.lam() * e_.q, q = e_.q, pc = e_.p_conj();
    double lz = detail::log_zeta(L, c), lth = detail::log_corridor_mass(L, c);
    double lma = lth - (1 - c) * lz;  // mass of the reach interval over t^(1-c)
    bool lin = dens_.kind == detail::DualDensity::Kind::power;
    // the rational density bends over a few multiples of 1/gamma in log t, shifted by log xi
    double span = lin ? 28.0 : -L + 30.0 / dens_.gamma + 28.0;
    switch (which) {
      case 0:
        return detail::log_sup(
            [&](double s) { return (lma + (1 - c) * s) / q + dens_.log_mass(s, L, -L) / pc; }, lin);
      case 1:
        return detail::log_sup(
            [&](double s) { return (lth + (1 - c) * s) / q + dens_.log_mass(s, L + lz, -L) / pc; }, lin);
      case 2: {
        double r = require_r(e_);
        double I = detail::log_integral(
            [&](double s) {
              return (lma + (1 - c) * s) * r / e_.p + dens_.log_mass(s, L, -L) * r / pc - c * s;
            },
            lin, span);
        return std::pow(I, 1 / r);
      }
      default: {
        double r = require_r(e_), qc = require_q_conj(e_);
        bool minus = which == 3;
        double I = detail::log_integral(
            [&](double s) {
              double lv = minus ? dens_.log_mass(s, L + lz, -(L + lz)) : dens_.log_mass(s, 0.0, lz);
              return (lth + (1 - c) * s) * r / q + lv * r / qc + dens_.log_density(s);
            },
            lin, span);
        return std::pow(I, 1 / r);
      }
    }
  }

  U1Functionals closed_all(double L) const {
    U1Functionals f;
    f.A = closed_value(0, L);
    f.A_star = closed_value(1, L);
    if (e_.r()) {
      f.B = closed_value(2, L);
      if (e_.q_conj()) {
        f.B_minus_star = closed_value(3, L);
        f.B_plus_star = closed_value(4, L);
      }
    }
    return f;
  }

  U1Functionals numeric_all(double xi, const FunctionalOptions& opt) const {
    double c = e_.lam() * e_.q;
    OperatorData d(BoundaryPair::linear(xi), v_, Weight::power(1.0, -c), e_);
    auto rho = MonotoneMap::linear(zeta_factor(xi, e_.lam(), e_.q));
    U1Functionals f;
    f.A = functional_A(rho.as_inverse(), d, Variant::full, opt).value;
    f.A_star = functional_A_dual(rho, d, Variant::full, opt).value;
    if (e_.r()) {
      f.B = functional_B(rho.as_inverse(), d, Variant::full, opt).value;
      if (e_.q_conj()) {
        f.B_minus_star = functional_B_dual(rho, d, Variant::minus, opt).value;
        f.B_plus_star = functional_B_dual(rho, d, Variant::plus, opt).value;
      }
    }
    return f;
  }

  // the regime functional used by the constant bounds: A for p <= q, B for q < p
  double regime_value(double L, const FunctionalOptions& opt) const {
    if (closed()) return closed_value(e_.upper_regime() ? 0 : 2, L);
    double xi = std::exp(L);
    if (!(xi < 1.0)) return 0.0;
    double c = e_.lam() * e_.q;
    OperatorData d(BoundaryPair::linear(xi), v_, Weight::power(1.0, -c), e_);
    auto rinv = MonotoneMap::linear(1 / zeta_factor(xi, e_.lam(), e_.q));
    return e_.upper_regime() ? functional_A(rinv, d, Variant::full, opt).value
                             : functional_B(rinv, d, Variant::full, opt).value;
  }

 private:
  Exponents e_;
  Weight v_;
  detail::DualDensity dens_;
};

inline U1Report closed_functionals_u1(const Exponents& e, const Weight& v, double xi,
                                      const FunctionalOptions& opt = {}) {
  if (!(xi > 0 && xi < 1)) throw std::invalid_argument("closed_functionals_u1 needs 0 < xi < 1");
  U1Evaluator ev(e, v);
  U1Report rep;
  rep.numeric = ev.numeric_all(xi, opt);
  if (ev.closed()) {
    rep.closed = ev.closed_all(std::log(xi));
    auto gap = [&](double a, double b) {
      if (std::isfinite(a) && std::isfinite(b) && std::max(a, b) > 0)
        rep.max_rel_gap = std::max(rep.max_rel_gap, std::abs(a - b) / std::max(a, b));
    };
    gap(rep.numeric.A, rep.closed->A);
    gap(rep.numeric.A_star, rep.closed->A_star);
    if (rep.numeric.B) gap(*rep.numeric.B, *rep.closed->B);
    if (rep.numeric.B_minus_star) {
      gap(*rep.numeric.B_minus_star, *rep.closed->B_minus_star);
      gap(*rep.numeric.B_plus_star, *rep.closed->B_plus_star);
    }
  }
  return rep;
}

// Inner integral of the rational-gamma example and its closed approximation, lambda q > 1:
//   I(xi) = int_0^inf t^{s-1} [1+(xi t)^gamma]^{-r/p'} [1+t^gamma]^{-r/p'} dt,
//   s = r(1/q - lambda) + gamma r/p'.
inline double gamma_inner_integral(const Exponents& e, double gamma, double xi) {
  double r = require_r(e), pc = e.p_conj();
  double s = r * (1 / e.q - e.lam()) + gamma * r / pc, m = r / pc;
  auto softplus = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
  QuadratureOptions opt;
  opt.tol = 1e-11;
  double lx = std::log(xi);
  return integrate_function(
             [&](double t) {
               double lt = std::log(t);
               return std::exp((s - 1) * lt - m * softplus(gamma * (lx + lt)) - m * softplus(gamma * lt));
             },
             0.0, kInf, opt)
      .value;
}

inline double gamma_inner_closed(const Exponents& e, double gamma, double xi) {
  double r = require_r(e), pc = e.p_conj();
  double s = r * (1 / e.q - e.lam()) + gamma * r / pc;
  return (1 - std::pow(xi, r * (e.lam() - 1 / e.q))) / (s * (1 - std::pow(xi, gamma * r / pc)));
}

// ---------------------------------------------------------------------------------------
// constant bounds

enum class Verdict { holds, fails, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct BoundOptions {
  int nodes = 256;            // Simpson intervals on the logit grid (even)
  double eps_min = 1e-12;     // grid spans xi and 1 - xi down to this value
  double slope_limit = 0.02;  // growth per decade of 1/(1-xi) read as divergence
  int functional = 3;         // which of the four equivalent functionals serves general u
  FunctionalOptions fopt{{0x1p-20, 0x1p20, 32}, 0.01, true, 0.01};
  GridSpec x_grid{0x1p-24, 0x1p24, 8};  // tabulation grid for non-power reduced weights
};

struct BoundTrace {
  std::vector<double> xi, one_minus_xi, lower_functional, upper_functional, lower_term, upper_density;
};

struct ConstantBounds {
  double lower = 0.0, upper = 0.0;
  bool upper_regime = true;  // p <= q
  Verdict verdict = Verdict::inconclusive;
  double lower_at_1e3 = 0.0;  // running sup up to xi = 1 - 1e-3
  double lower_at_1e6 = 0.0;  // and up to 1 - 1e-6
  double lower_growth = 1.0;  // their ratio
  double lower_slope = 0.0;   // d log(lower) / d log(1/(1-xi)) over the last decade
  double upper_coarse = 0.0;  // the upper bound on the grid with half the nodes
  BoundTrace trace;
  std::string note = "functionals stand in for the operator norms; bounds hold up to unquantified constants";
};

namespace detail {

// node k of the logit grid: s in [-S, S], xi = 1/(1+e^-s), eps = 1 - xi, all from s directly
struct LogitNode {
  double s, xi, eps, L;  // L = log xi
};
inline LogitNode logit_node(double s) {
  LogitNode n;
  n.s = s;
  n.xi = 1 / (1 + std::exp(-s));
  n.eps = 1 / (1 + std::exp(s));
  n.L = -std::log1p(std::exp(-s));
  return n;
}

// Simpson on a uniform grid of log-integrand values plus exponential tails fitted at both ends.
inline double logit_simpson(const std::vector<double>& lg, double h) {
  std::size_t n = lg.size() - 1;
  double s = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    double c = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    s += c * std::exp(lg[i]);
  }
  s *= h / 3;
  auto tail = [&](double edge, double inner, double span) {
    if (std::isinf(edge) && edge < 0) return 0.0;
    double kappa = (inner - edge) / span;  // decay rate outward
    if (!(kappa > 1e-3)) return kInf;
    return std::exp(edge) / kappa;
  };
  std::size_t m = std::max<std::size_t>(1, n / 32);
  return s + tail(lg[0], lg[m], m * h) + tail(lg[n], lg[n - m], m * h);
}

}  // namespace detail

// Lower bound sup over xi of F_W(xi) and upper bound (int_0^1 F_U(xi)^q dxi)^{1/q},
// evaluated on a logit grid so both endpoint singularities are resolved.
template <class LowerF, class UpperDensity>
ConstantBounds bound_from_profiles(LowerF&& lower_f, UpperDensity&& upper_log_density, const BoundOptions& opt,
                                   double q, bool upper_regime) {
  ConstantBounds cb;
  cb.upper_regime = upper_regime;
  int n = std::max(4, opt.nodes + (opt.nodes % 2));
  double S = std::log(1 / opt.eps_min);
  double h = 2 * S / n;
  std::vector<double> lg(n + 1);
  bool upper_inf = false, lower_inf = false;
  double run = 0.0;
  double at3 = 0.0, at6 = 0.0, at5 = 0.0;
  for (int i = 0; i <= n; ++i) {
    auto nd = detail::logit_node(-S + i * h);
    double lo = lower_f(nd);
    double lud = upper_log_density(nd);  // log of F_U^q dxi/ds
    cb.trace.xi.push_back(nd.xi);
    cb.trace.one_minus_xi.push_back(nd.eps);
    cb.trace.lower_term.push_back(lo);
    cb.trace.upper_density.push_back(std::exp(lud));
    lg[i] = lud;
    if (std::isnan(lud) || (std::isinf(lud) && lud > 0)) upper_inf = true;
    if (std::isinf(lo) || std::isnan(lo)) lower_inf = true;
    if (lo > run) run = lo;
    if (nd.eps >= 1e-3) at3 = run;
    if (nd.eps >= 1e-5) at5 = run;
    if (nd.eps >= 1e-6) at6 = run;
  }
  cb.lower_at_1e3 = lower_inf ? kInf : at3;
  cb.lower_at_1e6 = lower_inf ? kInf : at6;
  cb.lower_growth = at3 > 0 ? at6 / at3 : 1.0;
  cb.lower_slope = at5 > 0 ? std::log10(at6 / at5) : 0.0;
  bool diverges = lower_inf || cb.lower_growth > 4 || cb.lower_slope > opt.slope_limit;
  cb.lower = diverges ? kInf : run;

  if (upper_inf) {
    cb.upper = cb.upper_coarse = kInf;
  } else {
    double I = detail::logit_simpson(lg, h);
    std::vector<double> half;
    for (int i = 0; i <= n; i += 2) half.push_back(lg[i]);
    if (half.size() % 2 == 0) half.pop_back();
    double Ic = detail::logit_simpson(half, 2 * h);
    cb.upper = std::pow(I, 1 / q);
    cb.upper_coarse = std::pow(Ic, 1 / q);
  }
  if (std::isinf(cb.lower)) cb.verdict = Verdict::fails;
  else if (std::isfinite(cb.upper)) cb.verdict = Verdict::holds;
  else cb.verdict = Verdict::inconclusive;
  return cb;
}

// ---------------------------------------------------------------------------------------
// general u: reduced weights, fairways and the four equivalent functionals

enum class ReducedWeight { W, U };

class ReducedFamily {
 public:
  struct Entry {
    Weight U = Weight::constant(0.0), W = Weight::constant(0.0);
    MonotoneMap sigma, rho_W, rho_U;
    bool has_rho_W = false, has_rho_U = false;
    double sigma_residual = 0, rho_W_residual = 0, rho_U_residual = 0;
  };

  ReducedFamily(EmbeddingProblem pb, BoundOptions opt = {}) : pb_(std::move(pb)), opt_(opt) {}

  const EmbeddingProblem& problem() const { return pb_; }

  const Entry& at(double xi) {
    auto it = cache_.find(xi);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(xi, build(xi)).first->second;
  }
  std::size_t cached() const { return cache_.size(); }

 private:
  // coefficient pair of U_xi = k_U x^e and W_xi = k_W x^e when u is a product of powers
  std::optional<std::array<double, 3>> power_reduction(double xi) const {
    double c = pb_.lq();
    const auto& u = pb_.u;
    double cu = 0, e1 = 0, e2 = 0;
    if (u.is_constant()) {
      cu = u.coef();
    } else if (u.kind() == TwoVariableWeight::Kind::product) {
      auto f = u.left().as_power(), g = u.right().as_power();
      if (u.left().is_zero() || u.right().is_zero()) return std::array<double, 3>{0.0, 0.0, -c};
      if (!f || !g) return std::nullopt;
      cu = f->first * g->first;
      e1 = f->second;
      e2 = g->second;
    } else {
      return std::nullopt;
    }
    // U_xi(x) = cu x^{e1+e2-c} (xi^e2 + xi^e1) (1-xi)^{-1-c}
    auto shape = [&](double t) { return (std::pow(t, e2) + std::pow(t, e1)) * std::exp(-(1 + c) * std::log1p(-t)); };
    double kU = cu * shape(xi), kW;
    if (e1 == 0 && e2 == 0) {
      kW = cu * 2 * std::expm1(-c * std::log1p(-xi)) / c;
    } else {
      QuadratureOptions q;
      q.tol = 1e-11;
      kW = cu * integrate_function([&](double t) { return t >= 1 ? 0.0 : shape(t); }, 0.0, xi, q).value;
    }
    return std::array<double, 3>{kU, kW, e1 + e2 - c};
  }

  Weight tabulate(double xi, bool accumulated) const {
    auto xs = opt_.x_grid.points();
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      ys[i] = accumulated ? accumulate_W(pb_, xi, xs[i], 1e-9).value : reduce_U(pb_, xi, xs[i]);
    return Weight::table(xs, ys);
  }

  Entry build(double xi) const {
    Entry e;
    auto pair = BoundaryPair::linear(xi);
    FairwayOptions fo;
    fo.grid = {opt_.fopt.grid.lo / 4, opt_.fopt.grid.hi * 4, 64};
    if (auto pr = power_reduction(xi)) {
      auto [kU, kW, ex] = *pr;
      e.U = Weight::power(kU, ex);
      e.W = Weight::power(kW, ex);
      if (kU > 0) {
        e.rho_U = e.rho_W = MonotoneMap::linear(power_fairway_factor(xi, ex));
        e.has_rho_U = e.has_rho_W = true;
      }
    } else {
      e.U = tabulate(xi, false);
      e.W = tabulate(xi, true);
      auto ru = solve_rho(e.U, pair, fo);
      auto rw = solve_rho(e.W, pair, fo);
      e.rho_U = ru.map;
      e.rho_W = rw.map;
      e.rho_U_residual = ru.max_residual;
      e.rho_W_residual = rw.max_residual;
      e.has_rho_U = e.has_rho_W = true;
    }
    auto dens = detail::DualDensity::classify(pb_.v, pb_.exps);
    if (dens.kind == detail::DualDensity::Kind::power) {
      double b = dens.beta;
      double f = std::abs(b) < 1e-14 ? std::sqrt(xi) : std::pow(0.5 * (1 + std::pow(xi, b)), 1 / b);
      e.sigma = MonotoneMap::linear(f);
    } else {
      auto s = solve_sigma(pb_.v, pb_.exps, pair, fo);
      e.sigma = s.map;
      e.sigma_residual = s.max_residual;
    }
    return e;
  }

  EmbeddingProblem pb_;
  BoundOptions opt_;
  std::map<double, Entry> cache_;
};

// functional i (1..4) of the equivalent four for the operator with boundaries xi x and x and
// output weight W_xi or U_xi; the dual fairway is the one of the chosen weight
inline FunctionalReport family_functional(ReducedFamily& fam, int i, double xi, ReducedWeight which,
                                          const FunctionalOptions& opt = {}) {
  if (i < 1 || i > 4) throw std::invalid_argument("functional index must be 1..4");
  const auto& pb = fam.problem();
  const auto& en = fam.at(xi);
  const Weight& w = which == ReducedWeight::W ? en.W : en.U;
  bool upper = pb.exps.upper_regime();
  FunctionalId id = upper ? ((i == 2 || i == 4) ? FunctionalId::A_dual : FunctionalId::A)
                          : ((i == 2 || i == 4) ? FunctionalId::B_dual : FunctionalId::B);
  Variant var = (!upper && i == 4) ? Variant::sum : Variant::full;
  if (w.is_zero()) {
    FunctionalReport z;
    z.id = id;
    z.variant = var;
    z.grid = opt.grid;
    z.tol = opt.tol;
    return z;
  }
  OperatorData d(BoundaryPair::linear(xi), pb.v, w, pb.exps);
  const MonotoneMap& rho = which == ReducedWeight::W ? en.rho_W : en.rho_U;
  switch (i) {
    case 1: return upper ? functional_A(en.sigma, d, var, opt) : functional_B(en.sigma, d, var, opt);
    case 2:
      return upper ? functional_A_dual(en.sigma.as_inverse(), d, var, opt)
                   : functional_B_dual(en.sigma.as_inverse(), d, var, opt);
    case 3:
      return upper ? functional_A(rho.as_inverse(), d, var, opt) : functional_B(rho.as_inverse(), d, var, opt);
    default: return upper ? functional_A_dual(rho, d, var, opt) : functional_B_dual(rho, d, var, opt);
  }
}

// Constant bounds for the embedding. Constant u uses the reduced functional of x^{-lambda q}
// in closed form where v allows it, so xi can approach 1 to within opt.eps_min; other u go
// through the reduced family on a grid limited to [1e-6, 1 - 1e-6].
inline ConstantBounds bound_constant(const EmbeddingProblem& pb, const BoundOptions& opt = {}) {
  const auto& e = pb.exps;
  double q = e.q, c = pb.lq();
  bool upper_regime = e.upper_regime();
  if (!upper_regime) require_r(e);

  if (pb.u.is_constant()) {
    double cu = pb.u.coef();
    if (cu == 0.0) {
      auto zero = [](const detail::LogitNode&) { return 0.0; };
      auto lzero = [](const detail::LogitNode&) { return -kInf; };
      return bound_from_profiles(zero, lzero, opt, q, upper_regime);
    }
    U1Evaluator ev(e, pb.v);
    BoundOptions o = opt;
    if (!ev.closed()) o.eps_min = std::max(o.eps_min, 1e-9);
    // U_xi = 2 cu x^-c (1-xi)^{-1-c},  W_xi = 2 cu x^-c ((1-xi)^-c - 1)/c
    std::map<double, double> memo;
    auto F = [&](const detail::LogitNode& nd) {
      auto it = memo.find(nd.s);
      if (it != memo.end()) return it->second;
      double v = ev.regime_value(nd.L, o.fopt);
      memo.emplace(nd.s, v);
      return v;
    };
    auto lower = [&](const detail::LogitNode& nd) {
      double f = F(nd);
      double scale = 2 * cu * std::expm1(-c * std::log(nd.eps)) / c;
      return power_product({{f, 1.0}, {scale, 1 / q}});
    };
    auto upper = [&](const detail::LogitNode& nd) {
      double f = F(nd);
      if (f == 0.0) return -kInf;
      // F^q 2 cu eps^{-1-c} dxi/ds, dxi/ds = xi eps
      return q * std::log(f) + std::log(2 * cu) - c * std::log(nd.eps) + std::log(nd.xi);
    };
    return bound_from_profiles(lower, upper, o, q, upper_regime);
  }

  BoundOptions o = opt;
  o.eps_min = std::max(o.eps_min, 1e-6);
  ReducedFamily fam(pb, o);
  auto lower = [&](const detail::LogitNode& nd) {
    auto r = family_functional(fam, o.functional, nd.xi, ReducedWeight::W, o.fopt);
    return r.divergent ? kInf : r.value;
  };
  auto upper = [&](const detail::LogitNode& nd) {
    auto r = family_functional(fam, o.functional, nd.xi, ReducedWeight::U, o.fopt);
    if (r.divergent) return kInf;
    if (r.value == 0.0) return -kInf;
    return q * std::log(r.value) + std::log(nd.xi * nd.eps);
  };
  return bound_from_profiles(lower, upper, o, q, upper_regime);
}

// running sup of the lower bound up to xi = 1 - eps for constant u and closed-form v;
// reaches eps far below double resolution of xi
inline double lower_bound_upto(const EmbeddingProblem& pb, double eps) {
  if (!pb.u.is_constant()) throw std::invalid_argument("lower_bound_upto needs a constant u");
  U1Evaluator ev(pb.exps, pb.v);
  if (!ev.closed()) throw std::invalid_argument("lower_bound_upto needs a power or rational-gamma v");
  double q = pb.exps.q, c = pb.lq(), cu = pb.u.coef();
  double best = 0;
  double smax = std::log(1 / eps);
  FunctionalOptions fo;
  for (double s = -smax; s <= smax + 1e-12; s += smax / 400) {
    auto nd = detail::logit_node(s);
    double f = ev.regime_value(nd.L, fo);
    double scale = 2 * cu * std::expm1(-c * std::log(nd.eps)) / c;
    best = std::max(best, power_product({{f, 1.0}, {scale, 1 / q}}));
  }
  return best;
}

struct PhaseRow {
  double lambda = 0;
  bool analytic = false;   // closed-form criterion
  Verdict numeric = Verdict::inconclusive;
  double lower = 0, upper = 0;
  bool evaluated = false;  // numeric bounds computed for this row
};

// Criterion table over lambda. With gamma set, v is the rational-gamma weight and the
// region is |lambda - 1/q| < gamma/p' (needs q < p); otherwise v = z^alpha with the
// alpha forced by lambda and the region is lambda < 1/p' + 1/q (needs p <= q).
inline std::vector<PhaseRow> phase_table(double p, double q, std::optional<double> gamma,
                                         const std::vector<double>& lambdas, const std::vector<bool>& evaluate,
                                         const BoundOptions& opt = {}) {
  std::vector<PhaseRow> rows;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    Exponents e(p, q, lambdas[k]);
    PhaseRow row;
    row.lambda = lambdas[k];
    Weight v = Weight::constant(1.0);
    if (gamma) {
      row.analytic = check_gamma_criterion(e, *gamma).holds;
      v = Weight::rational_gamma(*gamma, p);
    } else {
      auto pc = check_power_criterion(e);
      row.analytic = pc.holds;
      v = Weight::power(1.0, pc.alpha);
    }
    if (k < evaluate.size() && evaluate[k]) {
      auto cb = bound_constant(EmbeddingProblem(TwoVariableWeight::one(), v, e), opt);
      row.numeric = cb.verdict;
      row.lower = cb.lower;
      row.upper = cb.upper;
      row.evaluated = true;
    }
    rows.push_back(row);
  }
  return rows;
}

// lambda grid points next to each boundary of the analytic region (one on each side)
inline std::vector<bool> boundary_neighbours(const std::vector<PhaseRow>& rows) {
  std::vector<bool> pick(rows.size(), false);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    if (rows[k].analytic != rows[k + 1].analytic) pick[k] = pick[k + 1] = true;
  if (!rows.empty()) {
    // an open region touching the ends of the grid: its end points are the nearest
    if (rows.front().analytic) pick.front() = true;
    if (rows.back().analytic) pick.back() = true;
  }
  return pick;
}

}  // namespace steklov
