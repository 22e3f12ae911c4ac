#pragma once

// Boundedness functionals: sup-type (A family) for p <= q and integral-type (B family)
// for q < p, each in a direct and an adjoint form with left/right variants.

#include <cmath>
#include <string>
#include <vector>

#include "steklov/boundary.hpp"
#include "steklov/exponents.hpp"
#include "steklov/grid.hpp"
#include "steklov/monotone_map.hpp"
#include "steklov/numeric.hpp"
#include "steklov/weight.hpp"

namespace steklov {

// Everything the operator needs: boundary pair, weights and exponents. The dual density
// v^(1-p') is cached.
struct OperatorData {
  BoundaryPair pair;
  Weight v, w;
  Exponents exps;
  Weight rho;
  QuadratureOptions quad{};

  OperatorData(BoundaryPair pr, Weight v_, Weight w_, Exponents e, QuadratureOptions q = {})
      : pair(std::move(pr)), v(std::move(v_)), w(std::move(w_)), exps(e), rho(rho_density(v, e)), quad(q) {}

  double V(double lo, double hi) const { return hi > lo ? integrate(rho, lo, hi, quad).value : 0.0; }
  double W(double lo, double hi) const { return hi > lo ? integrate(w, lo, hi, quad).value : 0.0; }
};

enum class FunctionalId { A, A_dual, B, B_dual, A_doublesup };
enum class Variant { full, plus, minus, sum };

inline std::string functional_name(FunctionalId id, Variant var) {
  static const char* base[] = {"A", "A_dual", "B", "B_dual", "A_doublesup"};
  std::string s = base[static_cast<int>(id)];
  if (var == Variant::plus) s += "_plus";
  if (var == Variant::minus) s += "_minus";
  if (var == Variant::sum) s += "_sum";
  return s;
}

struct FunctionalReport {
  FunctionalId id = FunctionalId::A;
  Variant variant = Variant::full;
  double value = 0.0;
  double argmax_t = 0.0;  // sup-type only
  GridSpec grid{};
  double tol = 0.01;
  bool converged = true;  // value moved less than tol between the grid and its half
  bool divergent = false;
  double coarse_value = 0.0;

  std::string name() const { return functional_name(id, variant); }
};

struct FunctionalOptions {
  GridSpec grid{0x1p-20, 0x1p20, 128};
  double tol = 0.01;
  bool golden = true;
  // log-slope beyond which a supremum sitting at the grid edge is read as unbounded
  double edge_slope = 0.01;
};

namespace detail {

inline double edge_log_slope(const std::vector<double>& xs, const std::vector<double>& f, bool upper,
                             std::size_t m) {
  std::size_t n = xs.size();
  std::size_t i0 = upper ? n - 1 - m : 0, i1 = upper ? n - 1 : m;
  if (!(f[i0] > 0) || !(f[i1] > 0)) return 0.0;
  return std::log(f[i1] / f[i0]) / std::log(xs[i1] / xs[i0]);
}

template <class Term>
FunctionalReport sup_functional(FunctionalReport rep, Term&& term, const FunctionalOptions& opt) {
  auto xs = opt.grid.points();
  std::size_t n = xs.size();
  if (n < 3) throw std::invalid_argument("functional grid needs at least 3 points");
  std::vector<double> f(n);
  std::size_t best = 0;
  double coarse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = term(xs[i]);
    if (std::isnan(f[i])) throw Error("functional term is NaN at t=" + std::to_string(xs[i]));
    if (f[i] > f[best]) best = i;
    if (i % 2 == 0) coarse = std::max(coarse, f[i]);
  }
  rep.argmax_t = xs[best];
  rep.coarse_value = coarse;
  if (std::isinf(f[best])) {
    rep.value = kInf;
    rep.divergent = true;
    return rep;
  }
  std::size_t m = std::min<std::size_t>(n - 1, static_cast<std::size_t>(opt.grid.per_decade));
  if ((best == n - 1 && edge_log_slope(xs, f, true, m) > opt.edge_slope) ||
      (best == 0 && edge_log_slope(xs, f, false, m) < -opt.edge_slope)) {
    rep.value = kInf;
    rep.divergent = true;
    return rep;
  }
  double value = f[best];
  if (opt.golden && value > 0) {
    double lo = std::log(xs[best > 0 ? best - 1 : 0]), hi = std::log(xs[std::min(best + 1, n - 1)]);
    auto [s, fs] = golden_max([&](double s) { return term(std::exp(s)); }, lo, hi, 50);
    if (fs > value) {
      value = fs;
      rep.argmax_t = std::exp(s);
    }
  }
  rep.value = value;
  rep.converged = value == 0.0 || std::abs(value - coarse) <= opt.tol * value;
  return rep;
}

// int g(s) ds over a uniform grid in s = log t, Simpson with a 3/8 closing panel
inline double simpson_uniform(const std::vector<double>& g, double h) {
  std::size_t n = g.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (g[0] + g[1]);
  std::size_t intervals = n - 1, simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) s += h / 3.0 * (g[i] + 4 * g[i + 1] + g[i + 2]);
  if (simpson_end != intervals) {
    std::size_t i = simpson_end;
    s += 3.0 * h / 8.0 * (g[i] + 3 * g[i + 1] + 3 * g[i + 2] + g[i + 3]);
  }
  return s;
}

// integral of the tabulated g over s plus power-law tails; +inf if a tail fails to decay
inline double log_grid_integral(const std::vector<double>& g, double h, std::size_t m) {
  std::size_t n = g.size();
  double core = simpson_uniform(g, h);
  double total = core;
  m = std::min(m, n - 1);
  if (g[n - 1] > 0) {
    double k = g[n - 1 - m] > 0 ? std::log(g[n - 1] / g[n - 1 - m]) / (m * h) : -kInf;
    if (!(k < -1e-3)) return kInf;
    total += g[n - 1] / -k;
  }
  if (g[0] > 0) {
    double k = g[m] > 0 ? std::log(g[m] / g[0]) / (m * h) : kInf;
    if (!(k > 1e-3)) return kInf;
    total += g[0] / k;
  }
  return total;
}

template <class Term>
FunctionalReport integral_functional(FunctionalReport rep, Term&& term, double r, const FunctionalOptions& opt) {
  auto xs = opt.grid.points();
  std::size_t n = xs.size();
  if (n < 5) throw std::invalid_argument("functional grid needs at least 5 points");
  std::vector<double> g(n), gc;
  for (std::size_t i = 0; i < n; ++i) {
    double f = term(xs[i]);
    if (std::isnan(f)) throw Error("functional integrand is NaN at t=" + std::to_string(xs[i]));
    if (std::isinf(f)) {
      rep.value = kInf;
      rep.divergent = true;
      return rep;
    }
    g[i] = f * xs[i];
  }
  for (std::size_t i = 0; i < n; i += 2) gc.push_back(g[i]);
  double h = std::log(xs[1] / xs[0]);
  std::size_t m = static_cast<std::size_t>(opt.grid.per_decade);
  double fine = log_grid_integral(g, h, m), coarse = log_grid_integral(gc, 2 * h, m / 2);
  if (std::isinf(fine)) {
    rep.value = kInf;
    rep.divergent = true;
    return rep;
  }
  rep.value = xpow(fine, 1.0 / r);
  rep.coarse_value = xpow(coarse, 1.0 / r);
  rep.converged = rep.value == 0.0 || std::abs(rep.value - rep.coarse_value) <= opt.tol * rep.value;
  return rep;
}

inline Interval pick(const Interval& left, const Interval& right, Variant var) {
  if (var == Variant::minus) return left;
  if (var == Variant::plus) return right;
  return {left.lo, right.hi};
}

// span/reach split by ref(t)
struct DirectIntervals {
  Interval span, reach_left, reach_right;
};
inline DirectIntervals direct_at(const BoundaryPair& pair, const MonotoneMap& ref, double t) {
  check_corridor(pair, ref, t);
  double s = ref(t);
  return {{pair.a(t), pair.b(t)}, {pair.b_inv(s), t}, {t, pair.a_inv(s)}};
}

// preimage/dual span split by star(t), the map living in the dual corridor
struct AdjointIntervals {
  Interval preimage, dual_left, dual_right;
};
inline AdjointIntervals adjoint_at(const BoundaryPair& pair, const MonotoneMap& star, double t) {
  double s = star(t);
  if (!(pair.b_inv(t) < s && s < pair.a_inv(t)))
    throw CorridorError("map leaves the dual corridor b^-1(t) < s(t) < a^-1(t) at t=" + std::to_string(t), t);
  return {{pair.b_inv(t), pair.a_inv(t)}, {pair.a(s), t}, {t, pair.b(s)}};
}

}  // namespace detail

// sup_t W(reach)^(1/q) V(span)^(1/p'), reach restricted to one side for plus/minus
inline FunctionalReport functional_A(const MonotoneMap& ref, const OperatorData& d, Variant var = Variant::full,
                                     const FunctionalOptions& opt = {}) {
  FunctionalReport rep{FunctionalId::A, var, 0, 0, opt.grid, opt.tol};
  double iq = 1.0 / d.exps.q, ip = 1.0 / d.exps.p_conj();
  return detail::sup_functional(
      rep,
      [&](double t) {
        auto iv = detail::direct_at(d.pair, ref, t);
        Interval reach = detail::pick(iv.reach_left, iv.reach_right, var);
        return power_product({{d.W(reach.lo, reach.hi), iq}, {d.V(iv.span.lo, iv.span.hi), ip}});
      },
      opt);
}

// sup_t W(preimage)^(1/q) V(dual span)^(1/p'), `star` splitting the preimage
inline FunctionalReport functional_A_dual(const MonotoneMap& star, const OperatorData& d,
                                          Variant var = Variant::full, const FunctionalOptions& opt = {}) {
  FunctionalReport rep{FunctionalId::A_dual, var, 0, 0, opt.grid, opt.tol};
  double iq = 1.0 / d.exps.q, ip = 1.0 / d.exps.p_conj();
  return detail::sup_functional(
      rep,
      [&](double t) {
        auto iv = detail::adjoint_at(d.pair, star, t);
        Interval ds = detail::pick(iv.dual_left, iv.dual_right, var);
        return power_product({{d.W(iv.preimage.lo, iv.preimage.hi), iq}, {d.V(ds.lo, ds.hi), ip}});
      },
      opt);
}

// (int W(reach)^(r/p) V(span)^(r/p') w)^(1/r)
inline FunctionalReport functional_B(const MonotoneMap& ref, const OperatorData& d, Variant var = Variant::full,
                                     const FunctionalOptions& opt = {}) {
  double r = require_r(d.exps);
  FunctionalReport rep{FunctionalId::B, var, 0, 0, opt.grid, opt.tol};
  double ep = r / d.exps.p, epc = r / d.exps.p_conj();
  return detail::integral_functional(
      rep,
      [&](double t) {
        double wt = d.w(t);
        if (wt == 0.0) return 0.0;
        auto iv = detail::direct_at(d.pair, ref, t);
        Interval reach = detail::pick(iv.reach_left, iv.reach_right, var);
        return power_product({{d.W(reach.lo, reach.hi), ep}, {d.V(iv.span.lo, iv.span.hi), epc}, {wt, 1.0}});
      },
      r, opt);
}

// (int W(preimage)^(r/q) V(dual span)^(r/q') rho)^(1/r); `sum` adds the one-sided values
inline FunctionalReport functional_B_dual(const MonotoneMap& star, const OperatorData& d,
                                          Variant var = Variant::full, const FunctionalOptions& opt = {}) {
  double r = require_r(d.exps);
  double qc = require_q_conj(d.exps);
  if (var == Variant::sum) {
    auto lo = functional_B_dual(star, d, Variant::minus, opt);
    auto hi = functional_B_dual(star, d, Variant::plus, opt);
    FunctionalReport rep{FunctionalId::B_dual, Variant::sum, lo.value + hi.value, 0, opt.grid, opt.tol};
    rep.coarse_value = lo.coarse_value + hi.coarse_value;
    rep.converged = lo.converged && hi.converged;
    rep.divergent = lo.divergent || hi.divergent;
    return rep;
  }
  FunctionalReport rep{FunctionalId::B_dual, var, 0, 0, opt.grid, opt.tol};
  double eq = r / d.exps.q, eqc = r / qc;
  return detail::integral_functional(
      rep,
      [&](double t) {
        double rt = d.rho(t);
        if (rt == 0.0) return 0.0;
        auto iv = detail::adjoint_at(d.pair, star, t);
        Interval ds = detail::pick(iv.dual_left, iv.dual_right, var);
        return power_product({{d.W(iv.preimage.lo, iv.preimage.hi), eq}, {d.V(ds.lo, ds.hi), eqc}, {rt, 1.0}});
      },
      r, opt);
}

// sup over t and b^-1(a(t)) <= s <= t of (int_s^t w)^(1/q) (int_{a(t)}^{b(s)} rho)^(1/p');
// needs no fairway
inline FunctionalReport doublesup_A(const OperatorData& d, const FunctionalOptions& opt = {},
                                    int inner_points = 48) {
  FunctionalReport rep{FunctionalId::A_doublesup, Variant::full, 0, 0, opt.grid, opt.tol};
  double iq = 1.0 / d.exps.q, ip = 1.0 / d.exps.p_conj();
  auto inner = [&](double t) {
    double at = d.pair.a(t);
    double s0 = d.pair.b_inv(at);
    if (!(s0 < t)) return 0.0;
    auto val = [&](double ls) {
      double s = std::exp(ls);
      return power_product({{d.W(s, t), iq}, {d.V(at, d.pair.b(s)), ip}});
    };
    double l0 = std::log(s0), l1 = std::log(t), best = 0.0;
    int bi = 0;
    std::vector<double> f(inner_points + 1);
    for (int i = 0; i <= inner_points; ++i) {
      f[i] = val(l0 + (l1 - l0) * i / inner_points);
      if (f[i] > best) {
        best = f[i];
        bi = i;
      }
    }
    if (std::isinf(best) || best == 0.0) return best;
    double lo = l0 + (l1 - l0) * std::max(bi - 1, 0) / inner_points;
    double hi = l0 + (l1 - l0) * std::min(bi + 1, inner_points) / inner_points;
    return std::max(best, golden_max(val, lo, hi, 40).second);
  };
  return detail::sup_functional(rep, inner, opt);
}

}  // namespace steklov
