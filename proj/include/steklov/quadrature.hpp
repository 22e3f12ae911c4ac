#pragma once

// Adaptive Simpson for positive-half-line integrands. Finite ranges are handled in the
// log variable; improper ends are truncated at 2^-40 / 2^40 and then extended one
// decade at a time, with a geometric extrapolation once the decade-to-decade ratios
// settle.

#include <cmath>
#include <string>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/numeric.hpp"

namespace steklov {

enum class IntegralStatus { converged, approximate, infinite };

struct IntegralValue {
  double value = 0.0;
  double abs_error = 0.0;
  long subdivisions = 0;
  IntegralStatus status = IntegralStatus::converged;

  bool is_infinite() const { return status == IntegralStatus::infinite; }
  bool converged() const { return status == IntegralStatus::converged; }

  static IntegralValue infinite() { return {kInf, 0.0, 0, IntegralStatus::infinite}; }
  static IntegralValue exact(double v) {
    return {v, 0.0, 0, std::isinf(v) ? IntegralStatus::infinite : IntegralStatus::converged};
  }
};

struct QuadratureOptions {
  double tol = 1e-10;  // relative
  int max_depth = 60;
  long max_evals = 20'000'000;
  double core_lo = 0x1p-40;
  double core_hi = 0x1p40;
  // 12 decades is too short for slowly varying tails like t^-1 (1+t^0.1)^-4, so the cap
  // sits near the end of the double range instead.
  int max_extra_decades = 240;
};

namespace detail {

struct SimpsonState {
  long evals = 0;
  long panels = 0;
  double err = 0.0;
  bool hit_depth = false;
  bool infinite = false;
};

template <class G>
double simpson_panel(G& g, double a, double b, double fa, double fm, double fb, double whole, double eps,
                     int depth, const QuadratureOptions& opt, SimpsonState& st) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = g(lm), frm = g(rm);
  st.evals += 2;
  if (std::isinf(flm) || std::isinf(frm)) {
    st.infinite = true;
    return kInf;
  }
  if (std::isnan(flm) || std::isnan(frm)) throw Error("integrand returned NaN");
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (!std::isfinite(left + right)) {  // overflow reads as divergence
    st.infinite = true;
    return kInf;
  }
  double diff = left + right - whole;
  if (std::abs(diff) <= 15.0 * eps || depth >= opt.max_depth) {
    if (depth >= opt.max_depth && std::abs(diff) > 15.0 * eps) st.hit_depth = true;
    st.err += std::abs(diff) / 15.0;
    ++st.panels;
    return left + right + diff / 15.0;
  }
  if (st.evals > opt.max_evals)
    throw ConvergenceError("quadrature budget exhausted", left + right);
  double l = simpson_panel(g, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1, opt, st);
  if (st.infinite) return kInf;
  double r = simpson_panel(g, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1, opt, st);
  return l + r;
}

// adaptive Simpson of g over [a,b] in whatever variable g is written in
template <class G>
IntegralValue simpson(G&& g, double a, double b, int panels, double tol, const QuadratureOptions& opt) {
  SimpsonState st;
  std::vector<double> xs(2 * panels + 1), fs(2 * panels + 1);
  for (int i = 0; i <= 2 * panels; ++i) {
    xs[i] = a + (b - a) * i / (2.0 * panels);
    fs[i] = g(xs[i]);
    if (std::isinf(fs[i])) return IntegralValue::infinite();
    if (std::isnan(fs[i])) throw Error("integrand returned NaN");
  }
  st.evals = 2 * panels + 1;
  double coarse = 0.0;
  std::vector<double> wholes(panels);
  for (int i = 0; i < panels; ++i) {
    wholes[i] = (xs[2 * i + 2] - xs[2 * i]) / 6.0 * (fs[2 * i] + 4.0 * fs[2 * i + 1] + fs[2 * i + 2]);
    coarse += std::abs(wholes[i]);
  }
  if (!std::isfinite(coarse)) return IntegralValue::infinite();
  double eps = tol * coarse / panels;
  if (eps == 0.0) eps = std::numeric_limits<double>::min();
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    total += simpson_panel(g, xs[2 * i], xs[2 * i + 2], fs[2 * i], fs[2 * i + 1], fs[2 * i + 2], wholes[i], eps, 0,
                           opt, st);
    if (st.infinite) return IntegralValue::infinite();
  }
  IntegralValue out{total, st.err, st.panels,
                    st.hit_depth ? IntegralStatus::approximate : IntegralStatus::converged};
  if (std::isinf(total)) out.status = IntegralStatus::infinite;
  return out;
}

// integral of f over [lo,hi] (0 < lo < hi < inf) in the log variable
template <class F>
IntegralValue log_segment(F& f, double lo, double hi, double tol, const QuadratureOptions& opt) {
  auto g = [&](double s) {
    double x = std::exp(s);
    double fx = f(x);
    return fx == 0.0 ? 0.0 : fx * x;
  };
  double a = std::log(lo), b = std::log(hi);
  int panels = static_cast<int>(std::ceil(2.0 * (b - a) / std::log(10.0)));
  panels = std::clamp(panels, 4, 400);
  return simpson(g, a, b, panels, tol, opt);
}

inline void accumulate(IntegralValue& acc, const IntegralValue& piece) {
  acc.value += piece.value;
  acc.abs_error += piece.abs_error;
  acc.subdivisions += piece.subdivisions;
  if (piece.status == IntegralStatus::approximate && acc.status == IntegralStatus::converged)
    acc.status = IntegralStatus::approximate;
}

// Extends the integral decade by decade away from `edge` (down towards 0 when
// `downward`, else up towards infinity) and returns the tail contribution.
template <class F>
IntegralValue tail(F& f, double edge, bool downward, double core_value, const QuadratureOptions& opt) {
  IntegralValue t;
  std::vector<double> pieces;
  double c = edge;
  int rising = 0;
  for (int k = 0; k < opt.max_extra_decades; ++k) {
    double nc = downward ? c / 10.0 : c * 10.0;
    if (nc == 0.0 || std::isinf(nc)) break;
    IntegralValue piece = downward ? log_segment(f, nc, c, opt.tol, opt) : log_segment(f, c, nc, opt.tol, opt);
    if (piece.is_infinite()) return IntegralValue::infinite();
    accumulate(t, piece);
    c = nc;
    pieces.push_back(std::abs(piece.value));
    double total = std::abs(core_value + t.value);
    if (!std::isfinite(total)) return IntegralValue::infinite();
    double last = pieces.back();
    if (last == 0.0) return t;
    std::size_t n = pieces.size();
    double r = n >= 2 && pieces[n - 2] > 0 ? last / pieces[n - 2] : 0.5;
    if (n >= 2 && r < 1.0 && last * std::max(1.0, 1.0 / (1.0 - r)) <= opt.tol * total) {
      double rem = last * r / (1.0 - r);
      t.value += piece.value >= 0 ? rem : -rem;
      t.abs_error += rem;
      return t;
    }
    if (n >= 2) rising = r >= 1.0 ? rising + 1 : 0;
    if (rising >= 3) return IntegralValue::infinite();
    if (n >= 4) {
      double r1 = pieces[n - 2] / pieces[n - 3], r0 = pieces[n - 3] / pieces[n - 4];
      double spread = std::max(std::abs(r - r1), std::abs(r1 - r0));
      if (r < 1.0 - 1e-6 && spread <= 1e-4 * (1.0 - r)) {
        double rem = last * r / (1.0 - r);
        t.value += piece.value >= 0 ? rem : -rem;
        double err = rem * spread / (1.0 - r) + 1e-12 * rem;
        t.abs_error += err;
        if (err > opt.tol * total) t.status = IntegralStatus::approximate;
        return t;
      }
    }
  }
  // ran out of decades: settle on the last ratio if it still decays
  std::size_t n = pieces.size();
  if (n >= 2 && pieces[n - 2] > 0 && pieces[n - 1] < pieces[n - 2]) {
    double r = pieces[n - 1] / pieces[n - 2];
    double rem = pieces[n - 1] * r / (1.0 - r);
    t.value += rem;
    t.abs_error += rem;
    t.status = IntegralStatus::approximate;
    return t;
  }
  return IntegralValue::infinite();
}

}  // namespace detail

// integral of f over [lo,hi] with 0 <= lo < hi <= inf
template <class F>
IntegralValue integrate_function(F&& f, double lo, double hi, const QuadratureOptions& opt = {}) {
  if (!(lo >= 0.0) || !(hi >= lo)) throw std::invalid_argument("integration bounds must satisfy 0 <= lo <= hi");
  if (lo == hi) return IntegralValue::exact(0.0);
  bool open_lo = lo == 0.0, open_hi = std::isinf(hi);
  double a = open_lo ? (open_hi ? opt.core_lo : std::min(opt.core_lo, hi / 1024.0)) : lo;
  double b = open_hi ? std::max(opt.core_hi, a * 1024.0) : hi;
  IntegralValue acc = detail::log_segment(f, a, b, opt.tol, opt);
  if (acc.is_infinite()) return acc;
  if (open_lo) {
    auto t = detail::tail(f, a, true, acc.value, opt);
    if (t.is_infinite()) return t;
    detail::accumulate(acc, t);
  }
  if (open_hi) {
    auto t = detail::tail(f, b, false, acc.value, opt);
    if (t.is_infinite()) return t;
    detail::accumulate(acc, t);
  }
  return acc;
}

}  // namespace steklov
