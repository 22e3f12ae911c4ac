#pragma once

// Balance points ("fairways") of a density between the boundary curves:
//   sigma(x) splits [a(x), b(x)] into halves of equal v^(1-p') mass,
//   rho(y)   splits [b^-1(y), a^-1(y)] into halves of equal w mass.

#include <cmath>
#include <string>
#include <vector>

#include "steklov/boundary.hpp"
#include "steklov/errors.hpp"
#include "steklov/exponents.hpp"
#include "steklov/grid.hpp"
#include "steklov/monotone_map.hpp"
#include "steklov/weight.hpp"

namespace steklov {

struct FairwayOptions {
  GridSpec grid{0x1p-20, 0x1p20, 512};
  double tol = 1e-9;  // residual relative to the total mass
  int max_iter = 200;
  QuadratureOptions quad{};
};

struct FairwaySolution {
  MonotoneMap map;
  double max_residual = 0.0;
  std::size_t pushed = 0;  // points moved onto an endpoint because one side had infinite mass
  bool converged = true;
};

struct BalancePoint {
  double point;
  double residual;
  bool pushed;
};

inline BalancePoint balance_point(const Weight& d, double lo, double hi, const FairwayOptions& opt) {
  auto mass = [&](double x0, double x1) { return integrate(d, x0, x1, opt.quad).value; };
  double total = mass(lo, hi);
  if (total == 0.0) throw FairwayUndefinedError("density has no mass on [" + std::to_string(lo) + ", " +
                                                std::to_string(hi) + "]", lo);
  if (std::isinf(total)) {
    double mid = lo > 0 ? std::sqrt(lo * hi) : 0.5 * hi;
    bool left_inf = std::isinf(mass(lo, mid)), right_inf = std::isinf(mass(mid, hi));
    if (left_inf && right_inf)
      throw FairwayUndefinedError("density has infinite mass on both sides", mid);
    // the balance point runs into the end carrying the infinite mass
    double edge = left_inf ? lo * (1 + 1e-12) : hi * (1 - 1e-12);
    return {edge, 0.0, true};
  }
  double l = std::log(lo), h = std::log(hi);
  double c = 0.5 * (l + h), f = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    c = 0.5 * (l + h);
    double x = std::exp(c);
    f = mass(lo, x) - mass(x, hi);
    if (std::abs(f) <= 1e-3 * opt.tol * total) break;
    (f > 0 ? h : l) = c;
    if (h - l <= 1e-15 * std::max(1.0, std::abs(c))) break;
  }
  return {std::exp(c), std::abs(f) / total, false};
}

namespace detail {

template <class Lo, class Hi>
FairwaySolution tabulate(const Weight& d, Lo lo_of, Hi hi_of, const FairwayOptions& opt) {
  auto xs = opt.grid.points();
  std::vector<double> ys(xs.size());
  FairwaySolution sol;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double lo = lo_of(xs[i]), hi = hi_of(xs[i]);
    auto bp = balance_point(d, lo, hi, opt);
    ys[i] = bp.point;
    sol.max_residual = std::max(sol.max_residual, bp.residual);
    sol.pushed += bp.pushed;
    if (i > 0 && !(ys[i] > ys[i - 1]))
      throw Error("fairway is not strictly increasing near x=" + std::to_string(xs[i]));
  }
  sol.converged = sol.max_residual <= opt.tol;
  sol.map = MonotoneMap::table(xs, ys);
  return sol;
}

}  // namespace detail

// sigma: v^(1-p') mass on [a(x), sigma(x)] equals that on [sigma(x), b(x)]
inline FairwaySolution solve_sigma(const Weight& v, const Exponents& e, const BoundaryPair& pair,
                                   const FairwayOptions& opt = {}) {
  Weight rho = rho_density(v, e);
  return detail::tabulate(
      rho, [&](double x) { return pair.a(x); }, [&](double x) { return pair.b(x); }, opt);
}

// rho: w mass on [b^-1(y), rho(y)] equals that on [rho(y), a^-1(y)]
inline FairwaySolution solve_rho(const Weight& w, const BoundaryPair& pair, const FairwayOptions& opt = {}) {
  return detail::tabulate(
      w, [&](double y) { return pair.b_inv(y); }, [&](double y) { return pair.a_inv(y); }, opt);
}

inline MonotoneMap as_inverse(const MonotoneMap& m) { return m.as_inverse(); }

}  // namespace steklov
