#include <gtest/gtest.h>

#include <cmath>

#include "steklov/embedding.hpp"

using namespace steklov;

namespace {

EmbeddingProblem unit_problem(double p, double q, double lam, Weight v) {
  return EmbeddingProblem(TwoVariableWeight::one(), std::move(v), Exponents(p, q, lam));
}

// composite midpoint rule on [lo, hi]
template <class F>
double midpoint(F f, double lo, double hi, int n) {
  double h = (hi - lo) / n, s = 0;
  for (int i = 0; i < n; ++i) s += f(lo + (i + 0.5) * h);
  return s * h;
}

// Simpson in log t over [-L, L]
template <class F>
double log_simpson(F f, double L = 120.0, int n = 60000) {
  double h = 2 * L / n, s = 0;
  for (int i = 0; i <= n; ++i) {
    double t = std::exp(-L + i * h);
    s += ((i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2)) * f(t) * t;
  }
  return s * h / 3;
}

}  // namespace

TEST(Embedding, ReducedWeight) {
  auto pb = unit_problem(2, 2, 0.5, Weight::constant(1.0));  // lambda q = 1
  EXPECT_NEAR(reduce_U(pb, 0.5, 1.0), 8.0, 1e-12);
  EmbeddingProblem zero(TwoVariableWeight::constant(0.0), Weight::constant(1.0), Exponents(2, 2, 0.5));
  EXPECT_EQ(reduce_U(zero, 0.3, 2.0), 0.0);
  auto f = Weight::power(2.0, 0.3), g = Weight::rational(1.0, 0.0, 1.0, -1.0);
  EmbeddingProblem a(TwoVariableWeight::product(f, g), Weight::constant(1.0), Exponents(3, 2, 0.4));
  EmbeddingProblem b(TwoVariableWeight::product(g, f), Weight::constant(1.0), Exponents(3, 2, 0.4));
  for (double x : {0.1, 1.0, 7.0})
    EXPECT_NEAR(reduce_U(a, 0.35, x), reduce_U(b, 0.35, x), 1e-13 * reduce_U(a, 0.35, x));
  EXPECT_THROW(reduce_U(pb, 1.0, 1.0), std::invalid_argument);
}

TEST(Embedding, AccumulatedWeight) {
  auto pb = unit_problem(2, 3, 0.4, Weight::constant(1.0));
  double c = 1.2;
  for (double xi : {0.1, 0.5, 0.9, 0.999})
    for (double x : {0.5, 3.0}) {
      double closed = 2 * std::pow(x, -c) * (std::pow(1 - xi, -c) - 1) / c;
      EXPECT_NEAR(accumulate_W(pb, xi, x).value, closed, 1e-9 * closed);
    }
  EXPECT_EQ(accumulate_W(pb, 0.0, 1.0).value, 0.0);
  auto f = Weight::power(1.0, 0.5), g = Weight::rational(1.0, 0.0, 2.0, -1.0);
  EmbeddingProblem gen(TwoVariableWeight::product(f, g), Weight::constant(1.0), Exponents(2, 2, 0.7));
  for (double x : {0.2, 1.0, 4.0}) {
    EXPECT_GE(accumulate_W(gen, 0.6, x).value, accumulate_W(gen, 0.3, x).value);
    double w = accumulate_W(gen, 0.6, x).value;
    double m1 = midpoint([&](double t) { return reduce_U(gen, t, x); }, 0.0, 0.6, 20000);
    double m2 = midpoint([&](double t) { return reduce_U(gen, t, x); }, 0.0, 0.6, 40000);
    EXPECT_NEAR(m1, m2, 1e-6 * w);
    EXPECT_NEAR(w, m2, 1e-6 * w);
  }
}

TEST(Embedding, ZetaFactor) {
  EXPECT_NEAR(zeta_factor(0.25, 0.5, 2.0), 2.0, 1e-14);
  EXPECT_NEAR(zeta_factor(0.25, 0.75, 2.0), 16.0 / 9, 1e-14);
  EXPECT_NEAR(zeta_factor(1 - 1e-12, 0.6, 2.0), 1.0, 1e-11);
  for (double c : {0.3, 1.0, 1.7})
    for (int i = 1; i <= 1000; ++i) {
      double xi = i / 1001.0, z = zeta_factor(xi, c / 2, 2.0);
      EXPECT_GT(z, 1.0);
      EXPECT_LT(z, 1 / xi);
    }
}

TEST(Embedding, ZetaMatchesBalancedSplit) {
  FairwayOptions fo;
  fo.grid = {1e-3, 1e3, 16};
  for (double xi : {0.2, 0.7})
    for (double c : {0.5, 1.0, 1.5}) {
      auto sol = solve_rho(Weight::power(1.0, -c), BoundaryPair::linear(xi), fo);
      double z = zeta_factor(xi, c / 2, 2.0);
      for (double y : fo.grid.points()) EXPECT_NEAR(sol.map(y), z * y, 1e-8 * z * y);
    }
}

TEST(Embedding, PowerWeightClosedForm) {
  // p = q = 2, lambda = 0.75, v = z^0.5, xi = 1/4: the displayed sup-type value is sqrt(2/3)
  auto rep = closed_functionals_u1(Exponents(2, 2, 0.75), Weight::power(1.0, 0.5), 0.25);
  ASSERT_TRUE(rep.closed);
  EXPECT_NEAR(rep.closed->A / std::sqrt(2.0), std::sqrt(2.0 / 3), 1e-12);
  EXPECT_NEAR(rep.numeric.A, rep.closed->A, 1e-6 * rep.closed->A);
  EXPECT_LT(rep.max_rel_gap, 1e-6);
  // an exponent off the balance line makes the supremum infinite
  auto off = closed_functionals_u1(Exponents(2, 2, 0.75), Weight::power(1.0, 0.7), 0.25);
  EXPECT_TRUE(std::isinf(off.closed->A));
  EXPECT_TRUE(std::isinf(off.numeric.A));
}

TEST(Embedding, RationalWeightPathsAgree) {
  Exponents e(3, 2, 0.7);
  auto v = Weight::rational_gamma(1.2, 3);
  for (double xi : {0.2, 0.5, 0.8}) {
    auto rep = closed_functionals_u1(e, v, xi);
    ASSERT_TRUE(rep.closed);
    EXPECT_LT(rep.max_rel_gap, 1e-3) << xi;
  }
  // the integral-type functional against an in-test quadrature of its defining integral
  double p = 3, q = 2, lam = 0.7, g = 1.2, xi = 0.5, c = lam * q, r = 6, pc = 1.5;
  double z = zeta_factor(xi, lam, q);
  auto V = [&](double lo, double hi) {
    return (std::pow(hi, g) - std::pow(lo, g)) / (g * (1 + std::pow(lo, g)) * (1 + std::pow(hi, g)));
  };
  double I = log_simpson([&](double t) {
    double reach = (std::pow(t / z, 1 - c) - std::pow(t / (xi * z), 1 - c)) / (c - 1);
    return std::pow(reach, r / p) * std::pow(V(xi * t, t), r / pc) * std::pow(t, -c);
  });
  U1Evaluator ev(e, v);
  EXPECT_NEAR(ev.closed_value(2, std::log(xi)), std::pow(I, 1 / r), 1e-6 * std::pow(I, 1 / r));
}

TEST(Embedding, FunctionalsVanishAsCorridorCloses) {
  U1Evaluator ev(Exponents(3, 2, 0.6), Weight::rational_gamma(0.75, 3));
  double far = ev.closed_value(0, std::log(0.5));
  double near = ev.closed_value(0, std::log1p(-1e-9));
  EXPECT_LT(near, 1e-6 * far);
  EXPECT_LT(ev.closed_value(2, std::log1p(-1e-9)), 1e-6 * ev.closed_value(2, std::log(0.5)));
}

TEST(Embedding, InnerIntegralQuadrature) {
  Exponents e(3, 2, 0.7);
  double g = 1.2, r = 6, pc = 1.5, s = r * (0.5 - 0.7) + g * r / pc, m = r / pc;
  for (double xi : {0.2, 0.5, 0.8}) {
    double ref = log_simpson([&](double t) {
      return std::pow(t, s - 1) * std::pow(1 + std::pow(xi * t, g), -m) * std::pow(1 + std::pow(t, g), -m);
    });
    EXPECT_NEAR(gamma_inner_integral(e, g, xi), ref, 1e-8 * ref);
  }
}

TEST(Embedding, CriteriaFormulas) {
  EXPECT_TRUE(check_power_criterion(Exponents(2, 2, 0.6)).holds);
  auto c = check_power_criterion(Exponents(2, 4, 0.8));
  EXPECT_FALSE(c.holds);
  EXPECT_NEAR(c.threshold, 0.75, 1e-15);
  EXPECT_NEAR(check_power_criterion(Exponents(2, 2, 0.75)).alpha, 0.5, 1e-15);
  EXPECT_THROW(check_power_criterion(Exponents(3, 2, 0.5)), std::invalid_argument);
  for (double lam : {0.05, 0.5, 0.95}) EXPECT_TRUE(check_gamma_criterion(Exponents(3, 2, lam), 0.75).holds);
  EXPECT_FALSE(check_gamma_criterion(Exponents(2, 0.5, 0.5), 0.1).holds);
  EXPECT_TRUE(check_gamma_criterion(Exponents(3, 2, 0.5), 1e-6).holds);
}

TEST(Embedding, BoundsForCriticalPowerWeight) {
  // p = q with v = z^{(1-lambda)p}: finite for every lambda in (0,1)
  for (double p : {2.0, 3.0}) {
    auto cb = bound_constant(unit_problem(p, p, 0.5, Weight::power(1.0, 0.5 * p)));
    EXPECT_TRUE(std::isfinite(cb.lower));
    EXPECT_TRUE(std::isfinite(cb.upper));
    EXPECT_LE(cb.lower, cb.upper);
    EXPECT_EQ(cb.verdict, Verdict::holds);
  }
  EmbeddingProblem zero(TwoVariableWeight::constant(0.0), Weight::constant(1.0), Exponents(2, 2, 0.5));
  auto z = bound_constant(zero);
  EXPECT_EQ(z.lower, 0.0);
  EXPECT_EQ(z.upper, 0.0);
}

TEST(Embedding, LowerBoundDivergesBeyondThreshold) {
  Exponents e(2, 4, 0.9);
  auto pb = unit_problem(2, 4, 0.9, Weight::power(1.0, check_power_criterion(e).alpha));
  auto cb = bound_constant(pb);
  EXPECT_TRUE(std::isinf(cb.lower));
  EXPECT_EQ(cb.verdict, Verdict::fails);
  EXPECT_GT(lower_bound_upto(pb, 1e-40), 1e3);
  auto ok = bound_constant(unit_problem(2, 4, 0.5, Weight::power(1.0, check_power_criterion(Exponents(2, 4, 0.5)).alpha)));
  EXPECT_TRUE(std::isfinite(ok.lower));
  EXPECT_LT(ok.lower_growth, 1.0 + 1e-9);
}

TEST(Embedding, UpperBoundMonotoneInU) {
  auto v = Weight::power(1.0, 1.0);
  Exponents e(2, 2, 0.5);
  double prev = 0;
  for (double c : {0.5, 1.0, 3.0}) {
    auto cb = bound_constant(EmbeddingProblem(TwoVariableWeight::constant(c), v, e));
    EXPECT_GE(cb.upper, prev);
    prev = cb.upper;
  }
}

TEST(Embedding, FamilyFunctionalsOnUnitWeight) {
  Exponents e(2, 3, 0.5);
  double alpha = check_power_criterion(e).alpha;
  ReducedFamily fam(unit_problem(2, 3, 0.5, Weight::power(1.0, alpha)));
  FunctionalOptions fo{{0x1p-20, 0x1p20, 32}, 0.01, true, 0.01};
  U1Evaluator ev(e, Weight::power(1.0, alpha));
  for (double xi : {0.3, 0.7}) {
    auto a3 = family_functional(fam, 3, xi, ReducedWeight::U, fo);
    double expect = std::pow(2 * std::pow(1 - xi, -1 - 1.5), 1 / 3.0) * ev.closed_value(0, std::log(xi));
    EXPECT_NEAR(a3.value, expect, 1e-6 * expect);
    std::vector<double> vals;
    for (int i = 1; i <= 4; ++i) vals.push_back(family_functional(fam, i, xi, ReducedWeight::W, fo).value);
    double hi = *std::max_element(vals.begin(), vals.end()), lo = *std::min_element(vals.begin(), vals.end());
    EXPECT_LE(hi / lo, 16.0);
  }
  EXPECT_EQ(fam.cached(), 2u);
}

TEST(Embedding, FamilyFunctionalsOnProductWeight) {
  // u(x,y) = (1+x)^-1 (1+y)^-1 has no power reduction: weights are tabulated, fairways solved
  auto f = Weight::rational(1.0, 0.0, 1.0, -1.0);
  EmbeddingProblem pb(TwoVariableWeight::product(f, f), Weight::rational_gamma(1.0, 3), Exponents(3, 2, 0.6));
  BoundOptions bo;
  ReducedFamily fam(pb, bo);
  const auto& en = fam.at(0.5);
  EXPECT_LT(en.rho_U_residual, 1e-6);
  EXPECT_LT(en.rho_W_residual, 1e-6);
  EXPECT_LT(en.sigma_residual, 1e-6);
  std::vector<double> vals;
  for (int i = 1; i <= 4; ++i) vals.push_back(family_functional(fam, i, 0.5, ReducedWeight::W, bo.fopt).value);
  double hi = *std::max_element(vals.begin(), vals.end()), lo = *std::min_element(vals.begin(), vals.end());
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 16.0);
}

TEST(Embedding, TabulatedUnitWeightTracksConstantPath) {
  Exponents e(2, 2, 0.5);
  auto v = Weight::power(1.0, 1.0);
  std::vector<double> xs{1e-3, 1.0, 1e3};
  auto ones = TwoVariableWeight::table(xs, xs, std::vector<double>(9, 1.0));
  BoundOptions bo;
  bo.nodes = 24;
  bo.eps_min = 1e-6;  // same logit nodes on both paths
  auto tab = bound_constant(EmbeddingProblem(ones, v, e), bo);
  auto ref = bound_constant(EmbeddingProblem(TwoVariableWeight::one(), v, e), bo);
  EXPECT_NEAR(tab.lower, ref.lower, 1e-4 * ref.lower);
  EXPECT_NEAR(tab.upper, ref.upper, 1e-4 * ref.upper);
}

TEST(Embedding, GammaPhaseTable) {
  std::vector<double> lams;
  for (int k = 1; k <= 19; ++k) lams.push_back(0.05 * k);
  for (double g : {0.1, 0.75}) {
    auto rows = phase_table(3, 2, g, lams, {});
    for (const auto& r : rows) EXPECT_EQ(r.analytic, std::abs(r.lambda - 0.5) < g / 1.5) << r.lambda;
    auto pick = boundary_neighbours(rows);
    auto eval = phase_table(3, 2, g, lams, pick);
    for (const auto& r : eval)
      if (r.evaluated) EXPECT_EQ(r.numeric == Verdict::holds, r.analytic) << g << " " << r.lambda;
  }
}
