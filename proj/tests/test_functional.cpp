#include <gtest/gtest.h>

#include <cmath>

#include "steklov/fairway.hpp"
#include "steklov/functional.hpp"

using namespace steklov;

namespace {

FunctionalOptions opts(double ppd = 64) {
  FunctionalOptions o;
  o.grid = {0x1p-20, 0x1p20, ppd};
  return o;
}

// composite Simpson over s = log t on [-L, L]; the integrands below decay exponentially in s
template <class F>
double log_simpson(F f, double L = 80.0, int n = 32000) {
  double h = 2 * L / n, s = 0;
  for (int i = 0; i <= n; ++i) {
    double x = -L + i * h, t = std::exp(x);
    double c = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    s += c * f(t) * t;
  }
  return s * h / 3;
}

OperatorData halving_case() {
  return {BoundaryPair::linear(0.5), Weight::constant(1.0), Weight::power(1.0, -2.0), Exponents(2, 2)};
}

}  // namespace

TEST(Functional, SupTypeOnHalvingPair) {
  auto d = halving_case();
  auto sigma = solve_sigma(d.v, d.exps, d.pair, {{0x1p-22, 0x1p22, 64}});
  auto a = functional_A(sigma.map, d, Variant::full, opts());
  EXPECT_NEAR(a.value, 1.0 / std::sqrt(3.0), 1e-9);
  EXPECT_TRUE(a.converged);
  EXPECT_FALSE(a.divergent);
  // adjoint form with sigma^-1 and with the dual fairway 4y/3
  auto as = functional_A_dual(MonotoneMap::linear(4.0 / 3.0), d, Variant::full, opts());
  EXPECT_NEAR(as.value, 1.0 / std::sqrt(3.0), 1e-12);
  auto rho = solve_rho(d.w, d.pair, {{0x1p-22, 0x1p22, 64}});
  EXPECT_NEAR(functional_A_dual(rho.map, d, Variant::full, opts()).value, 1.0 / std::sqrt(3.0), 1e-9);
}

TEST(Functional, PlusMinusDecomposition) {
  OperatorData d{BoundaryPair::power(0.3, 1.0, 1.5), Weight::constant(1.0), Weight::power(1.0, -2.5),
                 Exponents(2, 3)};
  auto ref = MonotoneMap::power(0.6, 1.5);
  for (auto f : {&functional_A, &functional_A_dual}) {
    auto r = f == &functional_A ? ref : ref.as_inverse();
    double full = f(r, d, Variant::full, opts()).value;
    double sum = f(r, d, Variant::minus, opts()).value + f(r, d, Variant::plus, opts()).value;
    EXPECT_GE(sum, full * (1 - 1e-9));
    EXPECT_LE(sum, 2 * full * (1 + 1e-9));
  }
}

TEST(Functional, ScalingLaws) {
  Exponents e(2, 3);
  OperatorData base{BoundaryPair::linear(0.4), Weight::rational_gamma(1.0, 2.0), Weight::power(1.0, -1.5), e};
  OperatorData wc{base.pair, base.v, base.w.scaled(5.0), e};
  OperatorData vc{base.pair, base.v.scaled(5.0), base.w, e};
  auto ref = MonotoneMap::linear(0.7);
  double a = functional_A(ref, base, Variant::full, opts()).value;
  EXPECT_NEAR(functional_A(ref, wc, Variant::full, opts()).value / a, std::pow(5.0, 1 / e.q), 1e-10);
  EXPECT_NEAR(functional_A(ref, vc, Variant::full, opts()).value / a, std::pow(5.0, -1 / e.p), 1e-10);
  double ds = functional_A_dual(ref.as_inverse(), base, Variant::full, opts()).value;
  EXPECT_NEAR(functional_A_dual(ref.as_inverse(), wc, Variant::full, opts()).value / ds, std::pow(5.0, 1 / e.q),
              1e-10);
  EXPECT_NEAR(doublesup_A(wc, opts(16)).value / doublesup_A(base, opts(16)).value, std::pow(5.0, 1 / e.q), 1e-10);

  Exponents lo(3, 2);
  OperatorData b0{BoundaryPair::linear(0.4), Weight::rational_gamma(0.75, 3.0), Weight::power(1.0, -1.2), lo};
  OperatorData bw{b0.pair, b0.v, b0.w.scaled(5.0), lo};
  OperatorData bv{b0.pair, b0.v.scaled(5.0), b0.w, lo};
  double b = functional_B(ref, b0, Variant::full, opts()).value;
  EXPECT_NEAR(functional_B(ref, bw, Variant::full, opts()).value / b, std::pow(5.0, 1 / lo.q), 1e-10);
  EXPECT_NEAR(functional_B(ref, bv, Variant::full, opts()).value / b, std::pow(5.0, -1 / lo.p), 1e-10);
  double bd = functional_B_dual(ref.as_inverse(), b0, Variant::plus, opts()).value;
  EXPECT_NEAR(functional_B_dual(ref.as_inverse(), bw, Variant::plus, opts()).value / bd, std::pow(5.0, 1 / lo.q),
              1e-10);
}

TEST(Functional, SupIsMonotoneUnderNestedRefinement) {
  OperatorData d{BoundaryPair::linear(0.5), Weight::rational_gamma(1.0, 2.0), Weight::power(1.0, -1.0),
                 Exponents(2, 2)};
  auto ref = MonotoneMap::linear(0.75);
  auto o = opts(8);
  o.golden = false;
  double prev = 0;
  for (double ppd : {8.0, 16.0, 32.0, 64.0}) {
    o.grid.per_decade = ppd;
    double v = functional_A(ref, d, Variant::full, o).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
  auto refined = functional_A(ref, d, Variant::full, opts(8));
  o.grid.per_decade = 8;
  EXPECT_GE(refined.value, functional_A(ref, d, Variant::full, o).value);
}

TEST(Functional, VanishingWeightsGiveZero) {
  Exponents up(2, 2), lo(3, 2);
  auto pair = BoundaryPair::linear(0.5);
  auto ref = MonotoneMap::linear(0.75);
  OperatorData a{pair, Weight::constant(1.0), Weight::constant(0.0), up};
  EXPECT_EQ(functional_A(ref, a, Variant::full, opts(16)).value, 0.0);
  EXPECT_EQ(functional_A_dual(ref.as_inverse(), a, Variant::full, opts(16)).value, 0.0);
  EXPECT_EQ(doublesup_A(a, opts(16)).value, 0.0);
  OperatorData b{pair, Weight::constant(1.0), Weight::constant(0.0), lo};
  EXPECT_EQ(functional_B(ref, b, Variant::full, opts(16)).value, 0.0);
  // v = inf makes the dual density vanish
  OperatorData c{pair, Weight::constant(kInf), Weight::power(1.0, -1.0), lo};
  EXPECT_EQ(functional_B_dual(ref.as_inverse(), c, Variant::plus, opts(16)).value, 0.0);
}

TEST(Functional, DoubleSupremumBruteForce) {
  auto d = halving_case();
  // s = u t: (1/s - 1/t)(s - t/2) = 3/2 - u - 1/(2u), u in [1/2, 1]
  double best = 0;
  for (int i = 0; i <= 200000; ++i) {
    double u = 0.5 + 0.5 * i / 200000.0;
    best = std::max(best, std::sqrt(1.5 - u - 0.5 / u));
  }
  auto r = doublesup_A(d, opts(16));
  EXPECT_NEAR(r.value, best, 1e-9);
  EXPECT_NEAR(r.value, 1.0 - 1.0 / std::sqrt(2.0), 1e-9);
  double ratio = functional_A(MonotoneMap::linear(0.75), d, Variant::full, opts(16)).value / r.value;
  EXPECT_GT(ratio, 1.0 / 8);
  EXPECT_LT(ratio, 8.0);
}

TEST(Functional, EdgeGrowthReadsAsInfinite) {
  // unbalanced power weights: the product grows like t^(1/4)
  OperatorData d{BoundaryPair::linear(0.5), Weight::constant(1.0), Weight::power(1.0, -1.5), Exponents(2, 2)};
  auto r = functional_A(MonotoneMap::linear(0.75), d, Variant::full, opts(16));
  EXPECT_TRUE(r.divergent);
  EXPECT_TRUE(std::isinf(r.value));
}

TEST(Functional, CorridorViolationThrows) {
  auto d = halving_case();
  EXPECT_THROW(functional_A(MonotoneMap::linear(1.2), d, Variant::full, opts(8)), CorridorError);
  EXPECT_THROW(functional_A_dual(MonotoneMap::linear(0.9), d, Variant::full, opts(8)), CorridorError);
}

// Power-law v with the balancing exponent on a = xi x, b = x, w = x^(-lambda q), split by the
// inverse dual fairway y / zeta. The exact value carries a factor 2^(1/q) relative to the
// normalised display form.
TEST(Functional, PowerWeightClosedForm) {
  double p = 2, q = 3, lam = 0.6, xi = 0.3, c = lam * q;
  Exponents e(p, q, lam);
  double alpha = (1 / q - lam + 1) * p - 1;
  OperatorData d{BoundaryPair::linear(xi), Weight::power(1.0, alpha), Weight::power(1.0, -c), e};
  double zeta = std::pow(0.5 * (1 + std::pow(xi, c - 1)), 1 / (1 - c));
  double beta = alpha * (1 - e.p_conj());
  double phi = (1 - std::pow(xi, beta + 1)) / (beta + 1);
  double disp = std::pow((std::pow(xi, c - 1) - 1) / ((1 - c) * (1 + std::pow(xi, c - 1))), 1 / q) *
                std::pow(phi, 1 / e.p_conj());
  auto a = functional_A(MonotoneMap::linear(1 / zeta), d, Variant::full, opts(16));
  EXPECT_NEAR(a.value / (std::pow(2.0, 1 / q) * disp), 1.0, 1e-10);
  double theta = (std::pow(xi, c - 1) - 1) / (1 - c);
  double star = std::pow(theta, 1 / q) * std::pow(std::pow(zeta, beta + 1) * phi, 1 / e.p_conj());
  EXPECT_NEAR(functional_A_dual(MonotoneMap::linear(zeta), d, Variant::full, opts(16)).value / star, 1.0, 1e-10);
}

class RationalIntegralForms : public ::testing::Test {
 protected:
  double p = 3, q = 2, lam = 0.6, g = 0.75, xi = 0.5, c = lam * q;
  Exponents e{p, q, lam};
  OperatorData d{BoundaryPair::linear(xi), Weight::rational_gamma(g, p), Weight::power(1.0, -c), e};
  double zeta = std::pow(0.5 * (1 + std::pow(xi, c - 1)), 1 / (1 - c));
  double r = p * q / (p - q);
  double V(double lo, double hi) const {
    return (std::pow(hi, g) - std::pow(lo, g)) / (g * (1 + std::pow(lo, g)) * (1 + std::pow(hi, g)));
  }
};

TEST_F(RationalIntegralForms, DirectMatchesClosedForm) {
  double D = (std::pow(xi, c - 1) - 1) / ((1 - c) * (1 + std::pow(xi, c - 1)));
  double I = log_simpson([&](double t) { return std::pow(t, r / p - lam * r) * std::pow(V(xi * t, t), r / e.p_conj()); });
  double closed = std::pow(2.0, 1 / p) * std::pow(D, 1 / p) * std::pow(I, 1 / r);
  auto b = functional_B(MonotoneMap::linear(1 / zeta), d, Variant::full, opts(64));
  EXPECT_NEAR(b.value / closed, 1.0, 1e-4);
  EXPECT_TRUE(b.converged);
}

TEST_F(RationalIntegralForms, AdjointOneSidedMatchClosedForms) {
  double qc = q / (q - 1);
  double theta = (std::pow(xi, c - 1) - 1) / (1 - c);
  auto rho = [&](double t) { return std::pow(t, g - 1) / std::pow(1 + std::pow(t, g), 2); };
  double Im = log_simpson([&](double t) {
    return std::pow(t, r / q - lam * r) * std::pow(V(xi * zeta * t, t), r / qc) * rho(t);
  });
  double Ip = log_simpson([&](double t) {
    return std::pow(t, r / q - lam * r) * std::pow(V(t, zeta * t), r / qc) * rho(t);
  });
  auto star = MonotoneMap::linear(zeta);
  auto bm = functional_B_dual(star, d, Variant::minus, opts(64));
  auto bp = functional_B_dual(star, d, Variant::plus, opts(64));
  EXPECT_NEAR(bm.value / (std::pow(theta, 1 / q) * std::pow(Im, 1 / r)), 1.0, 1e-4);
  EXPECT_NEAR(bp.value / (std::pow(theta, 1 / q) * std::pow(Ip, 1 / r)), 1.0, 1e-4);
  auto sum = functional_B_dual(star, d, Variant::sum, opts(64));
  EXPECT_NEAR(sum.value, bm.value + bp.value, 1e-12 * sum.value);
  auto full = functional_B_dual(star, d, Variant::full, opts(64));
  double bound = std::pow(2.0, std::abs(1 / qc) + 1);
  EXPECT_LE(sum.value / full.value, bound);
  EXPECT_GE(sum.value / full.value, 1 / bound);
}
