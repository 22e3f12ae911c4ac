#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "steklov/weight.hpp"

using namespace steklov;

namespace {

double numeric(const Weight& w, double lo, double hi) {
  return integrate_function([&](double x) { return w(x); }, lo, hi).value;
}

}  // namespace

TEST(Weight, PowerClosedFormMatchesQuadrature) {
  for (double e : {-2.5, -1.0, -0.4, 0.0, 0.7, 3.0}) {
    auto w = Weight::power(1.7, e);
    for (auto [lo, hi] : {std::pair{0.1, 3.0}, std::pair{1e-5, 1e4}}) {
      double c = *w.closed_integral(lo, hi);
      EXPECT_NEAR(c / numeric(w, lo, hi), 1.0, 1e-9) << e;
    }
  }
}

TEST(Weight, PowerImproperEnds) {
  auto w = Weight::power(1.0, -0.5);
  EXPECT_NEAR(integral_value(w, 0.0, 4.0), 4.0, 1e-14);
  EXPECT_TRUE(std::isinf(integral_value(w, 1.0, kInf)));
  EXPECT_NEAR(integral_value(Weight::power(1.0, -2.0), 2.0, kInf), 0.5, 1e-15);
  EXPECT_TRUE(std::isinf(integral_value(Weight::power(1.0, -1.0), 0.0, 1.0)));
}

TEST(Weight, ShortIntervalKeepsRelativeAccuracy) {
  auto w = Weight::power(1.0, -2.0);
  double lo = 1.0, hi = 1.0 + 1e-9;
  double exact = 1.0 / lo - 1.0 / hi;
  EXPECT_NEAR(integral_value(w, lo, hi) / exact, 1.0, 1e-6);
}

TEST(Weight, RationalClosedFormsMatchQuadrature) {
  for (double m : {-2.0, -1.0, 0.5, -3.5}) {
    auto w = Weight::rational(2.0, 0.75 - 1.0, 0.75, m);
    ASSERT_TRUE(w.has_closed_integral());
    for (auto [lo, hi] : {std::pair{0.01, 2.0}, std::pair{0.5, 1e3}}) {
      EXPECT_NEAR(*w.closed_integral(lo, hi) / numeric(w, lo, hi), 1.0, 1e-9) << m;
    }
  }
  auto generic = Weight::rational(1.0, 0.3, 1.5, -2.0);
  EXPECT_FALSE(generic.has_closed_integral());
  EXPECT_NEAR(integral_value(generic, 0.0, kInf), numeric(generic, 0.0, kInf), 1e-9);
}

TEST(Weight, RationalGammaFamilyDualDensity) {
  Exponents e(3.0, 2.0);
  double g = 0.75;
  auto v = Weight::rational_gamma(g, e.p);
  auto rho = rho_density(v, e);
  for (double z : {0.01, 0.3, 1.0, 7.0, 300.0}) {
    double expect = std::pow(z, g - 1) * std::pow(1 + std::pow(z, g), -2.0);
    EXPECT_NEAR(rho(z) / expect, 1.0, 1e-12);
  }
  ASSERT_TRUE(rho.has_closed_integral());
  EXPECT_NEAR(integral_value(rho, 0.0, kInf), 1.0 / g, 1e-12);
  // antiderivative -1/(gamma (1+z^gamma))
  auto F = [&](double z) { return -1.0 / (g * (1 + std::pow(z, g))); };
  EXPECT_NEAR(integral_value(rho, 0.2, 5.0), F(5.0) - F(0.2), 1e-14);
}

TEST(Weight, TableReproducesPowerLawExactly) {
  std::vector<double> xs, ys;
  for (int k = -30; k <= 30; ++k) {
    double x = std::pow(10.0, k / 10.0);
    xs.push_back(x);
    ys.push_back(3.0 * std::pow(x, -1.5));
  }
  auto t = Weight::table(xs, ys);
  auto p = Weight::power(3.0, -1.5);
  for (double x : {1e-7, 0.0123, 1.0, 45.6, 1e8}) EXPECT_NEAR(t(x) / p(x), 1.0, 1e-11);
  EXPECT_NEAR(integral_value(t, 0.05, 70.0) / integral_value(p, 0.05, 70.0), 1.0, 1e-11);
  EXPECT_NEAR(integral_value(t, 2.0, kInf) / integral_value(p, 2.0, kInf), 1.0, 1e-11);
}

TEST(Weight, TableIntegralMatchesQuadratureOfInterpolant) {
  auto t = Weight::table({0.1, 0.5, 2.0, 3.0, 10.0}, {1.0, 4.0, 0.5, 0.7, 0.2});
  for (auto [lo, hi] : {std::pair{0.2, 0.3}, std::pair{0.05, 20.0}, std::pair{1.0, 2.5}})
    EXPECT_NEAR(integral_value(t, lo, hi) / numeric(t, lo, hi), 1.0, 1e-9);
}

TEST(Weight, TableRejectsNonPositiveValues) {
  EXPECT_THROW(Weight::table({1.0, 2.0}, {1.0, 0.0}), DegenerateWeightError);
}

TEST(Weight, ProductFoldsPiecewisePowers) {
  auto t = Weight::table({0.1, 1.0, 10.0}, {2.0, 1.0, 3.0});
  auto p = Weight::power(2.0, -0.5);
  auto prod = Weight::product(t, p);
  EXPECT_TRUE(prod.has_closed_integral());
  EXPECT_NEAR(prod(3.3), t(3.3) * p(3.3), 1e-12);
  EXPECT_NEAR(integral_value(prod, 0.01, 50.0) / numeric(prod, 0.01, 50.0), 1.0, 1e-9);
  auto mixed = Weight::product(Weight::rational(1.0, 0.0, 1.0, -1.0), p);
  EXPECT_FALSE(mixed.has_closed_integral());
  EXPECT_NEAR(integral_value(mixed, 0.5, 4.0), numeric(mixed, 0.5, 4.0), 1e-12);
}

TEST(Weight, PowIsClosedAcrossKinds) {
  std::vector<Weight> ws{Weight::constant(2.0), Weight::power(0.5, 1.3), Weight::rational(1.2, 0.1, 0.8, -1.7),
                         Weight::table({0.5, 1.0, 4.0}, {1.0, 2.0, 0.5}),
                         Weight::product(Weight::rational(1.0, 0.0, 1.0, 1.0), Weight::power(1.0, 2.0))};
  for (const auto& w : ws)
    for (double s : {-1.5, 0.5, 2.0})
      for (double x : {0.3, 1.7, 9.0}) EXPECT_NEAR(w.pow(s)(x) / std::pow(w(x), s), 1.0, 1e-12);
}

TEST(Weight, VanishingVGivesInfiniteDualMass) {
  Exponents e(2.0, 2.0);
  auto rho = rho_density(Weight::constant(0.0), e);
  EXPECT_TRUE(std::isinf(integral_value(rho, 1.0, 2.0)));
  EXPECT_EQ(integral_value(Weight::constant(0.0), 0.0, kInf), 0.0);
}

TEST(Weight, IntegralIsAdditive) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Weight> ws{Weight::power(1.0, -1.3), Weight::rational_gamma(0.6, 3.0),
                         Weight::table({0.5, 1.0, 4.0}, {1.0, 2.0, 0.5})};
  for (const auto& w : ws)
    for (int i = 0; i < 20; ++i) {
      double a = std::exp(u(gen)), b = a * std::exp(std::abs(u(gen))), c = b * std::exp(std::abs(u(gen)));
      double whole = integral_value(w, a, c), parts = integral_value(w, a, b) + integral_value(w, b, c);
      EXPECT_NEAR(parts / whole, 1.0, 1e-12);
    }
}
