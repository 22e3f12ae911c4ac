#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "steklov/norm_probe.hpp"

using namespace steklov;

namespace {

StepFunction random_step(std::mt19937_64& rng, double lo, double hi, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cuts{lo, hi};
  for (int i = 0; i < n - 1; ++i) cuts.push_back(lo + (hi - lo) * u(rng));
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> vals;
  for (int i = 0; i < n; ++i) vals.push_back(3 * u(rng));
  return StepFunction(cuts, vals);
}

// sum of value * overlap, cell by cell
double brute_integral(const StepFunction& g, double lo, double hi) {
  double s = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double l = std::max(lo, g.edges()[i]), h = std::min(hi, g.edges()[i + 1]);
    if (h > l) s += g.values()[i] * (h - l);
  }
  return s;
}

// midpoint sum of F on [lo, hi] with n points
template <class F>
double riemann(F f, double lo, double hi, int n) {
  double h = (hi - lo) / n, s = 0;
  for (int i = 0; i < n; ++i) s += f(lo + (i + 0.5) * h);
  return s * h;
}

}  // namespace

TEST(NormProbe, ApplyHOnConstant) {
  auto pair = BoundaryPair::linear(0.5);
  StepFunction one({1e-9, 1e9}, {1.0});
  for (double x : {0.01, 1.0, 37.5}) {
    EXPECT_NEAR(apply_H(one, pair, x), x / 2, 1e-12 * x);
    EXPECT_NEAR(apply_H_star(one, pair, x), x, 1e-12 * x);
  }
  StepFunction bump({1.0, 2.0}, {1.0});
  EXPECT_EQ(apply_H(bump, pair, 0.9), 0.0);
  EXPECT_EQ(apply_H(bump, pair, 4.5), 0.0);
  EXPECT_EQ(apply_H_star(bump, pair, 2.5), 0.0);
}

TEST(NormProbe, ApplyHMatchesCellSums) {
  std::mt19937_64 rng(7);
  auto pair = BoundaryPair::power(0.5, 1.0, 1.5);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = random_step(rng, 0.1, 10.0, 40);
    for (double x : {0.3, 0.9, 1.7, 3.1, 6.0}) {
      double ref = brute_integral(g, pair.a(x), pair.b(x));
      EXPECT_NEAR(apply_H(g, pair, x), ref, 1e-12 * std::max(1.0, ref));
      double refs = brute_integral(g, pair.b_inv(x), pair.a_inv(x));
      EXPECT_NEAR(apply_H_star(g, pair, x), refs, 1e-12 * std::max(1.0, refs));
    }
  }
}

TEST(NormProbe, DualityPairing) {
  std::mt19937_64 rng(11);
  auto pair = BoundaryPair::linear(0.3, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    auto g = random_step(rng, 0.2, 8.0, 25);
    auto f = random_step(rng, 0.5, 12.0, 30);
    double l = pairing_Hg_f(g, f, pair), r = pairing_g_Hstar_f(g, f, pair);
    EXPECT_NEAR(l, r, 1e-10 * std::abs(l));
    // the left side against a fine midpoint sum
    double ref = riemann([&](double x) { return apply_H(g, pair, x) * f(x); }, 0.5, 12.0, 400000);
    EXPECT_NEAR(l, ref, 1e-4 * std::abs(l));
  }
}

TEST(NormProbe, SplitsIntoBlockParts) {
  auto pair = BoundaryPair::linear(0.5);
  auto xi = xi_sequence(pair, {-30, 30});
  StepFunction one({1e-12, 1e12}, {1.0});
  for (double x : {0.3, 1.0, 1.5, 5.0, 1000.0}) {
    auto parts = decompose_TS(pair, xi, one, x);
    double lo = std::exp2(std::floor(std::log2(x)));
    EXPECT_NEAR(parts.t_part, lo - x / 2, 1e-12 * x);
    EXPECT_NEAR(parts.s_part, x - lo, 1e-12 * x);
    EXPECT_NEAR(parts.t_part + parts.s_part, x / 2, 1e-12 * x);
  }
  std::mt19937_64 rng(3);
  auto ppair = BoundaryPair::power(0.4, 1.0, 1.3);
  auto pxi = xi_sequence(ppair, {-30, 30});
  for (int rep = 0; rep < 10; ++rep) {
    auto g = random_step(rng, 0.05, 20.0, 50);
    for (double x : {0.2, 0.7, 2.2, 9.0}) {
      auto parts = decompose_TS(ppair, pxi, g, x);
      double h = apply_H(g, ppair, x);
      EXPECT_NEAR(parts.t_part + parts.s_part, h, 1e-12 * std::max(1.0, h));
    }
  }
  // g left of a(xi_{k+1}) leaves no S part
  StepFunction left({0.01, 0.6}, {2.0});
  auto parts = decompose_TS(pair, xi, left, 1.5);
  EXPECT_EQ(parts.s_part, 0.0);
  EXPECT_THROW(decompose_TS(pair, xi, one, 1e30), OutOfRangeError);
}

TEST(NormProbe, TestFunctionSingleBlock) {
  // w = 1 on the halving pair: the dual fairway is y -> 1.5 y, so a~ = 0.75 x, b~ = 1.5 x,
  // and the block [1, 4/3) is covered by one b~-step
  auto pair = BoundaryPair::linear(0.5);
  Exponents e(2.0, 0.5);
  auto tf = build_test_function_ga(pair, MonotoneMap::linear(1.5), Weight::constant(1.0), Weight::constant(1.0), e, 0);
  ASSERT_EQ(tf.blocks.size(), 1u);
  const auto& b = tf.blocks[0];
  EXPECT_NEAR(b.support.lo, 1.0, 1e-14);
  EXPECT_NEAR(b.support.hi, 4.0 / 3, 1e-14);
  double r = 2.0 / 3, qc = -1.0;
  // w over rho(piece) = [1.5, 2], rho = v^(1-p') = 1 over [1, 4/3]
  double level = std::pow(0.5, r / (2 * 0.5)) * std::pow(1.0 / 3, r / (2 * qc));
  EXPECT_NEAR(b.level, level, 1e-12 * level);
  EXPECT_NEAR(tf.g(1.1), level, 1e-12 * level);
  EXPECT_EQ(tf.g(1.5), 0.0);
  EXPECT_FALSE(tf.degenerate);

  auto zero = build_test_function_ga(pair, MonotoneMap::linear(1.5), Weight::constant(0.0), Weight::constant(1.0), e, 3);
  for (double v : zero.g.values()) EXPECT_EQ(v, 0.0);
}

TEST(NormProbe, RatioMatchesStoredMaximizer) {
  auto pair = BoundaryPair::linear(0.5);
  Exponents e(3.0, 1.5);
  auto v = Weight::power(1.0, 0.5), w = Weight::power(1.0, -2.0);
  NormOptions o;
  o.window_lo = 0x1p-8;
  o.window_hi = 0x1p8;
  o.cells = 512;
  auto est = estimate_norm(pair, v, w, e, o);
  ASSERT_GT(est.lower_bound, 0);
  EXPECT_NEAR(evaluate_ratio(est.maximizer, pair, v, w, e), est.lower_bound, 1e-10 * est.lower_bound);
  for (std::size_t i = 1; i < est.history.size(); ++i) EXPECT_GE(est.history[i], est.history[i - 1] * (1 - 1e-12));
}

TEST(NormProbe, HalvingKernelNorm) {
  // x^-1 chi(x/2 <= y <= x) is homogeneous of degree -1, so its L2 norm is int_{1/2}^1 u^{-1/2} du
  auto pair = BoundaryPair::linear(0.5);
  auto est = estimate_norm(pair, Weight::constant(1.0), Weight::power(1.0, -2.0), Exponents(2, 2));
  EXPECT_NEAR(est.lower_bound, 2 - std::sqrt(2.0), 0.01 * (2 - std::sqrt(2.0)));
  EXPECT_LE(est.lower_bound, 2 - std::sqrt(2.0) + 1e-9);
}

TEST(NormProbe, ZeroWeightGivesZero) {
  auto est = estimate_norm(BoundaryPair::linear(0.5), Weight::constant(1.0), Weight::constant(0.0), Exponents(2, 3),
                           {0x1p-4, 0x1p4, 64});
  EXPECT_EQ(est.lower_bound, 0.0);
  EXPECT_TRUE(est.zero_objective);
}

TEST(NormProbe, TestFunctionIsFeasible) {
  auto pair = BoundaryPair::linear(0.5);
  Exponents e(2.0, 0.5);
  auto v = Weight::constant(1.0), w = Weight::power(1.0, -1.5);
  NormOptions o{0x1p-10, 0x1p10, 1024};
  auto est = estimate_norm(pair, v, w, e, o);
  auto rho = solve_rho(w, pair, {{0x1p-20, 0x1p20, 64}});
  auto tf = build_test_function_ga(pair, rho.map, w, v, e, 6);
  double ratio = evaluate_ratio(tf.g, pair, v, w, e, 6);
  EXPECT_GT(ratio, 0);
  EXPECT_LE(ratio, est.lower_bound * 1.02);
}

TEST(NormProbe, DualProblemAgrees) {
  auto pair = BoundaryPair::linear(0.5);
  Exponents e(2.0, 3.0);
  auto v = Weight::constant(1.0), w = Weight::power(1.0, -2.5);
  NormOptions o{0x1p-12, 0x1p12, 1024};
  auto direct = estimate_norm(pair, v, w, e, o);
  Exponents de(*e.q_conj(), e.p_conj());
  auto dual = estimate_norm(pair.dual(), dual_weight(w, e), rho_density(v, e), de, o);
  EXPECT_NEAR(direct.lower_bound, dual.lower_bound, 0.05 * direct.lower_bound);
}

TEST(NormProbe, WindowSensitivityIsSmallForHomogeneousKernel) {
  NormOptions o{0x1p-8, 0x1p8, 512};
  auto ws = window_sensitivity(BoundaryPair::linear(0.5), Weight::constant(1.0), Weight::power(1.0, -2.0),
                               Exponents(2, 2), o);
  EXPECT_LE(ws.half.lower_bound, ws.twice.lower_bound * (1 + 1e-3));
  EXPECT_LT(ws.spread(), 0.05);
}
