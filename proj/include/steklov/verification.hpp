#pragma once

// Acceptance battery: each check recomputes its target independently of the code under
// test and reports pass/fail with the measured quantities.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "steklov/embedding.hpp"
#include "steklov/fairway.hpp"
#include "steklov/functional.hpp"
#include "steklov/norm_probe.hpp"

namespace steklov {

struct Measure {
  std::string id;
  double value;
};

struct CheckResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<Measure> measures;
  std::string detail;
};

namespace verify_detail {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

inline std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

inline StepFunction random_step(std::mt19937_64& rng, double lo, double hi, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cuts{lo, hi};
  for (int i = 0; i < n - 1; ++i) cuts.push_back(lo * std::pow(hi / lo, u(rng)));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> vals;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) vals.push_back(4 * u(rng) - 1);
  return StepFunction(cuts, vals);
}

// value times overlap, summed cell by cell
inline double overlap_integral(const StepFunction& g, double lo, double hi) {
  double s = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double l = std::max(lo, g.edges()[i]), h = std::min(hi, g.edges()[i + 1]);
    if (h > l) s += g.values()[i] * (h - l);
  }
  return s;
}

}  // namespace verify_detail

// 1. v = 1, halving pair: the fairway is the midpoint 3x/4.
inline CheckResult check_midpoint_fairway() {
  CheckResult c{1, "midpoint fairway"};
  FairwayOptions fo;
  fo.grid = {1e-4, 1e4, 511.0 / 8.0};  // 512 points
  double worst = 0;
  std::size_t points = 0;
  for (double p : {1.5, 2.0, 3.0, 6.0}) {
    auto sol = solve_sigma(Weight::constant(1.0), Exponents(p, 2.0), BoundaryPair::linear(0.5), fo);
    auto xs = sol.map.abscissae(), ys = sol.map.values();
    points = xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, verify_detail::rel_err(ys[i], 0.75 * xs[i]));
  }
  c.measures = {{"grid_points", static_cast<double>(points)}, {"max_rel_err", worst}};
  c.pass = points == 512 && worst <= 1e-9;
  c.detail = "max relative error " + verify_detail::fmt("%.3g", worst) + " over " + std::to_string(points) +
             " points, target 1e-9";
  return c;
}

// 2. w = x^-c on a = xi x, b = x: the dual fairway is zeta(xi) y.
inline CheckResult check_dual_fairway() {
  CheckResult c{2, "dual fairway closed form"};
  FairwayOptions fo;
  fo.grid = {0x1p-12, 0x1p12, 32};
  double worst = 0;
  for (double lq : {0.5, 1.0, 1.5})
    for (int k = 1; k <= 9; ++k) {
      double xi = 0.1 * k;
      // int_y^{zy} t^-c = int_{zy}^{y/xi} t^-c
      double zeta = lq == 1.0 ? 1 / std::sqrt(xi) : std::pow((1 + std::pow(xi, lq - 1)) / 2, 1 / (1 - lq));
      auto sol = solve_rho(Weight::power(1.0, -lq), BoundaryPair::linear(xi), fo);
      auto ys = sol.map.abscissae(), vals = sol.map.values();
      for (std::size_t i = 0; i < ys.size(); ++i) worst = std::max(worst, verify_detail::rel_err(vals[i], zeta * ys[i]));
    }
  c.measures = {{"max_rel_err", worst}};
  c.pass = worst <= 1e-6;
  c.detail = "max relative error " + verify_detail::fmt("%.3g", worst) + " over 27 cases, target 1e-6";
  return c;
}

// 3. p = q = 2, v = 1, w = x^-2 on the halving pair: the norm is 2 - sqrt 2.
inline CheckResult check_exact_norm() {
  CheckResult c{3, "exact norm oracle"};
  // Mellin symbol of the degree -1 kernel 1{x/2 < y < x}/x at the L2 critical line:
  // int_{1/2}^1 t^{-1/2} dt = 2 - sqrt 2
  double oracle = 2 * (1 - std::sqrt(0.5));
  NormOptions no;
  no.window_lo = 0x1p-20;
  no.window_hi = 0x1p20;
  no.cells = 4096;
  auto est = estimate_norm(BoundaryPair::linear(0.5), Weight::constant(1.0), Weight::power(1.0, -2.0),
                           Exponents(2, 2), no);
  double err = verify_detail::rel_err(est.lower_bound, oracle);
  c.measures = {{"estimate", est.lower_bound}, {"oracle", oracle}, {"rel_err", err}};
  c.pass = err <= 0.01;
  c.detail = "estimate " + verify_detail::fmt("%.7f", est.lower_bound) + " against " +
             verify_detail::fmt("%.7f", oracle) + " (" + est.method + ")";
  return c;
}

struct SuiteCase {
  std::string name;
  BoundaryPair pair;
  Weight v, w;
  Exponents e;
};

// power and rational-gamma weights, linear and power pairs, both regimes including q < 1
inline std::vector<SuiteCase> equivalence_suite() {
  auto rg = [](double g, double p) { return Weight::rational_gamma(g, p); };
  auto pw = [](double e) { return Weight::power(1.0, e); };
  auto lin = [](double xi) { return BoundaryPair::linear(xi); };
  return {
      {"halving", lin(0.5), Weight::constant(1), pw(-2), Exponents(2, 2)},
      {"halving_q3", lin(0.5), Weight::constant(1), pw(-2.5), Exponents(2, 3)},
      {"quarter_v_linear", lin(0.25), pw(1), pw(-2), Exponents(3, 3)},
      {"p2_q4", lin(0.3), pw(0.3), pw(-2.4), Exponents(2, 4)},
      {"power_pair", BoundaryPair::power(0.5, 1, 2), Weight::constant(1), pw(-3), Exponents(2, 2)},
      {"gamma_upper", lin(0.5), rg(1, 2), pw(-1), Exponents(2, 2)},
      {"gamma_lower", lin(0.5), rg(0.75, 3), pw(-1), Exponents(3, 2)},
      {"gamma_lower_2", lin(0.5), rg(1.2, 3), pw(-1.4), Exponents(3, 2)},
      {"q_half", lin(0.5), rg(3, 2), pw(-0.4), Exponents(2, 0.5)},
      {"q_below_one_power_pair", BoundaryPair::power(0.5, 1, 1.5), rg(1.5, 3), pw(-0.675), Exponents(3, 0.75)},
      {"q_above_one_power_pair", BoundaryPair::power(0.4, 1, 1.5), rg(1, 2), pw(-0.9), Exponents(2, 1.5)},
      {"wide_pair", lin(0.2), rg(2, 4), pw(-1.2), Exponents(4, 2)},
  };
}

struct SuiteRow {
  std::string name;
  std::vector<double> functionals;
  double norm = 0;
  double spread = 0;  // max/min over the functionals
  double worst = 0;   // max over functionals of max(F/norm, norm/F)
};

// the four same-regime functionals built on the fairway, its inverse and the dual fairway
inline std::vector<double> regime_functionals(const SuiteCase& s, const FunctionalOptions& fo = {}) {
  OperatorData d(s.pair, s.v, s.w, s.e);
  FairwayOptions wo;
  wo.grid = {0x1p-24, 0x1p24, 64};
  auto sig = solve_sigma(s.v, s.e, s.pair, wo).map;
  auto rho = solve_rho(s.w, s.pair, wo).map;
  auto val = [](const FunctionalReport& r) { return r.divergent ? kInf : r.value; };
  if (s.e.upper_regime())
    return {val(functional_A(sig, d, Variant::full, fo)), val(functional_A_dual(sig.as_inverse(), d, Variant::full, fo)),
            val(functional_A(rho.as_inverse(), d, Variant::full, fo)), val(functional_A_dual(rho, d, Variant::full, fo))};
  return {val(functional_B(sig, d, Variant::full, fo)), val(functional_B_dual(sig.as_inverse(), d, Variant::full, fo)),
          val(functional_B(rho.as_inverse(), d, Variant::full, fo)), val(functional_B_dual(rho, d, Variant::sum, fo))};
}

// 4. The functionals agree with each other and with the norm up to a factor 16.
inline CheckResult check_equivalence_suite(std::vector<SuiteRow>* rows_out = nullptr) {
  CheckResult c{4, "functional equivalence suite"};
  const double bound = 16;
  double worst_spread = 0, worst_norm = 0;
  bool ok = true;
  std::vector<SuiteRow> rows;
  for (const auto& s : equivalence_suite()) {
    SuiteRow row;
    row.name = s.name;
    row.functionals = regime_functionals(s);
    NormOptions no;
    no.cells = 2048;
    row.norm = estimate_norm(s.pair, s.v, s.w, s.e, no).lower_bound;
    double hi = *std::max_element(row.functionals.begin(), row.functionals.end());
    double lo = *std::min_element(row.functionals.begin(), row.functionals.end());
    row.spread = lo > 0 ? hi / lo : kInf;
    for (double f : row.functionals)
      row.worst = std::max(row.worst, (f > 0 && row.norm > 0) ? std::max(f / row.norm, row.norm / f) : kInf);
    ok = ok && std::isfinite(hi) && row.spread <= bound && row.worst <= bound;
    worst_spread = std::max(worst_spread, row.spread);
    worst_norm = std::max(worst_norm, row.worst);
    c.measures.push_back({s.name + ".spread", row.spread});
    c.measures.push_back({s.name + ".norm_ratio", row.worst});
    rows.push_back(std::move(row));
  }
  c.pass = ok;
  c.detail = "worst functional spread " + verify_detail::fmt("%.3f", worst_spread) + ", worst norm ratio " +
             verify_detail::fmt("%.3f", worst_norm) + " over " + std::to_string(rows.size()) + " scenarios, bound 16";
  if (rows_out) *rows_out = std::move(rows);
  return c;
}

// 5. H g = T g + S g at random points for random step functions.
inline CheckResult check_block_split() {
  CheckResult c{5, "block split identity"};
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const BoundaryPair pairs[] = {BoundaryPair::linear(0.5), BoundaryPair::linear(0.2),
                                BoundaryPair::power(0.4, 1.0, 1.3), BoundaryPair::power(0.5, 2.0, 0.8)};
  std::vector<PointSequence> seqs;
  for (const auto& p : pairs) seqs.push_back(xi_sequence(p, {-400, 400, 1e-30, 1e30}));
  double worst = 0;
  int evaluated = 0;
  for (int f = 0; f < 100; ++f) {
    const auto& pair = pairs[f % 4];
    auto g = verify_detail::random_step(rng, 1e-3, 1e3, 60);
    for (int k = 0; k < 100; ++k) {
      double x = 1e-2 * std::pow(1e4, u(rng));
      double h = verify_detail::overlap_integral(g, pair.a(x), pair.b(x));
      if (h == 0.0) continue;
      auto parts = decompose_TS(pair, seqs[f % 4], g, x);
      worst = std::max(worst, std::abs(parts.t_part + parts.s_part - h) / std::abs(h));
      ++evaluated;
    }
  }
  c.measures = {{"evaluations", static_cast<double>(evaluated)}, {"max_rel_err", worst}};
  c.pass = worst <= 1e-12 && evaluated > 9000;
  c.detail = "max relative defect " + verify_detail::fmt("%.3g", worst) + " over " + std::to_string(evaluated) +
             " evaluations, target 1e-12";
  return c;
}

// 6. <Hg, f> = <g, H* f>, and the adjoint problem has the same norm.
inline CheckResult check_duality() {
  CheckResult c{6, "duality"};
  std::mt19937_64 rng(77);
  const BoundaryPair pairs[] = {BoundaryPair::linear(0.5), BoundaryPair::linear(0.3, 1.0),
                                BoundaryPair::power(0.5, 1.0, 2.0)};
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const auto& pair = pairs[k % 3];
    auto g = verify_detail::random_step(rng, 0.05, 20.0, 40);
    auto f = verify_detail::random_step(rng, 0.05, 20.0, 40);
    double l = pairing_Hg_f(g, f, pair), r = pairing_g_Hstar_f(g, f, pair);
    worst = std::max(worst, std::abs(l - r) / std::max(std::abs(l), 1e-300));
  }
  c.measures.push_back({"pairing_max_rel_err", worst});
  bool ok = worst <= 1e-10;
  double worst_gap = 0;
  for (const auto& s : equivalence_suite()) {
    if (!(s.e.p == 2 && s.e.q == 2)) continue;
    NormOptions no;
    no.cells = 2048;
    double direct = estimate_norm(s.pair, s.v, s.w, s.e, no).lower_bound;
    Exponents de(require_q_conj(s.e), s.e.p_conj());
    double adj = estimate_norm(s.pair.dual(), dual_weight(s.w, s.e), rho_density(s.v, s.e), de, no).lower_bound;
    double gap = std::abs(direct - adj) / std::max(direct, adj);
    worst_gap = std::max(worst_gap, gap);
    c.measures.push_back({s.name + ".adjoint_gap", gap});
  }
  ok = ok && worst_gap <= 0.05;
  c.pass = ok;
  c.detail = "pairing defect " + verify_detail::fmt("%.3g", worst) + " (target 1e-10), adjoint norm gap " +
             verify_detail::fmt("%.4f", worst_gap) + " (target 0.05)";
  return c;
}

// 7. Inner integral of the rational-gamma example against its closed expression.
inline CheckResult check_inner_integral() {
  CheckResult c{7, "rational-gamma inner integral"};
  const double p = 3, q = 2, lam = 0.7, gamma = 1.2;
  Exponents e(p, q, lam);
  double r = p * q / (p - q), pc = p / (p - 1);
  double s = r * (1 / q - lam) + gamma * r / pc;
  double worst = 0;
  for (double xi : {0.2, 0.5, 0.8}) {
    double closed = (1 - std::pow(xi, r * (lam - 1 / q))) / (s * (1 - std::pow(xi, gamma * r / pc)));
    double quad = gamma_inner_integral(e, gamma, xi);
    double err = verify_detail::rel_err(quad, closed);
    worst = std::max(worst, err);
    c.measures.push_back({"xi=" + verify_detail::fmt("%.1f", xi) + ".quadrature", quad});
    c.measures.push_back({"xi=" + verify_detail::fmt("%.1f", xi) + ".closed", closed});
  }
  c.measures.push_back({"max_rel_err", worst});
  c.pass = worst <= 1e-3;
  c.detail = "max relative gap " + verify_detail::fmt("%.4f", worst) + ", target 1e-3";
  return c;
}

// 8. Power-weight phase: finite upper bounds below the threshold, a diverging lower bound
// above it.
inline CheckResult check_power_phase() {
  CheckResult c{8, "power-weight phase"};
  bool ok = true;
  std::string detail;
  for (double lam : {0.3, 0.6, 0.9}) {
    Exponents e(2, 2, lam);
    double alpha = (1 / e.q - lam + 1) * e.p - 1;
    EmbeddingProblem pb(TwoVariableWeight::one(), Weight::power(1.0, alpha), e);
    BoundOptions o;
    auto base = bound_constant(pb, o);
    o.nodes *= 2;
    auto fine = bound_constant(pb, o);
    double change = std::abs(fine.upper - base.upper) / base.upper;
    bool good = std::isfinite(base.upper) && std::isfinite(fine.upper) && change < 0.01;
    ok = ok && good;
    std::string tag = "p2q2.lambda=" + verify_detail::fmt("%.1f", lam);
    c.measures.push_back({tag + ".upper", base.upper});
    c.measures.push_back({tag + ".upper_refined", fine.upper});
    c.measures.push_back({tag + ".change", change});
    if (!good) detail += tag + " upper not stable; ";
  }
  for (double lam : {0.9, 0.5}) {
    Exponents e(2, 4, lam);
    double alpha = (1 / e.q - lam + 1) * e.p - 1;
    EmbeddingProblem pb(TwoVariableWeight::one(), Weight::power(1.0, alpha), e);
    auto b = bound_constant(pb);
    double growth = b.lower_at_1e6 / b.lower_at_1e3;
    std::string tag = "p2q4.lambda=" + verify_detail::fmt("%.1f", lam);
    c.measures.push_back({tag + ".lower_1e-3", b.lower_at_1e3});
    c.measures.push_back({tag + ".lower_1e-6", b.lower_at_1e6});
    c.measures.push_back({tag + ".growth", growth});
    bool good = lam > 0.75 ? growth > 4 : std::abs(growth - 1) < 0.01;
    ok = ok && good;
    if (!good) detail += tag + " lower-bound growth " + verify_detail::fmt("%.3f", growth) +
                         (lam > 0.75 ? " (needs > 4); " : " (needs < 1%); ");
  }
  c.pass = ok;
  c.detail = ok ? "upper bounds stable for p=q=2; lower bound diverges above the threshold for p=2, q=4" : detail;
  return c;
}

// 9. Rational-gamma phase table on 19 lambda values against the analytic region.
inline CheckResult check_gamma_phase() {
  CheckResult c{9, "rational-gamma phase table"};
  const double p = 3, q = 2, pc = p / (p - 1);
  std::vector<double> lambdas;
  for (int k = 1; k <= 19; ++k) lambdas.push_back(0.05 * k);
  bool ok = true;
  std::string detail;
  for (double gamma : {0.1, 0.75}) {
    auto rows = phase_table(p, q, gamma, lambdas, std::vector<bool>(lambdas.size(), true));
    auto near = boundary_neighbours(rows);
    int mismatched = 0, near_mismatched = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      bool inside = std::abs(lambdas[k] - 1 / q) < gamma / pc;
      bool table_ok = rows[k].analytic == inside;
      bool numeric_ok = rows[k].numeric == (inside ? Verdict::holds : Verdict::fails);
      if (!table_ok || !numeric_ok) ++mismatched;
      if (near[k] && !numeric_ok) ++near_mismatched;
    }
    std::string tag = "gamma=" + verify_detail::fmt("%.2f", gamma);
    c.measures.push_back({tag + ".mismatches", static_cast<double>(mismatched)});
    c.measures.push_back({tag + ".boundary_mismatches", static_cast<double>(near_mismatched)});
    ok = ok && mismatched == 0;
    if (mismatched) detail += tag + ": " + std::to_string(mismatched) + " mismatched rows; ";
  }
  c.pass = ok;
  c.detail = ok ? "numeric verdicts match the analytic region on all 19 points for both gamma" : detail;
  return c;
}

inline CheckResult run_check(int id) {
  switch (id) {
    case 1: return check_midpoint_fairway();
    case 2: return check_dual_fairway();
    case 3: return check_exact_norm();
    case 4: return check_equivalence_suite();
    case 5: return check_block_split();
    case 6: return check_duality();
    case 7: return check_inner_integral();
    case 8: return check_power_phase();
    case 9: return check_gamma_phase();
  }
  throw std::invalid_argument("no check numbered " + std::to_string(id));
}

}  // namespace steklov
