#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "steklov/embedding.hpp"
#include "steklov/fairway.hpp"
#include "steklov/functional.hpp"
#include "steklov/norm_probe.hpp"
#include "steklov/scenario.hpp"
#include "steklov/verification.hpp"

namespace steklov {

struct ReportRow {
  std::string scenario, task, quantity;
  double value = 0.0;
  double abs_err = 0.0;
  bool converged = true;
  double ms = 0.0;
  bool error = false;  // the task threw; quantity holds the message
};

enum class LogLevel { quiet, info, debug };

struct RunOptions {
  bool timing = false;
  std::optional<double> tol;
  std::optional<std::pair<double, double>> window;
  std::function<void(LogLevel, const std::string&)> log;
};

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

inline void emit_csv(const std::vector<ReportRow>& rows, std::ostream& os) {
  os << "scenario,task,quantity,value,abs_err,converged,ms\n";
  for (const auto& r : rows) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.0f", r.ms);
    os << csv_field(r.scenario) << ',' << r.task << ',' << csv_field(r.quantity) << ',' << csv_number(r.value) << ','
       << csv_number(r.abs_err) << ',' << (r.converged ? 1 : 0) << ',' << ms << '\n';
  }
  if (!os) throw std::runtime_error("failed writing CSV output");
}

// 0 everything finite and free of errors, 2 some value is infinite, 1 some task failed
inline int exit_code(const std::vector<ReportRow>& rows) {
  bool divergent = false;
  for (const auto& r : rows) {
    if (r.error) return 1;
    divergent = divergent || std::isinf(r.value);
  }
  return divergent ? 2 : 0;
}

namespace report_detail {

struct Sink {
  std::vector<ReportRow>& rows;
  const std::string& scenario;
  std::string task;
  void add(std::string quantity, double value, double abs_err = 0.0, bool converged = true) {
    rows.push_back({scenario, task, std::move(quantity), value, abs_err, converged, 0.0, false});
  }
};

inline double flag(bool b) { return b ? 1.0 : 0.0; }

inline double verdict_code(Verdict v) {
  switch (v) {
    case Verdict::holds: return 1.0;
    case Verdict::fails: return 0.0;
    default: return -1.0;
  }
}

inline void fairway_task(const Scenario& sc, Sink& out) {
  Exponents e(*sc.p, sc.q.value_or(*sc.p));
  auto pair = to_pair(*sc.pair);
  FairwayOptions fo;
  fo.grid = sc.grid;
  auto v = to_weight(*sc.v, *sc.p), w = to_weight(*sc.w, *sc.p);
  auto sig = solve_sigma(v, e, pair, fo);
  out.add("sigma(1)", sig.map(1.0), sig.max_residual, sig.converged);
  out.add("sigma.max_residual", sig.max_residual, 0.0, sig.converged);
  out.add("sigma.pushed_points", static_cast<double>(sig.pushed));
  auto rho = solve_rho(w, pair, fo);
  out.add("rho(1)", rho.map(1.0), rho.max_residual, rho.converged);
  out.add("rho.max_residual", rho.max_residual, 0.0, rho.converged);
  out.add("rho.pushed_points", static_cast<double>(rho.pushed));
}

inline void functionals_task(const Scenario& sc, Sink& out) {
  auto e = sc.exponents();
  auto pair = to_pair(*sc.pair);
  auto v = to_weight(*sc.v, e.p), w = to_weight(*sc.w, e.p);
  OperatorData d(pair, v, w, e);
  FairwayOptions wo;
  wo.grid = {sc.grid.lo / 16, sc.grid.hi * 16, std::min(sc.grid.per_decade, 64.0)};
  auto sig = solve_sigma(v, e, pair, wo).map;
  auto rho = solve_rho(w, pair, wo).map;
  FunctionalOptions fo;
  fo.grid = sc.grid;
  fo.tol = sc.tol;
  auto put = [&](const std::string& q, const FunctionalReport& r) {
    double val = r.divergent ? kInf : r.value;
    double err = r.divergent ? 0.0 : std::abs(r.value - r.coarse_value);
    out.add(q, val, err, r.converged);
  };
  if (e.upper_regime()) {
    put("A[sigma]", functional_A(sig, d, Variant::full, fo));
    put("A_dual[sigma_inv]", functional_A_dual(sig.as_inverse(), d, Variant::full, fo));
    put("A[rho_inv]", functional_A(rho.as_inverse(), d, Variant::full, fo));
    put("A_dual[rho]", functional_A_dual(rho, d, Variant::full, fo));
    put("A_doublesup", doublesup_A(d, fo));
  } else {
    put("B[sigma]", functional_B(sig, d, Variant::full, fo));
    put("B_dual[sigma_inv]", functional_B_dual(sig.as_inverse(), d, Variant::full, fo));
    put("B[rho_inv]", functional_B(rho.as_inverse(), d, Variant::full, fo));
    put("B_dual_minus[rho]", functional_B_dual(rho, d, Variant::minus, fo));
    put("B_dual_plus[rho]", functional_B_dual(rho, d, Variant::plus, fo));
    put("B_dual_sum[rho]", functional_B_dual(rho, d, Variant::sum, fo));
  }
}

inline void norm_task(const Scenario& sc, Sink& out) {
  auto e = sc.exponents();
  auto pair = to_pair(*sc.pair);
  auto v = to_weight(*sc.v, e.p), w = to_weight(*sc.w, e.p);
  NormOptions no;
  no.window_lo = sc.norm_lo;
  no.window_hi = sc.norm_hi;
  no.cells = sc.norm_cells;
  auto est = estimate_norm(pair, v, w, e, no);
  NormOptions half = no;
  half.cells = std::max<std::size_t>(2, no.cells / 2);
  auto coarse = estimate_norm(pair, v, w, e, half);
  double err = std::abs(est.lower_bound - coarse.lower_bound);
  bool conv = err <= sc.tol * std::max(est.lower_bound, 1e-300) || est.zero_objective;
  out.add("norm.lower_bound", est.lower_bound, err, conv);
  out.add("norm.iterations", static_cast<double>(est.iterations));
}

inline void embedding_task(const Scenario& sc, Sink& out) {
  auto e = sc.exponents();
  auto v = to_weight(*sc.v, e.p);
  auto u = sc.u ? to_two_variable(*sc.u, e.p) : TwoVariableWeight::one();
  EmbeddingProblem pb(u, v, e);
  BoundOptions bo;
  bo.nodes = sc.xi_nodes + sc.xi_nodes % 2;
  auto b = bound_constant(pb, bo);
  double uerr = std::isfinite(b.upper) && std::isfinite(b.upper_coarse) ? std::abs(b.upper - b.upper_coarse) : 0.0;
  bool uconv = !std::isfinite(b.upper) || uerr <= sc.tol * b.upper;
  out.add("lower_bound", b.lower, 0.0, true);
  out.add("upper_bound", b.upper, uerr, uconv);
  out.add("lower_growth", b.lower_growth);
  out.add("lower_slope", b.lower_slope);
  out.add("verdict", verdict_code(b.verdict));
  bool unit_u = !sc.u || sc.u->kind == "one";
  if (unit_u && sc.v->kind == "power" && e.p <= e.q) {
    auto pc = check_power_criterion(e);
    out.add("power_criterion.holds", flag(pc.holds));
    out.add("power_criterion.threshold", pc.threshold);
  }
  if (unit_u && sc.v->kind == "rational_gamma" && e.q < e.p) {
    auto gc = check_gamma_criterion(e, sc.v->gamma);
    out.add("gamma_criterion.holds", flag(gc.holds));
    out.add("gamma_criterion.distance", gc.distance);
    out.add("gamma_criterion.radius", gc.radius);
  }
}

inline void phase_task(const Scenario& sc, Sink& out) {
  std::vector<double> lambdas;
  int n = sc.phase_points;
  for (int k = 1; k <= n; ++k) lambdas.push_back(static_cast<double>(k) / (n + 1));
  BoundOptions bo;
  bo.nodes = sc.xi_nodes + sc.xi_nodes % 2;
  auto rows = phase_table(*sc.p, *sc.q, sc.phase_gamma, lambdas, std::vector<bool>(lambdas.size(), true), bo);
  auto near = boundary_neighbours(rows);
  for (const auto& r : rows) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "lambda=%.4f", r.lambda);
    std::string t = tag;
    bool agree = r.numeric == (r.analytic ? Verdict::holds : Verdict::fails);
    out.add(t + ".analytic", flag(r.analytic));
    out.add(t + ".numeric", verdict_code(r.numeric), 0.0, agree);
    out.add(t + ".lower_bound", r.lower);
    out.add(t + ".upper_bound", r.upper);
  }
  int mism = 0, near_mism = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    bool agree = rows[k].numeric == (rows[k].analytic ? Verdict::holds : Verdict::fails);
    mism += !agree;
    near_mism += near[k] && !agree;
  }
  out.add("mismatches", mism, 0.0, mism == 0);
  out.add("boundary_mismatches", near_mism, 0.0, near_mism == 0);
}

inline void verify_task(const Scenario& sc, Sink& out) {
  std::vector<int> ids = sc.checks;
  if (ids.empty())
    for (int k = 1; k <= 9; ++k) ids.push_back(k);
  for (int id : ids) {
    auto c = run_check(id);
    std::string pre = "check" + std::to_string(id);
    out.add(pre + ".pass", flag(c.pass), 0.0, c.pass);
    for (const auto& m : c.measures) out.add(pre + "." + m.id, m.value);
  }
}

}  // namespace report_detail

// Executes the scenario's tasks in a fixed order. A failing task leaves one error row and
// the remaining tasks still run.
inline std::vector<ReportRow> run(Scenario sc, const RunOptions& ro = {}) {
  if (ro.tol) sc.tol = *ro.tol;
  if (ro.window) {
    sc.grid.lo = sc.norm_lo = ro.window->first;
    sc.grid.hi = sc.norm_hi = ro.window->second;
  }
  auto log = [&](LogLevel l, const std::string& m) {
    if (ro.log) ro.log(l, m);
  };
  using Task = void (*)(const Scenario&, report_detail::Sink&);
  const std::pair<const char*, Task> order[] = {
      {"fairway", report_detail::fairway_task}, {"functionals", report_detail::functionals_task},
      {"norm", report_detail::norm_task},       {"embedding", report_detail::embedding_task},
      {"phase", report_detail::phase_task},     {"verify", report_detail::verify_task},
  };
  std::vector<ReportRow> rows;
  for (const auto& [name, fn] : order) {
    if (!sc.has_task(name)) continue;
    log(LogLevel::info, sc.name + ": " + name);
    std::size_t first = rows.size();
    report_detail::Sink sink{rows, sc.name, name};
    auto t0 = std::chrono::steady_clock::now();
    try {
      fn(sc, sink);
    } catch (const std::exception& ex) {
      rows.resize(first);
      rows.push_back({sc.name, name, std::string("error: ") + ex.what(), std::nan(""), std::nan(""), false, 0.0, true});
      log(LogLevel::info, sc.name + ": " + name + " failed: " + ex.what());
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    log(LogLevel::debug, sc.name + ": " + name + " took " + std::to_string(ms) + " ms");
    if (ro.timing)
      for (std::size_t i = first; i < rows.size(); ++i) rows[i].ms = ms;
  }
  return rows;
}

// Scenarios run on up to `jobs` threads; rows come back in scenario order.
inline std::vector<ReportRow> run_all(const std::vector<Scenario>& scs, const RunOptions& ro = {}, unsigned jobs = 1) {
  std::vector<std::vector<ReportRow>> parts(scs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < scs.size();) parts[i] = run(scs[i], ro);
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<ReportRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

}  // namespace steklov
