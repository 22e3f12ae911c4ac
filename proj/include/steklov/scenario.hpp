#pragma once

// Scenario files: flat `key = value` lines with dotted keys, `#` comments, and `---`
// between scenarios.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "steklov/boundary.hpp"
#include "steklov/embedding.hpp"
#include "steklov/errors.hpp"
#include "steklov/exponents.hpp"
#include "steklov/grid.hpp"
#include "steklov/weight.hpp"

namespace steklov {

struct WeightSpec {
  std::string kind = "constant";  // constant, power, rational, rational_gamma, table, product
  double coef = 1.0, exponent = 0.0, gamma = 1.0, m = 0.0;
  std::vector<double> xs, ys;       // table
  std::vector<WeightSpec> factors;  // product: exactly two
  bool operator==(const WeightSpec&) const = default;
};

struct TwoVariableSpec {
  std::string kind = "one";  // one, constant, product, table
  double coef = 1.0;
  std::vector<WeightSpec> factors;
  std::vector<double> xs, ys, values;
  bool operator==(const TwoVariableSpec&) const = default;
};

struct PairSpec {
  std::string kind = "linear";  // linear (a = xi x, b = x), power, table
  double xi = 0.5, a_coef = 0.5, b_coef = 1.0, exponent = 1.0;
  std::vector<double> xs, as, bs;
  bool operator==(const PairSpec&) const = default;
};

struct Scenario {
  std::string name;
  std::optional<double> p, q, lambda;
  std::optional<WeightSpec> v, w;
  std::optional<TwoVariableSpec> u;
  std::optional<PairSpec> pair;
  GridSpec grid{0x1p-20, 0x1p20, 128};
  double tol = 0.01;
  std::vector<std::string> tasks;
  std::size_t norm_cells = 4096;
  double norm_lo = 0x1p-20, norm_hi = 0x1p20;
  int xi_nodes = 256;
  std::optional<double> phase_gamma;
  int phase_points = 19;
  std::vector<int> checks;  // verify: empty means all
  bool operator==(const Scenario&) const = default;

  bool has_task(const std::string& t) const {
    for (const auto& s : tasks)
      if (s == t) return true;
    return false;
  }
  Exponents exponents() const { return Exponents(*p, *q, lambda); }
};

inline const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> t{"fairway", "functionals", "norm", "embedding", "phase", "verify"};
  return t;
}

namespace detail {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class KeyTable {
 public:
  explicit KeyTable(std::map<std::string, Entry> m, int first_line) : m_(std::move(m)), first_line_(first_line) {}

  bool has(const std::string& k) const { return m_.count(k) > 0; }
  bool has_prefix(const std::string& p) const {
    auto it = m_.lower_bound(p);
    return it != m_.end() && it->first.compare(0, p.size(), p) == 0;
  }
  const std::string* raw(const std::string& k) {
    auto it = m_.find(k);
    if (it == m_.end()) return nullptr;
    it->second.used = true;
    return &it->second.value;
  }
  int line(const std::string& k) const {
    auto it = m_.find(k);
    return it == m_.end() ? first_line_ : it->second.line;
  }
  int first_line() const { return first_line_; }

  double number(const std::string& k) {
    const std::string* s = raw(k);
    return parse_number(*s, k);
  }
  std::optional<double> opt_number(const std::string& k) {
    if (!has(k)) return std::nullopt;
    return number(k);
  }
  double number_or(const std::string& k, double d) { return has(k) ? number(k) : d; }
  std::string text_or(const std::string& k, const std::string& d) { return has(k) ? *raw(k) : d; }
  long integer(const std::string& k, long d) {
    if (!has(k)) return d;
    double x = number(k);
    if (x != std::floor(x)) throw ParseError(ParseError::Kind::bad_value, line(k), k, "expected an integer");
    return static_cast<long>(x);
  }
  std::vector<double> list(const std::string& k) {
    std::vector<double> out;
    std::string s = *raw(k);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), k));
    return out;
  }
  // "x:y, x:y" rows with `arity` fields
  std::vector<std::vector<double>> rows(const std::string& k, std::size_t arity) {
    std::vector<std::vector<double>> out;
    std::stringstream ss(*raw(k));
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::vector<double> r;
      std::stringstream is(item);
      std::string f;
      while (std::getline(is, f, ':')) r.push_back(parse_number(trim(f), k));
      if (r.size() != arity)
        throw ParseError(ParseError::Kind::bad_value, line(k), k, "expected " + std::to_string(arity) + " fields per point");
      out.push_back(std::move(r));
    }
    return out;
  }

  void check_unused() const {
    for (const auto& [k, e] : m_)
      if (!e.used) throw ParseError(ParseError::Kind::unknown_key, e.line, k, "unknown key");
  }

  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

 private:
  double parse_number(const std::string& s, const std::string& k) const {
    double x = 0;
    auto t = trim(s);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      throw ParseError(ParseError::Kind::bad_value, line(k), k, "not a number: '" + t + "'");
    return x;
  }

  std::map<std::string, Entry> m_;
  int first_line_;
};

inline WeightSpec parse_weight(KeyTable& kt, const std::string& pre) {
  WeightSpec w;
  w.kind = kt.text_or(pre + "kind", "constant");
  auto bad = [&](const std::string& k, const std::string& msg) {
    return ParseError(ParseError::Kind::out_of_range, kt.line(k), k, msg);
  };
  if (w.kind == "constant") {
    w.coef = kt.number_or(pre + "coef", 1.0);
    if (!(w.coef >= 0)) throw bad(pre + "coef", "constant weight must be >= 0");
  } else if (w.kind == "power") {
    w.coef = kt.number_or(pre + "coef", 1.0);
    w.exponent = kt.number_or(pre + "exponent", 0.0);
    if (!(w.coef >= 0)) throw bad(pre + "coef", "coefficient must be >= 0");
  } else if (w.kind == "rational") {
    w.coef = kt.number_or(pre + "coef", 1.0);
    w.exponent = kt.number_or(pre + "exponent", 0.0);
    w.gamma = kt.number_or(pre + "gamma", 1.0);
    w.m = kt.number_or(pre + "m", 0.0);
    if (!(w.gamma > 0)) throw bad(pre + "gamma", "gamma must be positive");
  } else if (w.kind == "rational_gamma") {
    w.gamma = kt.number_or(pre + "gamma", 1.0);
    if (!(w.gamma > 0)) throw bad(pre + "gamma", "gamma must be positive");
  } else if (w.kind == "table") {
    if (!kt.has(pre + "points")) throw ParseError(ParseError::Kind::missing_field, kt.first_line(), pre + "points", "table weight needs points");
    for (auto& r : kt.rows(pre + "points", 2)) {
      w.xs.push_back(r[0]);
      w.ys.push_back(r[1]);
    }
  } else if (w.kind == "product") {
    for (const char* side : {"left.", "right."}) {
      if (!kt.has_prefix(pre + side))
        throw ParseError(ParseError::Kind::missing_field, kt.first_line(), pre + side + "kind", "product needs both factors");
      w.factors.push_back(parse_weight(kt, pre + side));
    }
  } else {
    throw ParseError(ParseError::Kind::bad_value, kt.line(pre + "kind"), pre + "kind", "unknown weight kind '" + w.kind + "'");
  }
  return w;
}

inline void emit_weight(std::ostream& os, const WeightSpec& w, const std::string& pre);

}  // namespace detail

inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, x);  // shortest text that reads back exactly
  return std::string(buf, res.ptr);
}

inline Weight to_weight(const WeightSpec& s, double p) {
  if (s.kind == "constant") return Weight::constant(s.coef);
  if (s.kind == "power") return Weight::power(s.coef, s.exponent);
  if (s.kind == "rational") return Weight::rational(s.coef, s.exponent, s.gamma, s.m);
  if (s.kind == "rational_gamma") return Weight::rational_gamma(s.gamma, p);
  if (s.kind == "table") return Weight::table(s.xs, s.ys);
  if (s.kind == "product") return Weight::product(to_weight(s.factors.at(0), p), to_weight(s.factors.at(1), p));
  throw std::invalid_argument("unknown weight kind " + s.kind);
}

inline TwoVariableWeight to_two_variable(const TwoVariableSpec& s, double p) {
  if (s.kind == "one") return TwoVariableWeight::one();
  if (s.kind == "constant") return TwoVariableWeight::constant(s.coef);
  if (s.kind == "product") return TwoVariableWeight::product(to_weight(s.factors.at(0), p), to_weight(s.factors.at(1), p));
  if (s.kind == "table") return TwoVariableWeight::table(s.xs, s.ys, s.values);
  throw std::invalid_argument("unknown two-variable weight kind " + s.kind);
}

inline BoundaryPair to_pair(const PairSpec& s) {
  if (s.kind == "linear") return BoundaryPair::linear(s.xi);
  if (s.kind == "power") return BoundaryPair::power(s.a_coef, s.b_coef, s.exponent);
  if (s.kind == "table") return BoundaryPair::table(s.xs, s.as, s.bs);
  throw std::invalid_argument("unknown pair kind " + s.kind);
}

namespace detail {

inline Scenario build_scenario(KeyTable& kt, int index, const std::optional<std::string>& forced_task) {
  using K = ParseError::Kind;
  Scenario sc;
  sc.name = kt.text_or("name", "scenario" + std::to_string(index + 1));
  if (forced_task) {
    kt.text_or("task", "");
    sc.tasks = {*forced_task};
  } else {
    if (!kt.has("task")) throw ParseError(K::missing_field, kt.first_line(), "task", "no task given");
    std::stringstream ss(*kt.raw("task"));
    std::string t;
    while (std::getline(ss, t, ',')) {
      t = KeyTable::trim(t);
      bool ok = false;
      for (const auto& k : known_tasks()) ok = ok || k == t;
      if (!ok) throw ParseError(K::bad_value, kt.line("task"), "task", "unknown task '" + t + "'");
      if (!sc.has_task(t)) sc.tasks.push_back(t);
    }
  }
  sc.p = kt.opt_number("p");
  sc.q = kt.opt_number("q");
  sc.lambda = kt.opt_number("lambda");
  sc.tol = kt.number_or("tol", sc.tol);
  sc.grid.lo = kt.number_or("grid.lo", sc.grid.lo);
  sc.grid.hi = kt.number_or("grid.hi", sc.grid.hi);
  sc.grid.per_decade = kt.number_or("grid.points_per_decade", sc.grid.per_decade);
  sc.norm_cells = static_cast<std::size_t>(kt.integer("norm.cells", static_cast<long>(sc.norm_cells)));
  sc.norm_lo = kt.number_or("norm.lo", sc.norm_lo);
  sc.norm_hi = kt.number_or("norm.hi", sc.norm_hi);
  sc.xi_nodes = static_cast<int>(kt.integer("embedding.xi_nodes", sc.xi_nodes));
  sc.phase_gamma = kt.opt_number("phase.gamma");
  sc.phase_points = static_cast<int>(kt.integer("phase.lambda_points", sc.phase_points));
  if (kt.has("verify.checks"))
    for (double c : kt.list("verify.checks")) {
      if (c != std::floor(c) || c < 1 || c > 9)
        throw ParseError(K::out_of_range, kt.line("verify.checks"), "verify.checks", "checks are numbered 1..9");
      sc.checks.push_back(static_cast<int>(c));
    }

  if (kt.has_prefix("weight.v.")) sc.v = parse_weight(kt, "weight.v.");
  if (kt.has_prefix("weight.w.")) sc.w = parse_weight(kt, "weight.w.");
  if (kt.has_prefix("weight.u.")) {
    TwoVariableSpec u;
    u.kind = kt.text_or("weight.u.kind", "one");
    if (u.kind == "constant") {
      u.coef = kt.number_or("weight.u.coef", 1.0);
      if (!(u.coef >= 0)) throw ParseError(K::out_of_range, kt.line("weight.u.coef"), "weight.u.coef", "u must be >= 0");
    } else if (u.kind == "product") {
      for (const char* side : {"left.", "right."}) {
        std::string pre = std::string("weight.u.") + side;
        if (!kt.has_prefix(pre)) throw ParseError(K::missing_field, kt.first_line(), pre + "kind", "product needs both factors");
        u.factors.push_back(parse_weight(kt, pre));
      }
    } else if (u.kind == "table") {
      for (const char* f : {"weight.u.x", "weight.u.y", "weight.u.values"})
        if (!kt.has(f)) throw ParseError(K::missing_field, kt.first_line(), f, "table u needs x, y and values");
      u.xs = kt.list("weight.u.x");
      u.ys = kt.list("weight.u.y");
      u.values = kt.list("weight.u.values");
      if (u.values.size() != u.xs.size() * u.ys.size())
        throw ParseError(K::bad_value, kt.line("weight.u.values"), "weight.u.values", "need one value per (x, y) node");
    } else if (u.kind != "one") {
      throw ParseError(K::bad_value, kt.line("weight.u.kind"), "weight.u.kind", "unknown u kind '" + u.kind + "'");
    }
    sc.u = u;
  }
  if (kt.has_prefix("pair.")) {
    PairSpec pr;
    pr.kind = kt.text_or("pair.kind", "linear");
    if (pr.kind == "linear") {
      pr.xi = kt.number_or("pair.xi", pr.xi);
      if (!(pr.xi > 0 && pr.xi < 1)) throw ParseError(K::out_of_range, kt.line("pair.xi"), "pair.xi", "xi must lie in (0,1)");
    } else if (pr.kind == "power") {
      pr.a_coef = kt.number_or("pair.a_coef", pr.a_coef);
      pr.b_coef = kt.number_or("pair.b_coef", pr.b_coef);
      pr.exponent = kt.number_or("pair.exponent", pr.exponent);
      if (!(pr.a_coef > 0 && pr.a_coef < pr.b_coef))
        throw ParseError(K::out_of_range, kt.line("pair.a_coef"), "pair.a_coef", "need 0 < a_coef < b_coef");
      if (!(pr.exponent > 0)) throw ParseError(K::out_of_range, kt.line("pair.exponent"), "pair.exponent", "exponent must be positive");
    } else if (pr.kind == "table") {
      if (!kt.has("pair.points")) throw ParseError(K::missing_field, kt.first_line(), "pair.points", "table pair needs points");
      for (auto& r : kt.rows("pair.points", 3)) {
        pr.xs.push_back(r[0]);
        pr.as.push_back(r[1]);
        pr.bs.push_back(r[2]);
      }
    } else {
      throw ParseError(K::bad_value, kt.line("pair.kind"), "pair.kind", "unknown pair kind '" + pr.kind + "'");
    }
    sc.pair = pr;
  }
  kt.check_unused();

  // cross-field requirements
  auto need = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ParseError(K::missing_field, kt.first_line(), field, msg);
  };
  auto range = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ParseError(K::out_of_range, kt.line(field), field, msg);
  };
  bool analysis = false;
  for (const auto& t : sc.tasks) analysis = analysis || t != "verify";
  if (analysis) {
    need(sc.p.has_value(), "p", "p is required");
    range(*sc.p > 1 && std::isfinite(*sc.p), "p", "p must satisfy 1 < p < inf");
  }
  bool needs_q = sc.has_task("functionals") || sc.has_task("norm") || sc.has_task("embedding") || sc.has_task("phase");
  if (needs_q) {
    need(sc.q.has_value(), "q", "q is required");
    range(*sc.q > 0 && std::isfinite(*sc.q), "q", "q must be positive and finite");
  }
  if (sc.lambda) range(*sc.lambda > 0 && *sc.lambda < 1, "lambda", "lambda must lie in (0,1)");
  if (sc.has_task("embedding")) need(sc.lambda.has_value(), "lambda", "the embedding task needs lambda");
  if (sc.has_task("fairway") || sc.has_task("functionals") || sc.has_task("norm")) {
    need(sc.pair.has_value(), "pair.kind", "a boundary pair is required");
    need(sc.v.has_value(), "weight.v.kind", "weight v is required");
  }
  if (sc.has_task("functionals") || sc.has_task("norm")) need(sc.w.has_value(), "weight.w.kind", "weight w is required");
  if (sc.has_task("fairway")) need(sc.w.has_value(), "weight.w.kind", "weight w is required");
  if (sc.has_task("embedding")) need(sc.v.has_value(), "weight.v.kind", "weight v is required");
  if (sc.has_task("phase") && sc.phase_gamma)
    range(*sc.phase_gamma > 0, "phase.gamma", "gamma must be positive");
  if (sc.has_task("phase"))
    range(sc.phase_points >= 2, "phase.lambda_points", "need at least 2 lambda points");
  range(sc.grid.lo > 0 && sc.grid.hi > sc.grid.lo && sc.grid.per_decade > 0, "grid.lo", "grid needs 0 < lo < hi");
  range(sc.norm_lo > 0 && sc.norm_hi > sc.norm_lo && std::isfinite(sc.norm_hi), "norm.lo", "norm window needs 0 < lo < hi < inf");
  range(sc.norm_cells >= 2, "norm.cells", "need at least 2 cells");
  range(sc.xi_nodes >= 4, "embedding.xi_nodes", "need at least 4 xi nodes");
  range(sc.tol > 0 && sc.tol < 1, "tol", "tol must lie in (0,1)");
  return sc;
}

inline void emit_weight(std::ostream& os, const WeightSpec& w, const std::string& pre) {
  os << pre << "kind = " << w.kind << "\n";
  if (w.kind == "constant") os << pre << "coef = " << format_number(w.coef) << "\n";
  if (w.kind == "power" || w.kind == "rational") {
    os << pre << "coef = " << format_number(w.coef) << "\n";
    os << pre << "exponent = " << format_number(w.exponent) << "\n";
  }
  if (w.kind == "rational") {
    os << pre << "gamma = " << format_number(w.gamma) << "\n";
    os << pre << "m = " << format_number(w.m) << "\n";
  }
  if (w.kind == "rational_gamma") os << pre << "gamma = " << format_number(w.gamma) << "\n";
  if (w.kind == "table") {
    os << pre << "points = ";
    for (std::size_t i = 0; i < w.xs.size(); ++i)
      os << (i ? ", " : "") << format_number(w.xs[i]) << ":" << format_number(w.ys[i]);
    os << "\n";
  }
  if (w.kind == "product") {
    emit_weight(os, w.factors.at(0), pre + "left.");
    emit_weight(os, w.factors.at(1), pre + "right.");
  }
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s;
}

}  // namespace detail

// All scenarios in `text`. Errors carry the 1-based line and the offending key. A forced
// task replaces whatever the `task` keys ask for.
inline std::vector<Scenario> parse_scenarios(const std::string& text,
                                             const std::optional<std::string>& forced_task = std::nullopt) {
  using K = ParseError::Kind;
  std::vector<Scenario> out;
  std::map<std::string, detail::Entry> cur;
  int first = 1, lineno = 0;
  bool any = false;
  auto flush = [&]() {
    if (!cur.empty()) {
      detail::KeyTable kt(std::move(cur), first);
      out.push_back(detail::build_scenario(kt, static_cast<int>(out.size()), forced_task));
    }
    cur.clear();
    any = false;
  };
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::KeyTable::trim(line);
    if (line.empty()) continue;
    if (line == "---") {
      flush();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(K::syntax, lineno, "", "expected 'key = value'");
    std::string key = detail::KeyTable::trim(line.substr(0, eq)), val = detail::KeyTable::trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw ParseError(K::syntax, lineno, key, "empty key or value");
    if (!any) first = lineno;
    any = true;
    if (cur.count(key)) throw ParseError(K::bad_value, lineno, key, "duplicate key");
    cur[key] = {val, lineno, false};
  }
  flush();
  if (out.empty()) throw ParseError(K::missing_field, lineno, "task", "no scenario found");
  return out;
}

inline Scenario parse_scenario(const std::string& text) {
  auto all = parse_scenarios(text);
  if (all.size() != 1) throw ParseError(ParseError::Kind::syntax, 1, "", "expected exactly one scenario");
  return all.front();
}

// canonical text form; parse_scenario(emit_scenario(s)) == s
inline std::string emit_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "name = " << s.name << "\n";
  os << "task = ";
  for (std::size_t i = 0; i < s.tasks.size(); ++i) os << (i ? "," : "") << s.tasks[i];
  os << "\n";
  if (s.p) os << "p = " << format_number(*s.p) << "\n";
  if (s.q) os << "q = " << format_number(*s.q) << "\n";
  if (s.lambda) os << "lambda = " << format_number(*s.lambda) << "\n";
  os << "tol = " << format_number(s.tol) << "\n";
  if (s.v) detail::emit_weight(os, *s.v, "weight.v.");
  if (s.w) detail::emit_weight(os, *s.w, "weight.w.");
  if (s.u) {
    os << "weight.u.kind = " << s.u->kind << "\n";
    if (s.u->kind == "constant") os << "weight.u.coef = " << format_number(s.u->coef) << "\n";
    if (s.u->kind == "product") {
      detail::emit_weight(os, s.u->factors.at(0), "weight.u.left.");
      detail::emit_weight(os, s.u->factors.at(1), "weight.u.right.");
    }
    if (s.u->kind == "table") {
      os << "weight.u.x = " << detail::join(s.u->xs) << "\n";
      os << "weight.u.y = " << detail::join(s.u->ys) << "\n";
      os << "weight.u.values = " << detail::join(s.u->values) << "\n";
    }
  }
  if (s.pair) {
    os << "pair.kind = " << s.pair->kind << "\n";
    if (s.pair->kind == "linear") os << "pair.xi = " << format_number(s.pair->xi) << "\n";
    if (s.pair->kind == "power") {
      os << "pair.a_coef = " << format_number(s.pair->a_coef) << "\n";
      os << "pair.b_coef = " << format_number(s.pair->b_coef) << "\n";
      os << "pair.exponent = " << format_number(s.pair->exponent) << "\n";
    }
    if (s.pair->kind == "table") {
      os << "pair.points = ";
      for (std::size_t i = 0; i < s.pair->xs.size(); ++i)
        os << (i ? ", " : "") << format_number(s.pair->xs[i]) << ":" << format_number(s.pair->as[i]) << ":"
           << format_number(s.pair->bs[i]);
      os << "\n";
    }
  }
  os << "grid.lo = " << format_number(s.grid.lo) << "\n";
  os << "grid.hi = " << format_number(s.grid.hi) << "\n";
  os << "grid.points_per_decade = " << format_number(s.grid.per_decade) << "\n";
  os << "norm.cells = " << s.norm_cells << "\n";
  os << "norm.lo = " << format_number(s.norm_lo) << "\n";
  os << "norm.hi = " << format_number(s.norm_hi) << "\n";
  os << "embedding.xi_nodes = " << s.xi_nodes << "\n";
  if (s.phase_gamma) os << "phase.gamma = " << format_number(*s.phase_gamma) << "\n";
  os << "phase.lambda_points = " << s.phase_points << "\n";
  if (!s.checks.empty()) {
    os << "verify.checks = ";
    for (std::size_t i = 0; i < s.checks.size(); ++i) os << (i ? "," : "") << s.checks[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace steklov
