#pragma once

// Direct numerical handle on the operator norm: exact action on step functions, the
// two-piece block splitting, the test function built from the dual fairway, and a
// ratio maximiser over nonnegative step functions on a truncated window.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "steklov/boundary.hpp"
#include "steklov/errors.hpp"
#include "steklov/exponents.hpp"
#include "steklov/fairway.hpp"
#include "steklov/numeric.hpp"
#include "steklov/step_function.hpp"
#include "steklov/weight.hpp"

namespace steklov {

inline double apply_H(const StepFunction& g, const BoundaryPair& pair, double x) {
  return g.integral(pair.a(x), pair.b(x));
}

inline double apply_H_star(const StepFunction& f, const BoundaryPair& pair, double y) {
  return f.integral(pair.b_inv(y), pair.a_inv(y));
}

namespace detail {

// sorted breakpoints in [lo, hi] including the ends
inline std::vector<double> merge_points(std::vector<double> pts, double lo, double hi) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts)
    if (p >= lo && p <= hi && (out.empty() || p > out.back() * (1 + 1e-15))) out.push_back(p);
  return out;
}

// integral of F over the pieces between consecutive `cuts`
template <class F>
double piecewise_gauss(F&& f, const std::vector<double>& cuts, const GaussRule& rule) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double c = 0.5 * (cuts[k] + cuts[k + 1]), h = 0.5 * (cuts[k + 1] - cuts[k]);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * h * f(c + h * rule.nodes[i]);
  }
  return s;
}

inline const GaussRule& pairing_rule() {
  static const GaussRule rule = gauss_legendre(6);
  return rule;
}

}  // namespace detail

// <Hg, f>, exact up to rounding for linear pairs: Hg is piecewise linear between the
// points where a(x) or b(x) crosses an edge of g
inline double pairing_Hg_f(const StepFunction& g, const StepFunction& f, const BoundaryPair& pair) {
  if (f.empty() || g.empty()) return 0.0;
  std::vector<double> pts(f.edges());
  for (double e : g.edges()) {
    pts.push_back(pair.a_inv(e));
    pts.push_back(pair.b_inv(e));
  }
  auto cuts = detail::merge_points(std::move(pts), f.edges().front(), f.edges().back());
  return detail::piecewise_gauss([&](double x) { return apply_H(g, pair, x) * f(x); }, cuts, detail::pairing_rule());
}

// <g, H*f>
inline double pairing_g_Hstar_f(const StepFunction& g, const StepFunction& f, const BoundaryPair& pair) {
  if (f.empty() || g.empty()) return 0.0;
  std::vector<double> pts(g.edges());
  for (double e : f.edges()) {
    pts.push_back(pair.a(e));
    pts.push_back(pair.b(e));
  }
  auto cuts = detail::merge_points(std::move(pts), g.edges().front(), g.edges().back());
  return detail::piecewise_gauss([&](double y) { return g(y) * apply_H_star(f, pair, y); }, cuts, detail::pairing_rule());
}

// H g(x) = T_k g(x) + S_k g(x) for x in [xi_k, xi_{k+1}):
//   T_k g(x) = int_{a(x)}^{a(xi_{k+1})} g,   S_k g(x) = int_{b(xi_k)}^{b(x)} g
struct TSParts {
  int block = 0;
  double t_part = 0.0;
  double s_part = 0.0;
};

inline TSParts decompose_TS(const BoundaryPair& pair, const PointSequence& xi, const StepFunction& g, double x) {
  if (xi.values.size() < 2 || !(x >= xi.values.front()) || !(x < xi.values.back()))
    throw OutOfRangeError("x lies outside the tiled range of the block sequence");
  std::size_t i = std::upper_bound(xi.values.begin(), xi.values.end(), x) - xi.values.begin() - 1;
  double lo = xi.values[i], hi = xi.values[i + 1];
  TSParts out;
  out.block = xi.k_first + static_cast<int>(i);
  out.t_part = g.integral(pair.a(x), pair.a(hi));
  out.s_part = g.integral(pair.b(lo), pair.b(x));
  return out;
}

// Ratio ||Hg||_{q,w} / ||g||_{p,v} with the output integral split at every kink of Hg.
// With the default rule this reproduces the objective used by estimate_norm.
inline double evaluate_ratio(const StepFunction& g, const BoundaryPair& pair, const Weight& v, const Weight& w,
                             const Exponents& e, int gauss = 3) {
  if (g.empty()) return 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.values()[i] != 0.0)
      den += std::pow(std::abs(g.values()[i]), e.p) * integral_value(v, g.edges()[i], g.edges()[i + 1]);
  if (den == 0.0) return 0.0;
  std::vector<double> pts;
  for (double y : g.edges()) {
    pts.push_back(pair.a_inv(y));
    pts.push_back(pair.b_inv(y));
  }
  auto cuts = detail::merge_points(std::move(pts), pair.b_inv(g.edges().front()), pair.a_inv(g.edges().back()));
  double num = detail::piecewise_gauss(
      [&](double x) {
        double h = apply_H(g, pair, x);
        if (h == 0.0) return 0.0;
        double wx = w(x);
        return wx > 0 ? std::pow(std::abs(h), e.q) * wx : 0.0;
      },
      cuts, gauss_legendre(gauss));
  return std::pow(num, 1 / e.q) / std::pow(den, 1 / e.p);
}

struct TestFunctionBlock {
  int k = 0, j = 0;
  Interval piece;    // the subinterval of [eta_k, eta_{k+1}) in the fairway variable
  Interval support;  // [a~(m), m], m the right end of `piece`
  double level = 0;  // l_{k,j}
  double lambda = 0; // (int_piece w)^(r/q) (int_support rho)^(r/p')
};

struct TestFunction {
  StepFunction g;
  std::vector<TestFunctionBlock> blocks;
  double lambda_sum = 0.0;
  bool degenerate = false;  // some block stopped early because the b-iterates stalled
};

// Test function for 0 < q < 1 < p. In the variable where the dual fairway is the identity
// (a~ = a o rho, b~ = b o rho) each [eta_k, eta_{k+1}) of the a~-chain is covered by
// b~-iterates; every piece contributes l * rho on [a~(m), m].
inline TestFunction build_test_function_ga(const BoundaryPair& pair, const MonotoneMap& rho, const Weight& w,
                                           const Weight& v, const Exponents& e, int N, int sub_cells = 24) {
  if (!(e.q < 1.0 && e.p > 1.0)) throw std::invalid_argument("the test function needs 0 < q < 1 < p");
  double r = require_r(e), qc = require_q_conj(e);
  Weight dens = rho_density(v, e);
  auto at = [&](double x) { return pair.a(rho(x)); };
  auto bt = [&](double x) { return pair.b(rho(x)); };
  auto bt_inv = [&](double y) { return rho.inverse(pair.b_inv(y)); };
  auto at_inv = [&](double y) { return rho.inverse(pair.a_inv(y)); };
  auto W = [&](Interval iv) { return integral_value(w, rho(iv.lo), rho(iv.hi)); };
  auto V = [&](Interval iv) { return integral_value(dens, iv.lo, iv.hi); };

  TestFunction out;
  std::vector<double> etas{1.0};
  for (int k = 1; k <= N + 1; ++k) etas.push_back(at_inv(etas.back()));
  std::vector<double> down;
  for (int k = 1; k <= N; ++k) down.push_back(at(down.empty() ? 1.0 : down.back()));
  std::vector<double> chain(down.rbegin(), down.rend());
  chain.insert(chain.end(), etas.begin(), etas.end());  // eta_{-N} .. eta_{N+1}

  for (int idx = 0; idx < 2 * N + 1; ++idx) {
    int k = idx - N;
    double lo = chain[idx], hi = chain[idx + 1];
    std::vector<Interval> pieces;
    if (hi <= bt(lo)) {
      pieces.push_back({lo, hi});
    } else {
      double m = lo;
      while (bt(m) < hi) {
        double nm = bt(m);
        if (!(nm > m * (1 + 1e-14)) || pieces.size() > 10000) {
          out.degenerate = true;
          break;
        }
        pieces.push_back({m, nm});
        m = nm;
      }
      pieces.push_back({bt_inv(hi), hi});
    }
    int j = 0;
    for (auto pc : pieces) {
      ++j;
      double m = pc.hi;
      Interval sup{at(m), m};
      double wm = W(pc), vm = V(sup);
      TestFunctionBlock b{k, j, pc, sup};
      b.level = power_product({{wm, r / (e.p * e.q)}, {vm, r / (e.p * qc)}});
      b.lambda = power_product({{wm, r / e.q}, {vm, r / e.p_conj()}});
      out.lambda_sum += b.lambda;
      out.blocks.push_back(b);
    }
  }

  // project sum_b level_b * rho * chi_support onto log cells of each support
  std::vector<double> edges;
  for (const auto& b : out.blocks) {
    if (b.level == 0.0) continue;
    for (int s = 0; s <= sub_cells; ++s)
      edges.push_back(b.support.lo * std::pow(b.support.hi / b.support.lo, double(s) / sub_cells));
  }
  if (edges.empty()) {
    out.g = StepFunction({1.0, 2.0}, {0.0});
    return out;
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(), [](double x, double y) { return y <= x * (1 + 1e-13); }),
              edges.end());
  std::vector<double> vals(edges.size() - 1, 0.0);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double c0 = edges[i], c1 = edges[i + 1], mid = std::sqrt(c0 * c1);
    double avg = integral_value(dens, c0, c1) / (c1 - c0);
    for (const auto& b : out.blocks)
      if (b.level > 0 && mid > b.support.lo && mid < b.support.hi) vals[i] += b.level * avg;
  }
  out.g = StepFunction(std::move(edges), std::move(vals));
  return out;
}

struct NormOptions {
  double window_lo = 0x1p-20;
  double window_hi = 0x1p20;
  std::size_t cells = 4096;
  int max_iters = 200;     // multiplicative (power-type) steps per seed
  int sweeps = 1;          // coordinate-ascent sweeps after the multiplicative phase
  int power_iters = 300;   // p = q = 2 only
  int gauss = 3;           // output nodes per smooth piece
  bool seed_test_function = true;
};

struct NormEstimate {
  double lower_bound = 0.0;
  StepFunction maximizer;
  int iterations = 0;
  double window_lo = 0, window_hi = 0;
  std::size_t cells = 0;
  std::vector<double> history;  // objective after every accepted update
  std::string method;
  bool zero_objective = false;
};

namespace detail {

// The operator restricted to step functions on log-uniform cells and sampled at Gauss
// nodes of the pieces on which Hg is smooth.
class DiscreteOperator {
 public:
  DiscreteOperator(const BoundaryPair& pair, const Weight& v, const Weight& w, const Exponents& e,
                   const NormOptions& opt)
      : p_(e.p), q_(e.q) {
    std::size_t n = opt.cells;
    edges_.resize(n + 1);
    double l0 = std::log(opt.window_lo), l1 = std::log(opt.window_hi);
    for (std::size_t i = 0; i <= n; ++i) edges_[i] = std::exp(l0 + (l1 - l0) * i / n);
    edges_.front() = opt.window_lo;
    edges_.back() = opt.window_hi;
    vmass_.resize(n);
    for (std::size_t i = 0; i < n; ++i) vmass_[i] = integral_value(v, edges_[i], edges_[i + 1]);

    std::vector<double> pts;
    for (double y : edges_) {
      pts.push_back(pair.a_inv(y));
      pts.push_back(pair.b_inv(y));
    }
    auto cuts = merge_points(std::move(pts), pair.b_inv(edges_.front()), pair.a_inv(edges_.back()));
    GaussRule rule = gauss_legendre(opt.gauss);
    row_start_.push_back(0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      double c = 0.5 * (cuts[k] + cuts[k + 1]), h = 0.5 * (cuts[k + 1] - cuts[k]);
      for (std::size_t gi = 0; gi < rule.nodes.size(); ++gi) {
        double x = c + h * rule.nodes[gi];
        double wx = w(x);
        if (!(wx > 0)) continue;
        double lo = pair.a(x), hi = pair.b(x);
        std::size_t i0 = cell_of(lo), i1 = cell_of(hi);
        bool any = false;
        for (std::size_t i = i0; i <= i1 && i < n; ++i) {
          double ov = std::min(hi, edges_[i + 1]) - std::max(lo, edges_[i]);
          if (ov > 0) {
            cols_.push_back(static_cast<int>(i));
            vals_.push_back(ov);
            any = true;
          }
        }
        if (!any) continue;
        node_weight_.push_back(rule.weights[gi] * h * wx);
        row_start_.push_back(cols_.size());
      }
    }
    // column view for coordinate updates
    col_start_.assign(n + 1, 0);
    for (int c : cols_) ++col_start_[c + 1];
    for (std::size_t i = 0; i < n; ++i) col_start_[i + 1] += col_start_[i];
    col_rows_.resize(cols_.size());
    col_vals_.resize(cols_.size());
    std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
    for (std::size_t j = 0; j + 1 < row_start_.size(); ++j)
      for (std::size_t k = row_start_[j]; k < row_start_[j + 1]; ++k) {
        std::size_t pos = fill[cols_[k]]++;
        col_rows_[pos] = static_cast<int>(j);
        col_vals_[pos] = vals_[k];
      }
  }

  std::size_t cells() const { return vmass_.size(); }
  std::size_t nodes() const { return node_weight_.size(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& vmass() const { return vmass_; }

  void apply(const std::vector<double>& g, std::vector<double>& h) const {
    h.assign(nodes(), 0.0);
    for (std::size_t j = 0; j < nodes(); ++j) {
      double s = 0.0;
      for (std::size_t k = row_start_[j]; k < row_start_[j + 1]; ++k) s += vals_[k] * g[cols_[k]];
      h[j] = s;
    }
  }

  void apply_transpose(const std::vector<double>& t, std::vector<double>& u) const {
    u.assign(cells(), 0.0);
    for (std::size_t j = 0; j < nodes(); ++j) {
      if (t[j] == 0.0) continue;
      for (std::size_t k = row_start_[j]; k < row_start_[j + 1]; ++k) u[cols_[k]] += vals_[k] * t[j];
    }
  }

  double powq(double h) const { return q_ == 2.0 ? h * h : (q_ == 1.0 ? h : std::pow(h, q_)); }
  double powp(double g) const { return p_ == 2.0 ? g * g : std::pow(g, p_); }

  double numerator(const std::vector<double>& h) const {
    double s = 0.0;
    for (std::size_t j = 0; j < nodes(); ++j)
      if (h[j] > 0) s += node_weight_[j] * powq(h[j]);
    return s;
  }
  double denominator(const std::vector<double>& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < cells(); ++i)
      if (g[i] > 0) s += vmass_[i] * powp(g[i]);
    return s;
  }
  double log_objective(double num, double den) const {
    if (!(num > 0) || !(den > 0)) return -kInf;
    return std::log(num) / q_ - std::log(den) / p_;
  }

  // multiplicative step g_i <- (sum_j O_ji c_j h_j^(q-1) / V_i)^(1/(p-1))
  std::vector<double> power_step(const std::vector<double>& g, const std::vector<double>& h) const {
    std::vector<double> t(nodes()), u;
    for (std::size_t j = 0; j < nodes(); ++j)
      t[j] = h[j] > 0 ? node_weight_[j] * (q_ == 2.0 ? h[j] : std::pow(h[j], q_ - 1)) : 0.0;
    apply_transpose(t, u);
    std::vector<double> out(cells());
    for (std::size_t i = 0; i < cells(); ++i)
      out[i] = (vmass_[i] > 0 && std::isfinite(vmass_[i]) && u[i] > 0) ? std::pow(u[i] / vmass_[i], 1 / (p_ - 1))
                                                                         : 0.0;
    (void)g;
    return out;
  }

  // one coordinate sweep of golden-section updates; returns the number of accepted moves
  int sweep(std::vector<double>& g, std::vector<double>& h, double& num, double& den,
            std::vector<double>& history) const {
    int moves = 0;
    for (std::size_t i = 0; i < cells(); ++i) {
      if (!(vmass_[i] > 0) || !std::isfinite(vmass_[i])) continue;
      std::size_t c0 = col_start_[i], c1 = col_start_[i + 1];
      if (c0 == c1) continue;
      double gi = g[i];
      auto eval = [&](double x) {
        double dn = 0.0, d = x - gi;
        for (std::size_t k = c0; k < c1; ++k) {
          int j = col_rows_[k];
          double hn = std::max(0.0, h[j] + d * col_vals_[k]);
          dn += node_weight_[j] * ((hn > 0 ? powq(hn) : 0.0) - (h[j] > 0 ? powq(h[j]) : 0.0));
        }
        double dd = vmass_[i] * ((x > 0 ? powp(x) : 0.0) - (gi > 0 ? powp(gi) : 0.0));
        return log_objective(num + dn, den + dd);
      };
      double base = log_objective(num, den);
      double ref = gi > 0 ? gi : neighbour_scale(g, i);
      if (!(ref > 0)) continue;
      double lr = std::log(ref);
      auto [ls, best] = golden_max([&](double l) { return eval(std::exp(l)); }, lr - 3.0, lr + 3.0, 24);
      double cand = std::exp(ls);
      if (gi > 0) {
        double zero = eval(0.0);
        if (zero > best) {
          best = zero;
          cand = 0.0;
        }
      }
      if (best > base + 1e-15 * std::abs(base)) {
        double d = cand - gi;
        for (std::size_t k = c0; k < c1; ++k) {
          int j = col_rows_[k];
          double hn = std::max(0.0, h[j] + d * col_vals_[k]);
          num += node_weight_[j] * ((hn > 0 ? powq(hn) : 0.0) - (h[j] > 0 ? powq(h[j]) : 0.0));
          h[j] = hn;
        }
        den += vmass_[i] * ((cand > 0 ? powp(cand) : 0.0) - (gi > 0 ? powp(gi) : 0.0));
        g[i] = cand;
        ++moves;
        history.push_back(std::exp(log_objective(num, den)));
      }
    }
    // resynchronise the running sums
    apply(g, h);
    num = numerator(h);
    den = denominator(g);
    return moves;
  }

 private:
  std::size_t cell_of(double y) const {
    if (y <= edges_.front()) return 0;
    std::size_t k = std::upper_bound(edges_.begin(), edges_.end(), y) - edges_.begin();
    return k - 1;
  }
  static double neighbour_scale(const std::vector<double>& g, std::size_t i) {
    for (std::size_t d = 1; d < g.size(); ++d) {
      if (i >= d && g[i - d] > 0) return g[i - d];
      if (i + d < g.size() && g[i + d] > 0) return g[i + d];
    }
    return 0.0;
  }

  double p_, q_;
  std::vector<double> edges_, vmass_, node_weight_;
  std::vector<std::size_t> row_start_, col_start_;
  std::vector<int> cols_, col_rows_;
  std::vector<double> vals_, col_vals_;
};

}  // namespace detail

inline NormEstimate estimate_norm(const BoundaryPair& pair, const Weight& v, const Weight& w, const Exponents& e,
                                  const NormOptions& opt = {}) {
  if (!(opt.window_hi > opt.window_lo) || !(opt.window_lo > 0) || !std::isfinite(opt.window_hi))
    throw std::invalid_argument("norm estimation needs a finite window");
  if (opt.cells < 2) throw std::invalid_argument("norm estimation needs at least 2 cells");
  detail::DiscreteOperator op(pair, v, w, e, opt);
  const auto& edges = op.edges();
  std::size_t n = op.cells();

  NormEstimate best;
  best.window_lo = opt.window_lo;
  best.window_hi = opt.window_hi;
  best.cells = n;
  best.lower_bound = -1.0;

  std::vector<std::vector<double>> seeds;
  {
    Weight dens = rho_density(v, e);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      double m = integral_value(dens, edges[i], edges[i + 1]) / (edges[i + 1] - edges[i]);
      s[i] = std::isfinite(m) ? m : 0.0;
    }
    seeds.push_back(std::move(s));
  }
  {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      double y = std::sqrt(edges[i] * edges[i + 1]), vy = v(y);
      s[i] = vy > 0 && std::isfinite(vy) ? std::pow(y * vy, -1 / e.p) : 0.0;
    }
    seeds.push_back(std::move(s));
  }
  if (opt.seed_test_function && e.q < 1.0) {
    try {
      FairwayOptions fo;
      fo.grid = {opt.window_lo / 64, opt.window_hi * 64, 32};
      auto rho = solve_rho(w, pair, fo);
      int N = 0;
      for (double x = 1.0; x < opt.window_hi && N < 200; x = pair.a_inv(rho.map(x)), ++N) {
      }
      auto ga = build_test_function_ga(pair, rho.map, w, v, e, std::max(1, N - 1));
      std::vector<double> s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = ga.g.integral(edges[i], edges[i + 1]) / (edges[i + 1] - edges[i]);
      seeds.push_back(std::move(s));
    } catch (const Error&) {
      // no usable fairway: fall back to the other seeds
    }
  }

  std::vector<double> h;
  for (auto& g : seeds) {
    op.apply(g, h);
    double num = op.numerator(h), den = op.denominator(g);
    double lobj = op.log_objective(num, den);
    if (!std::isfinite(lobj)) continue;
    std::vector<double> history{std::exp(lobj)};
    int it = 0;
    for (; it < opt.max_iters; ++it) {
      auto cand = op.power_step(g, h);
      bool accepted = false;
      for (double theta : {1.0, 0.5, 0.25}) {
        std::vector<double> mix(n);
        for (std::size_t i = 0; i < n; ++i)
          mix[i] = theta == 1.0 ? cand[i] : std::pow(g[i], 1 - theta) * std::pow(cand[i], theta);
        std::vector<double> hm;
        op.apply(mix, hm);
        double nn = op.numerator(hm), dd = op.denominator(mix);
        double lo = op.log_objective(nn, dd);
        if (lo > lobj + 1e-13 * std::abs(lobj)) {
          // rescale to keep the iterates O(1)
          double sc = std::pow(dd, -1 / e.p);
          for (double& x : mix) x *= sc;
          g.swap(mix);
          op.apply(g, h);
          num = op.numerator(h);
          den = op.denominator(g);
          lobj = op.log_objective(num, den);
          history.push_back(std::exp(lobj));
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      double n0 = history[history.size() - 2], n1 = history.back();
      if (n1 - n0 <= 1e-12 * n1) break;
    }
    double val = std::exp(op.log_objective(num, den));
    if (val > best.lower_bound) {
      best.lower_bound = val;
      best.maximizer = StepFunction(edges, g);
      best.iterations = it;
      best.history = history;
      best.method = "ascent";
    }
  }

  // coordinate sweeps polish the best multiplicative result only
  if (best.lower_bound > 0 && opt.sweeps > 0) {
    std::vector<double> g = best.maximizer.values();
    op.apply(g, h);
    double num = op.numerator(h), den = op.denominator(g);
    int moved = 0;
    for (int s = 0; s < opt.sweeps; ++s) {
      int m = op.sweep(g, h, num, den, best.history);
      moved += m;
      if (m == 0) break;
    }
    double val = std::exp(op.log_objective(num, den));
    if (moved > 0 && val > best.lower_bound) {
      best.lower_bound = val;
      best.maximizer = StepFunction(edges, g);
      best.history.back() = val;
    }
  }

  if (e.p == 2.0 && e.q == 2.0 && best.lower_bound > 0) {
    // plain power iteration on D^-1 O^T C O
    std::vector<double> g = best.maximizer.values();
    double prev = 0.0, val = 0.0;
    int it = 0;
    for (; it < opt.power_iters; ++it) {
      op.apply(g, h);
      auto nxt = op.power_step(g, h);
      std::vector<double> hn;
      op.apply(nxt, hn);
      double dd = op.denominator(nxt);
      if (!(dd > 0)) break;
      val = std::exp(op.log_objective(op.numerator(hn), dd));
      double sc = 1 / std::sqrt(dd);
      for (double& x : nxt) x *= sc;
      g.swap(nxt);
      if (std::abs(val - prev) <= 1e-10 * val) break;
      prev = val;
    }
    if (val > best.lower_bound) {
      best.lower_bound = val;
      best.maximizer = StepFunction(edges, g);
      best.history.push_back(val);
      best.iterations += it;
      best.method = "power_iteration";
    }
  }

  if (best.lower_bound <= 0) {
    best.lower_bound = 0.0;
    best.zero_objective = true;
    best.maximizer = StepFunction(edges, std::vector<double>(n, 0.0));
    best.method = "none";
  }
  return best;
}

struct WindowSensitivity {
  NormEstimate half, base, twice;
  double spread() const {
    double hi = std::max({half.lower_bound, base.lower_bound, twice.lower_bound});
    double lo = std::min({half.lower_bound, base.lower_bound, twice.lower_bound});
    return hi > 0 ? (hi - lo) / hi : 0.0;
  }
};

// re-run with the window shrunk and widened by a factor 2 in log length, same cell density
inline WindowSensitivity window_sensitivity(const BoundaryPair& pair, const Weight& v, const Weight& w,
                                            const Exponents& e, const NormOptions& opt = {}) {
  auto scaled = [&](double f) {
    NormOptions o = opt;
    double c = std::sqrt(opt.window_lo * opt.window_hi), half = std::sqrt(opt.window_hi / opt.window_lo);
    o.window_lo = c / std::pow(half, f);
    o.window_hi = c * std::pow(half, f);
    o.cells = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(opt.cells * f)));
    return estimate_norm(pair, v, w, e, o);
  };
  return {scaled(0.5), estimate_norm(pair, v, w, e, opt), scaled(2.0)};
}

}  // namespace steklov
