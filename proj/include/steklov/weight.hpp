#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/exponents.hpp"
#include "steklov/numeric.hpp"
#include "steklov/quadrature.hpp"

namespace steklov {

namespace detail {

// c x^s integrated over [a,b], 0 <= a < b <= inf, with c = exp(log_c)
inline double power_integral(double log_c, double s, double a, double b) {
  double k = s + 1.0;
  if (a == 0.0) {
    if (k <= 0.0) return kInf;
    if (std::isinf(b)) return kInf;
    return std::exp(log_c + k * std::log(b)) / k;
  }
  if (std::isinf(b)) {
    if (k >= 0.0) return kInf;
    return std::exp(log_c + k * std::log(a)) / -k;
  }
  double la = std::log(a), span = std::log(b) - la;
  if (std::abs(k) * span < 1e-300 || k == 0.0) return std::exp(log_c) * span;
  return std::exp(log_c + k * la) * (std::expm1(k * span) / k);
}

// Positive function that is a power law between knots and outside them, i.e. linear in
// log-log coordinates. Integrals over any range are exact.
class PiecewisePower {
 public:
  PiecewisePower(std::vector<double> lx, std::vector<double> ly, double left_slope, double right_slope)
      : lx_(std::move(lx)), ly_(std::move(ly)), left_(left_slope), right_(right_slope) {
    std::size_t k = lx_.size();
    slopes_.resize(k > 0 ? k - 1 : 0);
    for (std::size_t i = 0; i + 1 < k; ++i) slopes_[i] = (ly_[i + 1] - ly_[i]) / (lx_[i + 1] - lx_[i]);
    // segment tree over full interior segment masses so range sums never cancel
    std::size_t n = slopes_.size();
    size_ = 1;
    while (size_ < std::max<std::size_t>(n, 1)) size_ <<= 1;
    tree_.assign(2 * size_, 0.0);
    for (std::size_t i = 0; i < n; ++i) tree_[size_ + i] = segment(i, std::exp(lx_[i]), std::exp(lx_[i + 1]));
    for (std::size_t i = size_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
  }

  static PiecewisePower power(double c, double e) { return PiecewisePower({0.0}, {std::log(c)}, e, e); }

  double operator()(double x) const {
    if (x <= 0.0) return left_ > 0 ? 0.0 : (left_ < 0 ? kInf : std::exp(ly_[0]));
    if (std::isinf(x)) return right_ > 0 ? kInf : (right_ < 0 ? 0.0 : std::exp(ly_.back()));
    return std::exp(log_value(std::log(x)));
  }

  double log_value(double l) const {
    if (l <= lx_.front()) return ly_.front() + left_ * (l - lx_.front());
    if (l >= lx_.back()) return ly_.back() + right_ * (l - lx_.back());
    std::size_t i = std::upper_bound(lx_.begin(), lx_.end(), l) - lx_.begin() - 1;
    return ly_[i] + slopes_[i] * (l - lx_[i]);
  }

  double integral(double lo, double hi) const {
    if (!(hi > lo)) return 0.0;
    double x0 = std::exp(lx_.front()), xn = std::exp(lx_.back());
    double total = 0.0;
    if (lo < x0) {
      total += power_integral(ly_.front() - left_ * lx_.front(), left_, lo, std::min(hi, x0));
      if (hi <= x0) return total;
      lo = x0;
    }
    if (hi > xn) {
      total += power_integral(ly_.back() - right_ * lx_.back(), right_, std::max(lo, xn), hi);
      if (lo >= xn) return total;
      hi = xn;
    }
    if (slopes_.empty()) return total;
    double llo = std::clamp(std::log(lo), lx_.front(), lx_.back());
    double lhi = std::clamp(std::log(hi), lx_.front(), lx_.back());
    std::size_t i = std::min<std::size_t>(std::upper_bound(lx_.begin(), lx_.end(), llo) - lx_.begin() - 1,
                                          slopes_.size() - 1);
    std::size_t j = std::min<std::size_t>(std::upper_bound(lx_.begin(), lx_.end(), lhi) - lx_.begin() - 1,
                                          slopes_.size() - 1);
    if (lhi == lx_[j] && j > i) --j;
    if (i == j) return total + segment(i, lo, hi);
    total += segment(i, lo, std::exp(lx_[i + 1]));
    total += segment(j, std::exp(lx_[j]), hi);
    total += range_sum(i + 1, j);
    return total;
  }

  PiecewisePower pow(double s) const {
    std::vector<double> ly(ly_);
    for (double& y : ly) y *= s;
    return PiecewisePower(lx_, std::move(ly), left_ * s, right_ * s);
  }

  PiecewisePower times(const PiecewisePower& o) const {
    std::vector<double> lx(lx_);
    lx.insert(lx.end(), o.lx_.begin(), o.lx_.end());
    std::sort(lx.begin(), lx.end());
    lx.erase(std::unique(lx.begin(), lx.end()), lx.end());
    std::vector<double> ly(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) ly[i] = log_value(lx[i]) + o.log_value(lx[i]);
    return PiecewisePower(std::move(lx), std::move(ly), left_ + o.left_, right_ + o.right_);
  }

  PiecewisePower scaled(double c) const {
    std::vector<double> ly(ly_);
    double lc = std::log(c);
    for (double& y : ly) y += lc;
    return PiecewisePower(lx_, std::move(ly), left_, right_);
  }

 private:
  double segment(std::size_t i, double a, double b) const {
    double s = slopes_[i];
    return power_integral(ly_[i] - s * lx_[i], s, a, b);
  }

  // sum of full segments [i, j)
  double range_sum(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t l = i + size_, r = j + size_; l < r; l >>= 1, r >>= 1) {
      if (l & 1) s += tree_[l++];
      if (r & 1) s += tree_[--r];
    }
    return s;
  }

  std::vector<double> lx_, ly_, slopes_;
  double left_, right_;
  std::size_t size_ = 1;
  std::vector<double> tree_;
};

}  // namespace detail

// Nonnegative weight on (0, inf). Cheap to copy; every kind is immutable.
class Weight {
 public:
  enum class Kind { constant, power, rational, table, product };

  static Weight constant(double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    return Weight(Constant{c});
  }

  static Weight power(double c, double e) {
    if (!(c >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("bad power weight");
    if (c == 0.0 || std::isinf(c) || e == 0.0) return constant(c);
    return Weight(Power{c, e});
  }

  // c z^e (1 + z^gamma)^m
  static Weight rational(double c, double e, double gamma, double m) {
    if (!(gamma > 0.0) || !(c >= 0.0)) throw std::invalid_argument("rational weight needs gamma > 0, c >= 0");
    if (m == 0.0 || c == 0.0 || std::isinf(c)) return power(c, e);
    return Weight(Rational{c, e, gamma, m});
  }

  // The family whose dual density is z^(gamma-1) (1+z^gamma)^-2 for the given p.
  static Weight rational_gamma(double gamma, double p) {
    double pc = p / (p - 1.0);
    return rational(1.0, (gamma - 1.0) / (1.0 - pc), gamma, 2.0 / (pc - 1.0));
  }

  // log-linear interpolation through (x_i, y_i); outside the table a power law fitted over
  // the outermost decade of points takes over
  static Weight table(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("table needs >= 2 matching points");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) throw std::invalid_argument("table abscissae must be positive");
      if (i > 0 && !(xs[i] > xs[i - 1])) throw std::invalid_argument("table abscissae must increase");
      if (!(ys[i] > 0.0) || !std::isfinite(ys[i]))
        throw DegenerateWeightError("table weight value at x=" + std::to_string(xs[i]) +
                                    " is not positive and finite");
      lx[i] = std::log(xs[i]);
      ly[i] = std::log(ys[i]);
    }
    double left = edge_slope(lx, ly, true), right = edge_slope(lx, ly, false);
    auto pp = std::make_shared<detail::PiecewisePower>(lx, ly, left, right);
    return Weight(Table{std::move(xs), std::move(ys), std::move(pp)});
  }

  static Weight product(const Weight& f, const Weight& g) {
    if (f.is_zero() || g.is_zero()) return constant(0.0);
    if (auto* c = std::get_if<Constant>(&f.rep_)) return g.scaled(c->c);
    if (auto* c = std::get_if<Constant>(&g.rep_)) return f.scaled(c->c);
    auto* pf = std::get_if<Power>(&f.rep_);
    auto* pg = std::get_if<Power>(&g.rep_);
    if (pf && pg) return power(pf->c * pg->c, pf->e + pg->e);
    Product pr{std::make_shared<Weight>(f), std::make_shared<Weight>(g), nullptr};
    auto ff = f.piecewise(), fg = g.piecewise();
    if (ff && fg) pr.folded = std::make_shared<detail::PiecewisePower>(ff->times(*fg));
    return Weight(std::move(pr));
  }

  Kind kind() const { return static_cast<Kind>(rep_.index()); }

  double operator()(double x) const {
    return std::visit([x](const auto& r) { return eval(r, x); }, rep_);
  }

  bool is_zero() const {
    auto* c = std::get_if<Constant>(&rep_);
    return c && c->c == 0.0;
  }

  // exact integral when the kind admits one; may be +inf
  std::optional<double> closed_integral(double lo, double hi) const {
    if (!(hi > lo)) return 0.0;
    return std::visit([&](const auto& r) { return closed(r, lo, hi); }, rep_);
  }

  bool has_closed_integral() const { return closed_integral(1.0, 2.0).has_value(); }

  Weight pow(double s) const {
    if (s == 1.0) return *this;
    return std::visit([s](const auto& r) { return raise(r, s); }, rep_);
  }

  Weight scaled(double c) const {
    if (!(c >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    if (c == 1.0) return *this;
    if (c == 0.0) return constant(0.0);
    return std::visit([c](const auto& r) { return scale(r, c); }, rep_);
  }

  // power-law coefficients when kind is power or a positive finite constant
  std::optional<std::pair<double, double>> as_power() const {
    if (auto* c = std::get_if<Constant>(&rep_)) {
      if (c->c > 0 && std::isfinite(c->c)) return std::make_pair(c->c, 0.0);
      return std::nullopt;
    }
    if (auto* p = std::get_if<Power>(&rep_)) return std::make_pair(p->c, p->e);
    return std::nullopt;
  }

  // (c, e, gamma, m) when kind is rational
  std::optional<std::array<double, 4>> as_rational() const {
    if (auto* r = std::get_if<Rational>(&rep_)) return std::array<double, 4>{r->c, r->e, r->gamma, r->m};
    return std::nullopt;
  }

 private:
  struct Constant {
    double c;
  };
  struct Power {
    double c, e;
  };
  struct Rational {
    double c, e, gamma, m;
  };
  struct Table {
    std::vector<double> xs, ys;
    std::shared_ptr<const detail::PiecewisePower> pp;
  };
  struct Product {
    std::shared_ptr<const Weight> f, g;
    std::shared_ptr<const detail::PiecewisePower> folded;
  };
  using Rep = std::variant<Constant, Power, Rational, Table, Product>;

  explicit Weight(Rep r) : rep_(std::move(r)) {}
  explicit Weight(std::shared_ptr<const detail::PiecewisePower> pp) : rep_(Table{{}, {}, std::move(pp)}) {}

  static double edge_slope(const std::vector<double>& lx, const std::vector<double>& ly, bool left) {
    // least squares over the points within one decade of the end
    const double decade = std::log(10.0);
    std::size_t n = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t i = left ? k : n - 1 - k;
      if (cnt >= 2 && std::abs(lx[i] - (left ? lx[0] : lx[n - 1])) > decade) break;
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
      ++cnt;
    }
    double den = cnt * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (cnt * sxy - sx * sy) / den;
  }

  std::optional<detail::PiecewisePower> piecewise() const {
    if (auto* c = std::get_if<Constant>(&rep_)) {
      if (c->c > 0 && std::isfinite(c->c)) return detail::PiecewisePower::power(c->c, 0.0);
      return std::nullopt;
    }
    if (auto* p = std::get_if<Power>(&rep_)) return detail::PiecewisePower::power(p->c, p->e);
    if (auto* t = std::get_if<Table>(&rep_)) return *t->pp;
    if (auto* pr = std::get_if<Product>(&rep_); pr && pr->folded) return *pr->folded;
    return std::nullopt;
  }

  static double eval(const Constant& c, double) { return c.c; }
  static double eval(const Power& p, double x) { return p.c * xpow(x, p.e); }
  static double eval(const Rational& r, double x) {
    if (x == 0.0) return r.c * xpow(0.0, r.e);
    double lz = std::log(x), gz = r.gamma * lz;
    double softplus = gz > 30 ? gz + std::log1p(std::exp(-gz)) : std::log1p(std::exp(gz));
    return r.c * std::exp(r.e * lz + r.m * softplus);
  }
  static double eval(const Table& t, double x) { return (*t.pp)(x); }
  static double eval(const Product& p, double x) {
    if (p.folded) return (*p.folded)(x);
    double a = (*p.f)(x), b = (*p.g)(x);
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
  }

  static std::optional<double> closed(const Constant& c, double lo, double hi) {
    if (c.c == 0.0) return 0.0;
    return c.c * (hi - lo);
  }
  static std::optional<double> closed(const Power& p, double lo, double hi) {
    return detail::power_integral(std::log(p.c), p.e, lo, hi);
  }
  static std::optional<double> closed(const Rational& r, double lo, double hi) {
    if (std::abs(r.e - (r.gamma - 1.0)) > 1e-12) return std::nullopt;
    // substitute u = z^gamma: (c/gamma) * int (1+u)^m du
    double L = lo == 0.0 ? 0.0 : std::exp(r.gamma * std::log(lo));
    double diff = lo == 0.0 ? xpow(hi, r.gamma) : L * std::expm1(r.gamma * (std::log(hi) - std::log(lo)));
    if (std::isinf(hi)) diff = kInf;
    double k = r.m + 1.0;
    double l1 = std::log1p(diff / (1.0 + L));
    if (k == 0.0) return r.c / r.gamma * l1;
    return r.c / r.gamma * xpow(1.0 + L, k) * std::expm1(k * l1) / k;
  }
  static std::optional<double> closed(const Table& t, double lo, double hi) { return t.pp->integral(lo, hi); }
  static std::optional<double> closed(const Product& p, double lo, double hi) {
    if (p.folded) return p.folded->integral(lo, hi);
    return std::nullopt;
  }

  static Weight scale(const Constant& k, double c) { return constant(k.c * c); }
  static Weight scale(const Power& p, double c) { return power(p.c * c, p.e); }
  static Weight scale(const Rational& r, double c) { return rational(r.c * c, r.e, r.gamma, r.m); }
  static Weight scale(const Table& t, double c) {
    if (std::isinf(c)) return constant(kInf);
    return Weight(std::make_shared<detail::PiecewisePower>(t.pp->scaled(c)));
  }
  static Weight scale(const Product& p, double c) { return product(p.f->scaled(c), *p.g); }

  static Weight raise(const Constant& c, double s) { return constant(xpow(c.c, s)); }
  static Weight raise(const Power& p, double s) { return power(std::pow(p.c, s), p.e * s); }
  static Weight raise(const Rational& r, double s) { return rational(std::pow(r.c, s), r.e * s, r.gamma, r.m * s); }
  static Weight raise(const Table& t, double s) {
    return Weight(std::make_shared<detail::PiecewisePower>(t.pp->pow(s)));
  }
  static Weight raise(const Product& p, double s) { return product(p.f->pow(s), p.g->pow(s)); }

  Rep rep_;
};

// integral of w over [lo,hi] with 0 <= lo <= hi <= inf
inline IntegralValue integrate(const Weight& w, double lo, double hi, const QuadratureOptions& opt = {}) {
  if (lo == hi) return IntegralValue::exact(0.0);
  if (auto c = w.closed_integral(lo, hi)) return IntegralValue::exact(*c);
  return integrate_function([&](double x) { return w(x); }, lo, hi, opt);
}

inline double integral_value(const Weight& w, double lo, double hi, const QuadratureOptions& opt = {}) {
  return integrate(w, lo, hi, opt).value;
}

// v^(1-p'), the density that measures the source side of the operator
inline Weight rho_density(const Weight& v, const Exponents& e) { return v.pow(e.rho_power()); }

// w^(1-q'), the source weight of the adjoint problem
inline Weight dual_weight(const Weight& w, const Exponents& e) { return w.pow(1.0 - require_q_conj(e)); }

}  // namespace steklov
