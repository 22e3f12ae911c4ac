#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "steklov/numeric.hpp"

namespace steklov {

// Increasing map of (0, inf) onto itself: either c x^e or a table interpolated linearly in
// log-log coordinates (and extrapolated along the end segments). The inverse of a table
// is the swapped table, so inverse(map(x)) == x up to rounding.
class MonotoneMap {
 public:
  MonotoneMap() = default;  // identity

  static MonotoneMap power(double c, double e) {
    if (!(c >= 0.0) || !std::isfinite(c) || !(e > 0.0)) throw std::invalid_argument("power map needs c >= 0, e > 0");
    MonotoneMap m;
    m.c_ = c;
    m.e_ = e;
    return m;
  }
  static MonotoneMap linear(double c) { return power(c, 1.0); }
  static MonotoneMap identity() { return power(1.0, 1.0); }

  static MonotoneMap table(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("map table needs >= 2 points");
    auto t = std::make_shared<Tab>();
    t->lx.resize(xs.size());
    t->ly.resize(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!(xs[i] > 0) || !(ys[i] > 0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i]))
        throw std::invalid_argument("map table entries must be positive and finite");
      t->lx[i] = std::log(xs[i]);
      t->ly[i] = std::log(ys[i]);
      if (i > 0 && (!(t->lx[i] > t->lx[i - 1]) || !(t->ly[i] > t->ly[i - 1])))
        throw std::invalid_argument("map table must be strictly increasing");
    }
    MonotoneMap m;
    m.tab_ = std::move(t);
    return m;
  }

  bool is_table() const { return static_cast<bool>(tab_); }
  bool is_power() const { return !tab_; }
  double coef() const { return c_; }
  double exponent() const { return e_; }

  double operator()(double x) const {
    if (!tab_) return c_ == 0.0 ? 0.0 : c_ * xpow(x, e_);
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return kInf;
    return std::exp(interp(tab_->lx, tab_->ly, std::log(x)));
  }

  double inverse(double y) const {
    if (!tab_) return c_ == 0.0 ? kInf : xpow(y / c_, 1.0 / e_);
    if (y <= 0.0) return 0.0;
    if (std::isinf(y)) return kInf;
    return std::exp(interp(tab_->ly, tab_->lx, std::log(y)));
  }

  MonotoneMap as_inverse() const {
    MonotoneMap m;
    if (!tab_) {
      if (c_ == 0.0) throw std::invalid_argument("degenerate map has no inverse");
      m.c_ = std::pow(c_, -1.0 / e_);
      m.e_ = 1.0 / e_;
      return m;
    }
    auto t = std::make_shared<Tab>();
    t->lx = tab_->ly;
    t->ly = tab_->lx;
    m.tab_ = std::move(t);
    return m;
  }

  std::vector<double> abscissae() const {
    std::vector<double> xs;
    if (tab_)
      for (double l : tab_->lx) xs.push_back(std::exp(l));
    return xs;
  }
  std::vector<double> values() const {
    std::vector<double> ys;
    if (tab_)
      for (double l : tab_->ly) ys.push_back(std::exp(l));
    return ys;
  }

 private:
  struct Tab {
    std::vector<double> lx, ly;
  };

  static double interp(const std::vector<double>& xs, const std::vector<double>& ys, double l) {
    std::size_t n = xs.size();
    std::size_t i;
    if (l <= xs[0]) {
      i = 0;
    } else if (l >= xs[n - 1]) {
      i = n - 2;
    } else {
      i = std::upper_bound(xs.begin(), xs.end(), l) - xs.begin() - 1;
    }
    double t = (l - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
  }

  double c_ = 1.0, e_ = 1.0;
  std::shared_ptr<const Tab> tab_;
};

}  // namespace steklov
