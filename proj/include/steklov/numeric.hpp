#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

namespace steklov {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// x^e over the extended half-line with 0^+ = 0, 0^- = inf, inf^+ = inf, inf^- = 0, y^0 = 1.
inline double xpow(double x, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return x;
  if (x == 0.0) return e > 0 ? 0.0 : kInf;
  if (std::isinf(x)) return e > 0 ? kInf : 0.0;
  if (e == 2.0) return x * x;
  if (e == 0.5) return std::sqrt(x);
  return std::pow(x, e);
}

// prod x_i^e_i with the 0 * inf = 0 rule: a vanishing factor wins over an infinite one.
inline double power_product(std::initializer_list<std::pair<double, double>> factors) {
  bool zero = false, inf = false;
  double log_sum = 0.0;
  for (auto [x, e] : factors) {
    if (e == 0.0) continue;
    if (x == 0.0) {
      (e > 0 ? zero : inf) = true;
    } else if (std::isinf(x)) {
      (e > 0 ? inf : zero) = true;
    } else {
      log_sum += e * std::log(x);
    }
  }
  if (zero) return 0.0;
  if (inf) return kInf;
  return std::exp(log_sum);
}

// Gauss-Legendre nodes/weights on [-1,1]
struct GaussRule {
  std::vector<double> nodes, weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.nodes[i] = x;
    g.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

// log-spaced abscissae lo * 10^(k/ppd); refining ppd by an integer factor yields a superset
inline std::vector<double> log_lattice(double lo, double hi, double per_decade) {
  std::vector<double> xs;
  double span = std::log10(hi / lo) * per_decade;
  long n = static_cast<long>(std::floor(span + 1e-9));
  xs.reserve(n + 1);
  for (long k = 0; k <= n; ++k) xs.push_back(lo * std::pow(10.0, static_cast<double>(k) / per_decade));
  return xs;
}

// golden-section maximisation of f on [lo,hi]; returns (argmax, max)
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iters = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && (hi - lo) > 1e-14 * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace steklov
