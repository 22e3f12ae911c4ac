#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "steklov/errors.hpp"

namespace steklov {

// Exponent triple with the derived conjugates. q may drop below 1; p may not.
struct Exponents {
  double p = 2.0;
  double q = 2.0;
  std::optional<double> lambda;

  Exponents() = default;
  Exponents(double p_, double q_, std::optional<double> lam = std::nullopt) : p(p_), q(q_), lambda(lam) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must satisfy 1 < p < inf");
    if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("q must be positive and finite");
    if (lambda && !(*lambda > 0.0 && *lambda < 1.0))
      throw std::invalid_argument("lambda must lie in (0,1)");
  }

  double p_conj() const { return p / (p - 1.0); }

  // q' = q/(q-1); negative for q < 1, absent for q == 1
  std::optional<double> q_conj() const {
    if (q == 1.0) return std::nullopt;
    return q / (q - 1.0);
  }

  // r with 1/r = 1/q - 1/p, only meaningful when q < p
  std::optional<double> r() const {
    if (p == q) return std::nullopt;
    return p * q / (p - q);
  }

  bool upper_regime() const { return p <= q; }  // the sup-type functionals apply
  bool lower_regime() const { return q < p; }   // the integral-type functionals apply

  double lam() const {
    if (!lambda) throw std::invalid_argument("lambda is not set");
    return *lambda;
  }

  double rho_power() const { return 1.0 - p_conj(); }  // v^(1-p') is the dual density

  bool operator==(const Exponents&) const = default;
};

inline double require_q_conj(const Exponents& e) {
  auto qc = e.q_conj();
  if (!qc) throw std::invalid_argument("q' is undefined for q = 1");
  return *qc;
}

inline double require_r(const Exponents& e) {
  auto r = e.r();
  if (!r || !(e.q < e.p)) throw std::invalid_argument("r requires q < p");
  return *r;
}

}  // namespace steklov
