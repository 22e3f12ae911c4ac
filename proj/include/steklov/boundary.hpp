#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/grid.hpp"
#include "steklov/monotone_map.hpp"

namespace steklov {

// Pair of boundary functions a < b; the operator integrates over [a(x), b(x)].
class BoundaryPair {
 public:
  enum class Kind { linear, power, table };

  BoundaryPair(MonotoneMap a, MonotoneMap b, Kind kind) : a_(std::move(a)), b_(std::move(b)), kind_(kind) {}

  // a(x) = xi x, b(x) = x
  static BoundaryPair linear(double xi) { return linear(xi, 1.0); }
  static BoundaryPair linear(double ca, double cb) {
    return {MonotoneMap::linear(ca), MonotoneMap::linear(cb), Kind::linear};
  }
  static BoundaryPair power(double ca, double cb, double e) {
    return {MonotoneMap::power(ca, e), MonotoneMap::power(cb, e), e == 1.0 ? Kind::linear : Kind::power};
  }
  static BoundaryPair table(const std::vector<double>& xs, const std::vector<double>& as,
                            const std::vector<double>& bs) {
    return {MonotoneMap::table(xs, as), MonotoneMap::table(xs, bs), Kind::table};
  }

  double a(double x) const { return a_(x); }
  double b(double x) const { return b_(x); }
  double a_inv(double y) const { return a_.inverse(y); }
  double b_inv(double y) const { return b_.inverse(y); }
  const MonotoneMap& a_map() const { return a_; }
  const MonotoneMap& b_map() const { return b_; }
  Kind kind() const { return kind_; }

  // pair of the adjoint operator: H* f(y) integrates f over [b^-1(y), a^-1(y)]
  BoundaryPair dual() const { return {b_.as_inverse(), a_.as_inverse(), kind_}; }

 private:
  MonotoneMap a_, b_;
  Kind kind_;
};

struct ValidityReport {
  enum class Violation { none, not_positive, not_ordered, not_increasing, inverse_mismatch, bad_limits };
  bool valid = true;
  Violation violation = Violation::none;
  double at = 0.0;
  std::string message;
};

inline ValidityReport validate(const BoundaryPair& pair, const GridSpec& grid = {0x1p-40, 0x1p40, 8}) {
  using V = ValidityReport::Violation;
  auto fail = [](V v, double x, std::string msg) {
    return ValidityReport{false, v, x, std::move(msg) + " at x=" + std::to_string(x)};
  };
  auto xs = grid.points();
  double pa = 0, pb = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double x = xs[i], a = pair.a(x), b = pair.b(x);
    if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
      return fail(V::not_positive, x, "boundary values must be positive and finite");
    if (!(a < b)) return fail(V::not_ordered, x, "a(x) < b(x) fails");
    if (i > 0 && (!(a > pa) || !(b > pb))) return fail(V::not_increasing, x, "boundary is not strictly increasing");
    if (std::abs(pair.a_inv(a) / x - 1.0) > 1e-10 || std::abs(pair.b_inv(b) / x - 1.0) > 1e-10)
      return fail(V::inverse_mismatch, x, "inverse round trip exceeds 1e-10");
    pa = a;
    pb = b;
  }
  // limits at 0 and infinity: demand a visible power-law trend over the outer two decades
  if (xs.size() >= 3 && grid.hi / grid.lo > 1e4) {
    double lo = xs.front(), hi = xs.back();
    auto slope = [](double f1, double f0) { return std::log(f1 / f0) / std::log(100.0); };
    if (slope(pair.a(lo * 100), pair.a(lo)) < 1e-3 || slope(pair.b(lo * 100), pair.b(lo)) < 1e-3)
      return fail(V::bad_limits, lo, "boundary does not tend to 0");
    if (slope(pair.a(hi), pair.a(hi / 100)) < 1e-3 || slope(pair.b(hi), pair.b(hi / 100)) < 1e-3)
      return fail(V::bad_limits, hi, "boundary does not tend to infinity");
  }
  return {};
}

// Doubly indexed sequence x_k for k in [k_first, k_first + size).
struct PointSequence {
  int k_first = 0;
  std::vector<double> values;
  bool truncated = false;   // hit the representable (or requested) range
  bool degenerate = false;  // iteration stalled

  int k_last() const { return k_first + static_cast<int>(values.size()) - 1; }
  bool contains(int k) const { return k >= k_first && k <= k_last(); }
  double at(int k) const {
    if (!contains(k)) throw OutOfRangeError("sequence index " + std::to_string(k) + " outside computed range");
    return values[k - k_first];
  }
  bool operator==(const PointSequence&) const = default;
};

struct SequenceRange {
  int k_min = -100000;
  int k_max = 100000;
  double lo = 0x1p-40;  // stop once iterates leave [lo, hi]
  double hi = 0x1p40;
};

namespace detail {

template <class Fwd, class Bwd>
PointSequence iterate_both(double seed, Fwd fwd, Bwd bwd, const SequenceRange& range) {
  auto inside = [&](double x) { return std::isfinite(x) && x >= range.lo && x <= range.hi && x > 0; };
  PointSequence s;
  std::vector<double> up{seed}, down;
  bool stalled = false, clipped = false;
  double x = seed;
  for (int k = 1; k <= range.k_max; ++k) {
    double nx = fwd(x);
    if (!inside(nx)) {
      clipped = true;
      break;
    }
    if (!(nx > x * (1 + 1e-15))) {
      stalled = true;
      break;
    }
    up.push_back(x = nx);
  }
  x = seed;
  for (int k = -1; k >= range.k_min; --k) {
    double nx = bwd(x);
    if (!inside(nx)) {
      clipped = true;
      break;
    }
    if (!(nx < x * (1 - 1e-15))) {
      stalled = true;
      break;
    }
    down.push_back(x = nx);
  }
  s.k_first = -static_cast<int>(down.size());
  s.values.assign(down.rbegin(), down.rend());
  s.values.insert(s.values.end(), up.begin(), up.end());
  s.truncated = clipped;
  s.degenerate = stalled;
  return s;
}

}  // namespace detail

// points with x_{k+1} = a^-1(b(x_k)) and x_0 = 1; they tile (0, inf) into blocks on
// which the operator splits into two one-sided pieces
inline PointSequence xi_sequence(const BoundaryPair& pair, const SequenceRange& range = {}) {
  return detail::iterate_both(
      1.0, [&](double x) { return pair.a_inv(pair.b(x)); }, [&](double x) { return pair.b_inv(pair.a(x)); }, range);
}

// eta_k = a(xi_k)
inline PointSequence eta_sequence(const BoundaryPair& pair, const PointSequence& xi) {
  PointSequence e = xi;
  for (double& v : e.values) v = pair.a(v);
  return e;
}

// eta_{k+1} = a^-1(eta_k)
inline PointSequence eta_chain(const BoundaryPair& pair, double seed = 1.0, const SequenceRange& range = {}) {
  return detail::iterate_both(
      seed, [&](double x) { return pair.a_inv(x); }, [&](double x) { return pair.a(x); }, range);
}

// zeta_{k+1} = b(zeta_k); stalls when b has a fixed point, which is flagged
inline PointSequence zeta_chain(const BoundaryPair& pair, double seed = 1.0, const SequenceRange& range = {}) {
  return detail::iterate_both(
      seed, [&](double x) { return pair.b(x); }, [&](double x) { return pair.b_inv(x); }, range);
}

struct Interval {
  double lo = 0, hi = 0;
  double length() const { return hi - lo; }
  bool empty() const { return !(hi > lo); }
  bool contains(double x) const { return x >= lo && x < hi; }
  bool operator==(const Interval&) const = default;
};

// The eight intervals attached to a point t and a reference map s (with inverse s*):
//   span       = [a(t), b(t))              split at s(t)
//   reach      = [b^-1(s(t)), a^-1(s(t)))  split at t
//   preimage   = [b^-1(t), a^-1(t))        split at s*(t)
//   dual_span  = [a(s*(t)), b(s*(t)))      split at t
struct IntervalFamily {
  Interval span_left, span_right;
  Interval reach_left, reach_right;
  Interval preimage_left, preimage_right;
  Interval dual_span_left, dual_span_right;

  Interval span() const { return {span_left.lo, span_right.hi}; }
  Interval reach() const { return {reach_left.lo, reach_right.hi}; }
  Interval preimage() const { return {preimage_left.lo, preimage_right.hi}; }
  Interval dual_span() const { return {dual_span_left.lo, dual_span_right.hi}; }
};

inline void check_corridor(const BoundaryPair& pair, const MonotoneMap& ref, double t) {
  double s = ref(t);
  if (!(pair.a(t) < s && s < pair.b(t)))
    throw CorridorError("reference map leaves the corridor a(t) < s(t) < b(t) at t=" + std::to_string(t), t);
}

inline IntervalFamily intervals_at(const BoundaryPair& pair, const MonotoneMap& ref, double t) {
  check_corridor(pair, ref, t);
  double s = ref(t), si = ref.inverse(t);
  if (!(pair.b_inv(t) < si && si < pair.a_inv(t)))
    throw CorridorError("inverse reference map leaves the dual corridor at t=" + std::to_string(t), t);
  IntervalFamily f;
  f.span_left = {pair.a(t), s};
  f.span_right = {s, pair.b(t)};
  f.reach_left = {pair.b_inv(s), t};
  f.reach_right = {t, pair.a_inv(s)};
  f.preimage_left = {pair.b_inv(t), si};
  f.preimage_right = {si, pair.a_inv(t)};
  f.dual_span_left = {pair.a(si), t};
  f.dual_span_right = {t, pair.b(si)};
  return f;
}

}  // namespace steklov
