#pragma once

#include <cmath>
#include <vector>

#include "steklov/numeric.hpp"

namespace steklov {

struct GridSpec {
  double lo = 0x1p-20;
  double hi = 0x1p20;
  double per_decade = 512;

  std::vector<double> points() const { return log_lattice(lo, hi, per_decade); }
  GridSpec refined(double factor = 2.0) const { return {lo, hi, per_decade * factor}; }
  bool operator==(const GridSpec&) const = default;
};

}  // namespace steklov
