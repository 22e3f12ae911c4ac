#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace steklov {

// Piecewise constant function on [edges.front(), edges.back()), zero elsewhere.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> edges, std::vector<double> values)
      : edges_(std::move(edges)), values_(std::move(values)) {
    if (edges_.size() != values_.size() + 1 || values_.empty())
      throw std::invalid_argument("step function needs n+1 edges for n values");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(edges_[i + 1] > edges_[i])) throw std::invalid_argument("step edges must increase");
      if (!std::isfinite(values_[i])) throw std::invalid_argument("step values must be finite");
    }
    cum_.resize(edges_.size());
    cum_[0] = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) cum_[i + 1] = cum_[i] + values_[i] * (edges_[i + 1] - edges_[i]);
  }

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double operator()(double x) const {
    if (empty() || x < edges_.front() || x >= edges_.back()) return 0.0;
    return values_[cell(x)];
  }

  // exact integral over [lo, hi]
  double integral(double lo, double hi) const {
    if (empty()) return 0.0;
    lo = std::max(lo, edges_.front());
    hi = std::min(hi, edges_.back());
    if (!(hi > lo)) return 0.0;
    std::size_t i = cell(lo), j = cell(hi);
    if (i == j) return values_[i] * (hi - lo);
    double s = values_[i] * (edges_[i + 1] - lo) + values_[j] * (hi - edges_[j]);
    if (j - i <= 64) {
      for (std::size_t k = i + 1; k < j; ++k) s += values_[k] * (edges_[k + 1] - edges_[k]);
    } else {
      s += cum_[j] - cum_[i + 1];
    }
    return s;
  }

 private:
  std::size_t cell(double x) const {
    std::size_t k = std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin();
    return std::min(k == 0 ? 0 : k - 1, values_.size() - 1);
  }

  std::vector<double> edges_, values_, cum_;
};

}  // namespace steklov
