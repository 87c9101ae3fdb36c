#pragma once

#include <vector>

namespace cmrkit {

// Monotone piecewise-cubic interpolation (Fritsch-Carlson slopes). Exact on
// linear data; never overshoots monotone data. Evaluation clamps to the knot
// range.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double x_lo() const { return x_.front(); }
  double x_hi() const { return x_.back(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;  // knot derivatives
};

}  // namespace cmrkit
