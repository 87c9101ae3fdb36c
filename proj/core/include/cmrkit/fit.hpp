#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cmrkit/model.hpp"

namespace cmrkit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Box constraints per parameter kind. The fitted regimes are far inside the
// defaults; the box keeps multi-start iterates from wandering off.
struct ParamBounds {
  double alpha_lo = -100.0;
  double alpha_hi = 100.0;
  double exp_lo = -3.0;
  double exp_hi = 3.0;
  double offset_lo = -10.0;
  double offset_hi = 10.0;
};

struct FitOptions {
  ParamBounds bounds;
  int restarts = 32;
  int max_iterations = 500;
  double rel_sse_tol = 1e-12;
  double grad_tol = 1e-10;
  std::uint64_t seed = 1;
};

// Least-squares fit of y = alpha * x^s + beta on raw residuals.
// Multi-start damped Gauss-Newton: initial exponents are drawn log-uniform in
// magnitude from [0.05, 2.5] with both signs, linear parameters from the
// least-squares solve given the sampled exponent. Best restart by SSE wins.
// Needs >= 4 points, all x > 0.
std::pair<PowerLaw1, FitDiagnostics> fit_power1(std::span<const Point> points,
                                                const FitOptions& options = {});

// Same engine for y = alpha2 * x^s2 + alpha3 * x^s3 + beta2. Output is
// canonicalized to s2 < s3; |s2 - s3| < 1e-3 sets the near_collinear flag.
// Needs >= 6 points, all x > 0.
std::pair<PowerLaw2, FitDiagnostics> fit_power2(std::span<const Point> points,
                                                const FitOptions& options = {});

FitDiagnostics compute_diagnostics(std::span<const Point> points,
                                   const PowerLaw1& law);
FitDiagnostics compute_diagnostics(std::span<const Point> points,
                                   const PowerLaw2& law);

double sum_squared_error(std::span<const Point> points, const PowerLaw1& law);
double sum_squared_error(std::span<const Point> points, const PowerLaw2& law);

}  // namespace cmrkit
