#pragma once

#include <optional>

namespace cmrkit {

// Single-term power law  y = alpha * x^s + beta.
// Used for the domain-loss-vs-ratio law, the domain delta-loss-vs-tokens law
// and the critical-ratio-vs-budget law.
struct PowerLaw1 {
  double alpha = 0.0;
  double s = 0.0;
  double beta = 0.0;
};

// Two-term power law  y = alpha2 * x^s2 + alpha3 * x^s3 + beta2.
// Captures general delta loss over training volume, which can rise before it
// falls. Canonical form orders the exponents s2 < s3.
struct PowerLaw2 {
  double alpha2 = 0.0;
  double s2 = 0.0;
  double alpha3 = 0.0;
  double s3 = 0.0;
  double beta2 = 0.0;
};

struct FitDiagnostics {
  double mse = 0.0;
  std::optional<double> r2;  // absent when the sample variance is zero
  int n_points = 0;
  bool converged = false;
  int n_restarts_used = 0;
  bool near_collinear = false;  // two-term fit with |s2 - s3| < 1e-3
};

// Exact formula evaluation; x must be positive (negative exponents are
// singular at zero).
double evaluate(const PowerLaw1& law, double x);
double evaluate(const PowerLaw2& law, double x);

// Swaps the two terms if needed so that s2 < s3 holds.
PowerLaw2 canonicalize(const PowerLaw2& law);

}  // namespace cmrkit
