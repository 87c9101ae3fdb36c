#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cmrkit/feasibility.hpp"
#include "cmrkit/fit.hpp"
#include "cmrkit/interp.hpp"
#include "cmrkit/model.hpp"

namespace cmrkit {

// Fitted critical-mixture-ratio law  R(T) = alpha4 * T^s4 + beta3.
struct CmrLaw {
  double alpha4 = 0.0;
  double s4 = 0.0;
  double beta3 = 0.0;
  double fit_lo = 0.0;  // budget range the law was fitted on
  double fit_hi = 0.0;
};

struct CmrPrediction {
  double ratio = 0.0;
  bool clamped = false;       // raw value fell outside [0,1]
  bool extrapolated = false;  // t outside the fitted budget range
};

struct FrontierPoint {
  double budget = 0.0;
  std::optional<double> cmr;
  bool at_ratio_range_edge = false;  // critical ratio hit the family's edge
};

// Per-ratio fitted laws, made continuous in the ratio by monotone
// piecewise-cubic interpolation of each law parameter. Terms whose
// contribution over the fitted t-range is negligible are zeroed first so a
// junk exponent from a degenerate fit cannot leak into the interpolation;
// material exponent tracks are assumed not to cross between knots.
class LawFamily {
 public:
  LawFamily(std::vector<double> ratios, std::vector<PowerLaw1> dom_laws,
            std::vector<PowerLaw2> gen_laws, double t_lo, double t_hi);

  PowerLaw1 dom_at(double ratio) const;
  PowerLaw2 gen_at(double ratio) const;
  double ratio_lo() const { return ratio_lo_; }
  double ratio_hi() const { return ratio_hi_; }
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }

 private:
  double ratio_lo_ = 0.0;
  double ratio_hi_ = 0.0;
  double t_lo_ = 0.0;
  double t_hi_ = 0.0;
  Pchip dom_alpha_, dom_s_, dom_beta_;
  Pchip gen_alpha2_, gen_s2_, gen_alpha3_, gen_s3_, gen_beta2_;
};

// Critical ratio for one budget: the largest ratio in the family's range that
// is feasible under the config with t_max = budget, located by bisection on
// the interpolated laws (the returned value is feasibility-certified, within
// r_tol of the boundary). Absent when even the smallest ratio is infeasible.
std::optional<double> critical_ratio_at(const LawFamily& family,
                                        const FeasibilityConfig& config,
                                        double budget, double r_tol,
                                        bool* at_range_edge = nullptr);

// Frontier over a strictly increasing budget grid.
std::vector<FrontierPoint> frontier(const LawFamily& family,
                                    const FeasibilityConfig& config,
                                    std::span<const double> budget_grid,
                                    double r_tol = 1e-4);

// Power-law fit of the (budget, cmr) frontier; needs >= 4 present points.
std::pair<CmrLaw, FitDiagnostics> fit_cmr_law(
    std::span<const FrontierPoint> points, const FitOptions& options = {});

CmrPrediction predict_cmr(const CmrLaw& law, double t);

}  // namespace cmrkit
