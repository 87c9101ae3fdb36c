#pragma once

#include <optional>
#include <vector>

#include "cmrkit/model.hpp"

namespace cmrkit {

struct FeasibilityConfig {
  double epsilon = 0.05;   // tolerated rise of general loss, nats
  double lambda = 1000.0;  // Lagrange multiplier weighting the constraint
  double t_max = 100.0;    // training budget, units
  double t_min = 1e-3;     // search floor (power forms are singular at 0)
};

// Throws std::invalid_argument unless epsilon >= 0, lambda > 0 and
// 0 < t_min < t_max.
void validate(const FeasibilityConfig& config);

struct FeasibilityVerdict {
  double ratio = 0.0;
  bool in_tolerance_set = false;
  std::optional<double> t0;
  bool feasible = false;
};

// Sub-interval of (0,1] where the end-of-training general loss stays within
// tolerance. Membership at ratio 0 is always false.
struct RatioInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;

  bool contains(double ratio) const {
    return !empty && ratio > 0.0 && ratio >= lo && ratio <= hi;
  }
};

// Objective value (baseline_dom + delta_dom) + lambda * (delta_gen - epsilon).
double lagrangian(double delta_dom_at_t, double delta_gen_at_t,
                  double baseline_dom, double lambda, double epsilon);

// Analytic d/dt of the delta-loss laws; t must be positive.
double d_delta_dom(const PowerLaw1& law, double t);
double d_delta_gen(const PowerLaw2& law, double t);

// d/dt of the objective: d_delta_dom(t) + lambda * d_delta_gen(t).
double objective_slope(const PowerLaw1& dom_law, const PowerLaw2& gen_law,
                       double lambda, double t);

struct T0Result {
  std::optional<double> t0;
  bool at_search_floor = false;  // slope already non-positive at t_min
  // Cross-check by the closed-form fixed-point iteration; absent when the
  // iteration diverges or settles outside [t_min, t_max]. Divergence is
  // informational, never an error.
  std::optional<double> fixed_point;
  bool fixed_point_agrees = false;
};

// Smallest t in [t_min, t_max] with objective_slope(t) <= 0: t_min itself if
// the slope starts non-positive, otherwise the first sign crossing refined by
// bisection. The slope is a three-term power sum, so it has at most one
// interior critical point; brackets come from that closed form rather than a
// scan, making presence/absence exact. Absent when the slope is positive on
// the whole interval.
T0Result solve_t0(const PowerLaw1& dom_law, const PowerLaw2& gen_law,
                  double lambda, double t_min, double t_max);

// Plain fixed-point iteration on the closed-form rearrangement of
// objective_slope = 0. Returns the converged value, or absent on divergence.
std::optional<double> fixed_point_t0(const PowerLaw1& dom_law,
                                     const PowerLaw2& gen_law, double lambda,
                                     double t_init, int max_iterations = 200);

// Tolerance set computed from the fitted end-of-training general-loss law
// over the ratio: { R in (0,1] : law(R) <= baseline_gen + epsilon }. The
// single-term power form is monotone, so the region is one interval with an
// analytic boundary.
RatioInterval tolerance_set(const PowerLaw1& gen_ratio_law, double baseline_gen,
                            double epsilon);

// feasible <=> ratio in tolerance set AND the slope turns non-positive within
// the budget.
FeasibilityVerdict classify_ratio(double ratio, const PowerLaw1& dom_law,
                                  const PowerLaw2& gen_law,
                                  const RatioInterval& tol_set,
                                  const FeasibilityConfig& config);

// Trajectory slope d(delta_gen)/d(delta_dom) at t; equals -1/lambda at an
// interior T0. Absent when the domain derivative vanishes.
std::optional<double> chain_rule_ratio(const PowerLaw1& dom_law,
                                       const PowerLaw2& gen_law, double t);

// Maximum feasible ratio, or absent when nothing is feasible.
std::optional<double> cmr_from_verdicts(
    const std::vector<FeasibilityVerdict>& verdicts);

}  // namespace cmrkit
