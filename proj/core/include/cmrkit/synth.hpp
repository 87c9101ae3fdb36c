#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmrkit/curves.hpp"
#include "cmrkit/feasibility.hpp"
#include "cmrkit/fit.hpp"
#include "cmrkit/model.hpp"

namespace cmrkit {

// True per-ratio laws behind a generated family. Domain delta loss must be
// strictly decreasing (alpha * s < 0); any two-term power law already has at
// most one interior extremum, matching the observed general-loss shape.
struct RatioTruth {
  double ratio = 0.0;
  PowerLaw1 dom;
  PowerLaw2 gen;
};

struct GroundTruth {
  std::string model_label = "synthetic";
  double baseline_gen = 2.0;
  double baseline_dom = 1.8;
  double noise_sigma = 1e-4;
  std::uint64_t seed = 1;
  std::vector<RatioTruth> ratios;
};

void validate(const GroundTruth& truth);

// Samples curves from the true laws plus seeded Gaussian noise on the loss
// values. Deterministic given the seed; labels depend only on the truth.
std::vector<TrainingCurve> generate_family(const GroundTruth& truth,
                                           std::span<const double> t_grid);

// Ground-truth feasibility labels straight from the true parameters. These
// never touch the classification path they are used to check: tolerance is
// direct formula arithmetic and T0 comes from the grid scan below.
FeasibilityVerdict true_verdict(const RatioTruth& rt,
                                const FeasibilityConfig& config);
std::optional<double> true_cmr(const GroundTruth& truth,
                               const FeasibilityConfig& config);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct GridBox1 {
  Range alpha;
  Range s;
  Range beta;
};

struct GridBox2 {
  Range alpha2;
  Range s2;
  Range alpha3;
  Range s3;
  Range beta2;
};

// Exhaustive SSE minimization over a parameter grid with the given step per
// dimension; a quality floor the main fitter has to beat or match. Guarded to
// at most 1e8 cells. Returns best parameters and their SSE.
std::pair<PowerLaw1, double> grid_fit_power1(std::span<const Point> points,
                                             const GridBox1& box,
                                             double resolution);
std::pair<PowerLaw2, double> grid_fit_power2(std::span<const Point> points,
                                             const GridBox2& box,
                                             double resolution);

// First point of a log-spaced grid where the objective slope is non-positive,
// or absent. Slope terms are evaluated by this module's own arithmetic.
// Needs n_points >= 1000.
std::optional<double> grid_t0_oracle(const PowerLaw1& dom_law,
                                     const PowerLaw2& gen_law, double lambda,
                                     double t_min, double t_max,
                                     long n_points);

// Draws a family in the empirically observed regime: domain delta loss
// decreasing, general delta loss rising to a single peak that grows with the
// ratio. Redraws until every ratio's feasibility label has a robust margin
// under the given config (and under the doubled budget), so fitted
// classifications and budget-monotonicity checks are not decided by noise.
GroundTruth draw_realistic_family(std::uint64_t seed, int n_ratios,
                                  double ratio_lo, double ratio_hi,
                                  const FeasibilityConfig& config);

}  // namespace cmrkit
