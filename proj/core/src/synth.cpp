#include "cmrkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmrkit/rng.hpp"

namespace cmrkit {

namespace {

double gen_delta(const PowerLaw2& gen, double t) {
  return gen.alpha2 * std::pow(t, gen.s2) + gen.alpha3 * std::pow(t, gen.s3) +
         gen.beta2;
}

long grid_count(const Range& r, double resolution) {
  if (!(r.hi >= r.lo)) throw std::invalid_argument("grid range inverted");
  return static_cast<long>(std::floor((r.hi - r.lo) / resolution)) + 1;
}

// First t on a log grid with c1*t^e1 + c2*t^e2 + c3*t^e3 <= 0. Powers advance
// by one multiply per step and are recomputed exactly every 4096 steps to keep
// drift out of the sign test.
std::optional<double> scan_first_nonpositive(double c1, double e1, double c2,
                                             double e2, double c3, double e3,
                                             double t_min, double t_max,
                                             long n_points) {
  const double ratio =
      std::pow(t_max / t_min, 1.0 / static_cast<double>(n_points - 1));
  const double m1 = std::pow(ratio, e1);
  const double m2 = std::pow(ratio, e2);
  const double m3 = std::pow(ratio, e3);
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  for (long i = 0; i < n_points; ++i) {
    if (i % 4096 == 0) {
      const double t = t_min * std::pow(ratio, static_cast<double>(i));
      p1 = std::pow(t, e1);
      p2 = std::pow(t, e2);
      p3 = std::pow(t, e3);
    }
    if (c1 * p1 + c2 * p2 + c3 * p3 <= 0.0) {
      return t_min * std::pow(ratio, static_cast<double>(i));
    }
    p1 *= m1;
    p2 *= m2;
    p3 *= m3;
  }
  return std::nullopt;
}

struct FamilyShape {
  double dom_alpha;  // negative
  double s1;
  double s2;
  double s3;
  double gen_g0;  // alpha2(R) = g0 + g1 * R
  double gen_g1;
  double alpha3;  // negative, shared across ratios
};

RatioTruth make_ratio_truth(const FamilyShape& f, double ratio) {
  RatioTruth rt;
  rt.ratio = ratio;
  rt.dom = PowerLaw1{f.dom_alpha, f.s1, 0.0};
  rt.gen = PowerLaw2{f.gen_g0 + f.gen_g1 * ratio, f.s2, f.alpha3, f.s3, 0.0};
  return rt;
}

// Peak location and height of the rising-then-falling general delta loss.
double gen_peak_location(const PowerLaw2& gen) {
  return std::pow(gen.alpha2 * gen.s2 / (-gen.alpha3 * gen.s3),
                  1.0 / (gen.s3 - gen.s2));
}

// Up-crossing of level on the rising branch (t in (0, peak)), by bisection on
// the raw formula.
double rising_crossing(const PowerLaw2& gen, double level, double peak) {
  double lo = peak * 1e-9;
  double hi = peak;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12 * mid) break;
    if (gen_delta(gen, mid) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

bool label_margins_ok(const RatioTruth& rt, const FeasibilityConfig& cfg) {
  const double eps = cfg.epsilon;
  const double peak_t = gen_peak_location(rt.gen);
  const double peak_h = gen_delta(rt.gen, peak_t);

  // Peak either clearly inside or clearly outside the tolerance band.
  if (peak_h > 0.8 * eps && peak_h < 1.2 * eps) return false;

  for (const double budget : {cfg.t_max, 2.0 * cfg.t_max}) {
    // End-of-budget tolerance decision must have slack.
    if (std::abs(gen_delta(rt.gen, budget) - eps) < 0.1 * eps) return false;

    // T0 robustly inside or outside the budget.
    const auto t0 = grid_t0_oracle(rt.dom, rt.gen, cfg.lambda, cfg.t_min,
                                   1.1 * budget, 50000);
    if (t0 && *t0 > 0.92 * budget && *t0 < 1.08 * budget) return false;

    // Budget monotonicity needs the slope to stay positive at least until
    // the tolerance band is first entered (then the feasible budgets are a
    // single upward-closed set).
    if (peak_h > eps) {
      const double up = rising_crossing(rt.gen, eps, peak_t);
      if (!t0 || *t0 < 1.02 * up) return false;
    }
  }
  return true;
}

}  // namespace

void validate(const GroundTruth& truth) {
  if (truth.ratios.empty()) {
    throw std::invalid_argument("ground truth has no ratios");
  }
  if (!(truth.noise_sigma >= 0.0)) {
    throw std::invalid_argument("noise sigma must be >= 0");
  }
  if (!(truth.baseline_gen > 0.0) || !(truth.baseline_dom > 0.0)) {
    throw std::invalid_argument("baselines must be positive");
  }
  double prev = -1.0;
  for (const auto& rt : truth.ratios) {
    if (!(rt.ratio >= 0.0 && rt.ratio <= 1.0)) {
      throw std::invalid_argument("ratio out of [0,1]");
    }
    if (rt.ratio <= prev) {
      throw std::invalid_argument("ratios must be strictly increasing");
    }
    prev = rt.ratio;
    if (!(rt.dom.alpha * rt.dom.s < 0.0)) {
      throw std::invalid_argument(
          "domain delta law must be strictly decreasing (alpha * s < 0)");
    }
  }
}

std::vector<TrainingCurve> generate_family(const GroundTruth& truth,
                                           std::span<const double> t_grid) {
  validate(truth);
  if (t_grid.size() < 4) {
    throw std::invalid_argument("t grid needs at least 4 points");
  }
  Rng rng(truth.seed);
  std::vector<TrainingCurve> out;
  out.reserve(truth.ratios.size());
  for (const auto& rt : truth.ratios) {
    TrainingCurve c;
    c.model_label = truth.model_label;
    c.ratio = rt.ratio;
    c.baseline_gen = truth.baseline_gen;
    c.baseline_dom = truth.baseline_dom;
    for (const double t : t_grid) {
      const double noise =
          truth.noise_sigma > 0.0 ? rng.normal(0.0, truth.noise_sigma) : 0.0;
      c.gen_samples.push_back(
          {t, truth.baseline_gen + gen_delta(rt.gen, t) + noise});
    }
    for (const double t : t_grid) {
      const double noise =
          truth.noise_sigma > 0.0 ? rng.normal(0.0, truth.noise_sigma) : 0.0;
      const double dom_delta = rt.dom.alpha * std::pow(t, rt.dom.s) + rt.dom.beta;
      c.dom_samples.push_back({t, truth.baseline_dom + dom_delta + noise});
    }
    validate(c);
    out.push_back(std::move(c));
  }
  return out;
}

FeasibilityVerdict true_verdict(const RatioTruth& rt,
                                const FeasibilityConfig& config) {
  FeasibilityVerdict v;
  v.ratio = rt.ratio;
  v.in_tolerance_set = gen_delta(rt.gen, config.t_max) <= config.epsilon;
  v.t0 = grid_t0_oracle(rt.dom, rt.gen, config.lambda, config.t_min,
                        config.t_max, 200000);
  v.feasible = v.in_tolerance_set && v.t0.has_value();
  return v;
}

std::optional<double> true_cmr(const GroundTruth& truth,
                               const FeasibilityConfig& config) {
  std::optional<double> best;
  for (const auto& rt : truth.ratios) {
    const auto v = true_verdict(rt, config);
    if (v.feasible && (!best || v.ratio > *best)) best = v.ratio;
  }
  return best;
}

std::pair<PowerLaw1, double> grid_fit_power1(std::span<const Point> points,
                                             const GridBox1& box,
                                             double resolution) {
  if (points.empty()) throw std::invalid_argument("no points");
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be > 0");
  const long na = grid_count(box.alpha, resolution);
  const long ns = grid_count(box.s, resolution);
  const long nb = grid_count(box.beta, resolution);
  if (na * ns * nb > 100000000L) {
    throw std::invalid_argument("grid too large (> 1e8 cells)");
  }

  PowerLaw1 best{};
  double best_sse = std::numeric_limits<double>::infinity();
  for (long is = 0; is < ns; ++is) {
    const double s = box.s.lo + resolution * static_cast<double>(is);
    std::vector<double> xs(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
      xs[k] = std::pow(points[k].x, s);
    }
    for (long ia = 0; ia < na; ++ia) {
      const double alpha = box.alpha.lo + resolution * static_cast<double>(ia);
      for (long ib = 0; ib < nb; ++ib) {
        const double beta = box.beta.lo + resolution * static_cast<double>(ib);
        double sse = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
          const double r = alpha * xs[k] + beta - points[k].y;
          sse += r * r;
        }
        if (sse < best_sse) {
          best_sse = sse;
          best = PowerLaw1{alpha, s, beta};
        }
      }
    }
  }
  return {best, best_sse};
}

std::pair<PowerLaw2, double> grid_fit_power2(std::span<const Point> points,
                                             const GridBox2& box,
                                             double resolution) {
  if (points.empty()) throw std::invalid_argument("no points");
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be > 0");
  const long n1 = grid_count(box.alpha2, resolution);
  const long n2 = grid_count(box.s2, resolution);
  const long n3 = grid_count(box.alpha3, resolution);
  const long n4 = grid_count(box.s3, resolution);
  const long n5 = grid_count(box.beta2, resolution);
  if (n1 * n2 * n3 * n4 * n5 > 100000000L) {
    throw std::invalid_argument("grid too large (> 1e8 cells)");
  }

  PowerLaw2 best{};
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> xa(points.size());
  std::vector<double> xb(points.size());
  for (long i2 = 0; i2 < n2; ++i2) {
    const double s2 = box.s2.lo + resolution * static_cast<double>(i2);
    for (std::size_t k = 0; k < points.size(); ++k) {
      xa[k] = std::pow(points[k].x, s2);
    }
    for (long i4 = 0; i4 < n4; ++i4) {
      const double s3 = box.s3.lo + resolution * static_cast<double>(i4);
      for (std::size_t k = 0; k < points.size(); ++k) {
        xb[k] = std::pow(points[k].x, s3);
      }
      for (long i1 = 0; i1 < n1; ++i1) {
        const double a2 = box.alpha2.lo + resolution * static_cast<double>(i1);
        for (long i3 = 0; i3 < n3; ++i3) {
          const double a3 = box.alpha3.lo + resolution * static_cast<double>(i3);
          for (long i5 = 0; i5 < n5; ++i5) {
            const double b2 = box.beta2.lo + resolution * static_cast<double>(i5);
            double sse = 0.0;
            for (std::size_t k = 0; k < points.size(); ++k) {
              const double r = a2 * xa[k] + a3 * xb[k] + b2 - points[k].y;
              sse += r * r;
            }
            if (sse < best_sse) {
              best_sse = sse;
              best = PowerLaw2{a2, s2, a3, s3, b2};
            }
          }
        }
      }
    }
  }
  return {best, best_sse};
}

std::optional<double> grid_t0_oracle(const PowerLaw1& dom_law,
                                     const PowerLaw2& gen_law, double lambda,
                                     double t_min, double t_max,
                                     long n_points) {
  if (n_points < 1000) {
    throw std::invalid_argument("grid_t0_oracle: needs n_points >= 1000");
  }
  if (!(t_min > 0.0) || !(t_max > t_min)) {
    throw std::invalid_argument("need 0 < t_min < t_max");
  }
  return scan_first_nonpositive(
      dom_law.alpha * dom_law.s, dom_law.s - 1.0,
      lambda * gen_law.alpha2 * gen_law.s2, gen_law.s2 - 1.0,
      lambda * gen_law.alpha3 * gen_law.s3, gen_law.s3 - 1.0, t_min, t_max,
      n_points);
}

GroundTruth draw_realistic_family(std::uint64_t seed, int n_ratios,
                                  double ratio_lo, double ratio_hi,
                                  const FeasibilityConfig& config) {
  validate(config);
  if (n_ratios < 2 || !(ratio_lo > 0.0) || !(ratio_hi > ratio_lo) ||
      !(ratio_hi <= 1.0)) {
    throw std::invalid_argument("bad ratio grid for family draw");
  }

  for (int attempt = 0; attempt < 200; ++attempt) {
    Rng rng(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(attempt));

    FamilyShape f;
    f.s1 = rng.uniform(0.40, 0.65);
    f.s2 = rng.uniform(0.25, f.s1 - 0.08);
    f.s3 = f.s2 + rng.uniform(0.5, 0.9);
    const double dom_drop = rng.uniform(0.08, 0.30);
    f.dom_alpha = -dom_drop / std::pow(config.t_max, f.s1);

    const double r_mid = 0.5 * (ratio_lo + ratio_hi);
    const double peak_t_mid = config.t_max * rng.uniform(0.15, 0.60);
    const double peak_h_mid = config.epsilon * rng.uniform(0.5, 2.5);
    const double alpha2_mid =
        peak_h_mid / (std::pow(peak_t_mid, f.s2) * (1.0 - f.s2 / f.s3));
    f.alpha3 =
        -alpha2_mid * f.s2 * std::pow(peak_t_mid, f.s2 - f.s3) / f.s3;
    const double frac = rng.uniform(0.5, 0.9);
    f.gen_g1 = frac * alpha2_mid / r_mid;
    f.gen_g0 = alpha2_mid - f.gen_g1 * r_mid;

    GroundTruth truth;
    truth.model_label = "synthetic";
    truth.baseline_gen = 2.0;
    truth.baseline_dom = 1.8;
    truth.noise_sigma = 1e-4;
    truth.seed = seed;
    bool ok = f.gen_g0 > 0.0;
    for (int i = 0; ok && i < n_ratios; ++i) {
      const double r =
          ratio_lo + (ratio_hi - ratio_lo) * static_cast<double>(i) /
                         static_cast<double>(n_ratios - 1);
      const auto rt = make_ratio_truth(f, r);
      if (!label_margins_ok(rt, config)) {
        ok = false;
        break;
      }
      truth.ratios.push_back(rt);
    }
    if (ok) {
      validate(truth);
      return truth;
    }
  }
  throw std::runtime_error("could not draw a family with robust labels");
}

}  // namespace cmrkit
