#include "cmrkit/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmrkit {

namespace {

struct PowerTerm {
  double c;  // coefficient
  double e;  // exponent
};

// Terms of d/dt [dom + lambda * gen], merged by exponent, zeros dropped,
// sorted by exponent.
std::vector<PowerTerm> slope_terms(const PowerLaw1& dom, const PowerLaw2& gen,
                                   double lambda) {
  std::vector<PowerTerm> raw = {
      {dom.alpha * dom.s, dom.s - 1.0},
      {lambda * gen.alpha2 * gen.s2, gen.s2 - 1.0},
      {lambda * gen.alpha3 * gen.s3, gen.s3 - 1.0},
  };
  std::sort(raw.begin(), raw.end(),
            [](const PowerTerm& a, const PowerTerm& b) { return a.e < b.e; });
  std::vector<PowerTerm> out;
  for (const auto& term : raw) {
    if (!out.empty() && out.back().e == term.e) {
      out.back().c += term.c;
    } else {
      out.push_back(term);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const PowerTerm& t) { return t.c == 0.0; }),
            out.end());
  return out;
}

double eval_terms(const std::vector<PowerTerm>& terms, double t) {
  double acc = 0.0;
  for (const auto& term : terms) acc += term.c * std::pow(t, term.e);
  return acc;
}

// Bisection for the first root inside (a, b], given g(a) > 0 >= g(b) and g
// monotone on the piece. Returns the non-positive side of the final bracket.
double bisect_first_root(const std::vector<PowerTerm>& g, double a, double b) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if (b - a <= 1e-15 * mid || mid <= a || mid >= b) break;
    if (eval_terms(g, mid) > 0.0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return b;
}

void require_positive_t(double t) {
  if (!(t > 0.0)) {
    throw std::domain_error("derivative evaluated at non-positive t");
  }
}

}  // namespace

void validate(const FeasibilityConfig& config) {
  if (!(config.epsilon >= 0.0)) {
    throw std::invalid_argument("epsilon must be >= 0");
  }
  if (!(config.lambda > 0.0)) {
    throw std::invalid_argument("lambda must be > 0");
  }
  if (!(config.t_min > 0.0) || !(config.t_max > config.t_min)) {
    throw std::invalid_argument("need 0 < t_min < t_max");
  }
}

double lagrangian(double delta_dom_at_t, double delta_gen_at_t,
                  double baseline_dom, double lambda, double epsilon) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("lambda must be > 0");
  }
  return (baseline_dom + delta_dom_at_t) + lambda * (delta_gen_at_t - epsilon);
}

double d_delta_dom(const PowerLaw1& law, double t) {
  require_positive_t(t);
  return law.alpha * law.s * std::pow(t, law.s - 1.0);
}

double d_delta_gen(const PowerLaw2& law, double t) {
  require_positive_t(t);
  return law.alpha2 * law.s2 * std::pow(t, law.s2 - 1.0) +
         law.alpha3 * law.s3 * std::pow(t, law.s3 - 1.0);
}

double objective_slope(const PowerLaw1& dom_law, const PowerLaw2& gen_law,
                       double lambda, double t) {
  require_positive_t(t);
  return d_delta_dom(dom_law, t) + lambda * d_delta_gen(gen_law, t);
}

std::optional<double> fixed_point_t0(const PowerLaw1& dom_law,
                                     const PowerLaw2& gen_law, double lambda,
                                     double t_init, int max_iterations) {
  const double denom = lambda * gen_law.alpha2 * gen_law.s2;
  const double exp_gap = gen_law.s2 - dom_law.s;
  if (denom == 0.0 || exp_gap == 0.0 || !(t_init > 0.0)) {
    return std::nullopt;
  }
  const double a = -(dom_law.alpha * dom_law.s) / denom;
  const double b =
      (gen_law.alpha3 * gen_law.s3) / (gen_law.alpha2 * gen_law.s2);
  const double inv_gap = 1.0 / exp_gap;

  double t = t_init;
  for (int i = 0; i < max_iterations; ++i) {
    const double inner = 1.0 + b * std::pow(t, gen_law.s3 - gen_law.s2);
    if (inner == 0.0) return std::nullopt;
    const double base = a / inner;
    if (!(base > 0.0) || !std::isfinite(base)) return std::nullopt;
    const double next = std::pow(base, inv_gap);
    if (!std::isfinite(next) || !(next > 0.0)) return std::nullopt;
    if (std::abs(next - t) <= 1e-12 * next) return next;
    t = next;
  }
  return std::nullopt;
}

T0Result solve_t0(const PowerLaw1& dom_law, const PowerLaw2& gen_law,
                  double lambda, double t_min, double t_max) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(t_min > 0.0) || !(t_max > t_min)) {
    throw std::invalid_argument("need 0 < t_min < t_max");
  }

  T0Result result;
  const auto terms = slope_terms(dom_law, gen_law, lambda);

  if (eval_terms(terms, t_min) <= 0.0) {
    result.t0 = t_min;
    result.at_search_floor = true;
  } else if (terms.size() >= 2) {
    // Rescale by t^{-e_min}: same sign, exponents 0 = d1 < d2 (< d3). The
    // derivative of the rescaled sum has at most one positive root, so the
    // slope is piecewise monotone with at most two pieces.
    std::vector<PowerTerm> g;
    g.reserve(terms.size());
    for (const auto& term : terms) g.push_back({term.c, term.e - terms[0].e});

    std::vector<double> cuts = {t_min, t_max};
    if (g.size() == 3) {
      const double ratio = -(g[1].c * g[1].e) / (g[2].c * g[2].e);
      if (ratio > 0.0) {
        const double x_star = std::pow(ratio, 1.0 / (g[2].e - g[1].e));
        if (std::isfinite(x_star) && x_star > t_min && x_star < t_max) {
          cuts.insert(cuts.begin() + 1, x_star);
        }
      }
    }

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (eval_terms(g, b) <= 0.0) {
        result.t0 = bisect_first_root(g, a, b);
        break;
      }
    }
  }
  // terms.size() <= 1 with positive value at t_min: single power term never
  // crosses zero, no T0.

  const double fp_seed = std::sqrt(t_min * t_max);
  if (auto fp = fixed_point_t0(dom_law, gen_law, lambda, fp_seed)) {
    if (*fp >= t_min * (1.0 - 1e-12) && *fp <= t_max * (1.0 + 1e-12)) {
      result.fixed_point = fp;
      if (result.t0) {
        result.fixed_point_agrees =
            std::abs(*fp - *result.t0) <= 1e-6 * std::abs(*result.t0);
      }
    }
  }
  return result;
}

RatioInterval tolerance_set(const PowerLaw1& gen_ratio_law,
                            double baseline_gen, double epsilon) {
  const double threshold = baseline_gen + epsilon;
  const double alpha = gen_ratio_law.alpha;
  const double s = gen_ratio_law.s;
  const double beta = gen_ratio_law.beta;

  RatioInterval full{0.0, 1.0, false};
  RatioInterval none{0.0, 0.0, true};

  // Constant law: alpha * R^0 collapses into the offset.
  if (alpha == 0.0 || s == 0.0) {
    const double value = (s == 0.0 ? alpha : 0.0) + beta;
    return value <= threshold ? full : none;
  }

  const double at_one = alpha + beta;
  const bool increasing = alpha * s > 0.0;

  if (increasing) {
    if (at_one <= threshold) return full;
    // Limit at R -> 0+ is beta for s > 0 and -inf for s < 0.
    if (s > 0.0 && beta > threshold) return none;
    double boundary = std::pow((threshold - beta) / alpha, 1.0 / s);
    boundary = std::min(boundary, 1.0);
    if (!(boundary > 0.0)) return none;
    return RatioInterval{0.0, boundary, false};
  }

  // Decreasing: supremum is at R -> 0+ (beta for s > 0, +inf for s < 0).
  if (s > 0.0 && beta <= threshold) return full;
  if (at_one > threshold) return none;
  double boundary = std::pow((threshold - beta) / alpha, 1.0 / s);
  boundary = std::max(boundary, 0.0);
  if (!(boundary <= 1.0)) return none;
  return RatioInterval{boundary, 1.0, false};
}

FeasibilityVerdict classify_ratio(double ratio, const PowerLaw1& dom_law,
                                  const PowerLaw2& gen_law,
                                  const RatioInterval& tol_set,
                                  const FeasibilityConfig& config) {
  validate(config);
  FeasibilityVerdict verdict;
  verdict.ratio = ratio;
  verdict.in_tolerance_set = tol_set.contains(ratio);
  const auto t0 = solve_t0(dom_law, gen_law, config.lambda, config.t_min,
                           config.t_max);
  verdict.t0 = t0.t0;
  verdict.feasible = verdict.in_tolerance_set && t0.t0.has_value();
  return verdict;
}

std::optional<double> chain_rule_ratio(const PowerLaw1& dom_law,
                                       const PowerLaw2& gen_law, double t) {
  const double ddom = d_delta_dom(dom_law, t);
  if (ddom == 0.0) return std::nullopt;
  return d_delta_gen(gen_law, t) / ddom;
}

std::optional<double> cmr_from_verdicts(
    const std::vector<FeasibilityVerdict>& verdicts) {
  std::optional<double> best;
  for (const auto& v : verdicts) {
    if (v.feasible && (!best || v.ratio > *best)) best = v.ratio;
  }
  return best;
}

}  // namespace cmrkit
