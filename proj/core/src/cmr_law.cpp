#include "cmrkit/cmr_law.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmrkit {

// ---- Pchip ----------------------------------------------------------------

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("pchip needs >= 2 knots of equal length");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw std::invalid_argument("pchip knots must strictly increase");
    }
  }

  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }

  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] == 0.0 || delta[i] == 0.0 ||
        (delta[i - 1] > 0.0) != (delta[i] > 0.0)) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) {
      d = 0.0;
    } else if ((d0 > 0.0) != (d1 > 0.0) && std::abs(d) > 3.0 * std::abs(d0)) {
      d = 3.0 * d0;
    }
    return d;
  };
  d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double Pchip::operator()(double x) const {
  if (x_.empty()) throw std::logic_error("pchip not initialized");
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double u = (x - x_[i]) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
  const double h10 = u3 - 2.0 * u2 + u;
  const double h01 = -2.0 * u3 + 3.0 * u2;
  const double h11 = u3 - u2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

// ---- LawFamily ------------------------------------------------------------

namespace {

double term_magnitude(double alpha, double s, double t_lo, double t_hi) {
  return std::abs(alpha) *
         std::max(std::pow(t_lo, s), std::pow(t_hi, s));
}

// Zero out a two-term law's negligible term so its junk exponent cannot
// perturb the interpolation; keep the canonical exponent order. A term a
// million times below the law's scale over the fitted range is fit debris,
// far under the loss noise floor.
PowerLaw2 prune_gen_law(PowerLaw2 law, double t_lo, double t_hi) {
  law = canonicalize(law);
  const double m2 = term_magnitude(law.alpha2, law.s2, t_lo, t_hi);
  const double m3 = term_magnitude(law.alpha3, law.s3, t_lo, t_hi);
  const double scale = std::max({m2, m3, std::abs(law.beta2), 1e-12});
  if (m3 <= 1e-6 * scale && m3 < m2) {
    law.alpha3 = 0.0;
    law.s3 = law.s2 + 1.0;
  } else if (m2 <= 1e-6 * scale && m2 < m3) {
    law.alpha2 = law.alpha3;
    law.s2 = law.s3;
    law.alpha3 = 0.0;
    law.s3 = law.s2 + 1.0;
  }
  return law;
}

}  // namespace

LawFamily::LawFamily(std::vector<double> ratios,
                     std::vector<PowerLaw1> dom_laws,
                     std::vector<PowerLaw2> gen_laws, double t_lo, double t_hi)
    : t_lo_(t_lo), t_hi_(t_hi) {
  const std::size_t n = ratios.size();
  if (n < 2 || dom_laws.size() != n || gen_laws.size() != n) {
    throw std::invalid_argument("law family needs >= 2 ratios with laws");
  }
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) {
    throw std::invalid_argument("law family needs 0 < t_lo < t_hi");
  }
  ratio_lo_ = ratios.front();
  ratio_hi_ = ratios.back();

  std::vector<double> da(n), ds(n), db(n);
  std::vector<double> ga2(n), gs2(n), ga3(n), gs3(n), gb2(n);
  for (std::size_t i = 0; i < n; ++i) {
    da[i] = dom_laws[i].alpha;
    ds[i] = dom_laws[i].s;
    db[i] = dom_laws[i].beta;
    const PowerLaw2 g = prune_gen_law(gen_laws[i], t_lo, t_hi);
    ga2[i] = g.alpha2;
    gs2[i] = g.s2;
    ga3[i] = g.alpha3;
    gs3[i] = g.s3;
    gb2[i] = g.beta2;
  }
  dom_alpha_ = Pchip(ratios, da);
  dom_s_ = Pchip(ratios, ds);
  dom_beta_ = Pchip(ratios, db);
  gen_alpha2_ = Pchip(ratios, ga2);
  gen_s2_ = Pchip(ratios, gs2);
  gen_alpha3_ = Pchip(ratios, ga3);
  gen_s3_ = Pchip(ratios, gs3);
  gen_beta2_ = Pchip(ratios, gb2);
}

PowerLaw1 LawFamily::dom_at(double ratio) const {
  return PowerLaw1{dom_alpha_(ratio), dom_s_(ratio), dom_beta_(ratio)};
}

PowerLaw2 LawFamily::gen_at(double ratio) const {
  return PowerLaw2{gen_alpha2_(ratio), gen_s2_(ratio), gen_alpha3_(ratio),
                   gen_s3_(ratio), gen_beta2_(ratio)};
}

// ---- frontier -------------------------------------------------------------

namespace {

bool ratio_feasible(const LawFamily& family, const FeasibilityConfig& config,
                    double budget, double ratio) {
  const PowerLaw2 gen = family.gen_at(ratio);
  if (evaluate(gen, budget) > config.epsilon) return false;
  const PowerLaw1 dom = family.dom_at(ratio);
  const auto t0 = solve_t0(dom, gen, config.lambda, config.t_min, budget);
  return t0.t0.has_value();
}

}  // namespace

std::optional<double> critical_ratio_at(const LawFamily& family,
                                        const FeasibilityConfig& config,
                                        double budget, double r_tol,
                                        bool* at_range_edge) {
  if (at_range_edge) *at_range_edge = false;
  double lo = family.ratio_lo();
  double hi = family.ratio_hi();
  if (!ratio_feasible(family, config, budget, lo)) {
    return std::nullopt;
  }
  if (ratio_feasible(family, config, budget, hi)) {
    if (at_range_edge) *at_range_edge = true;
    return hi;
  }
  while (hi - lo > r_tol) {
    const double mid = 0.5 * (lo + hi);
    if (ratio_feasible(family, config, budget, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;  // feasibility-certified side of the bracket
}

std::vector<FrontierPoint> frontier(const LawFamily& family,
                                    const FeasibilityConfig& config,
                                    std::span<const double> budget_grid,
                                    double r_tol) {
  validate(config);
  if (budget_grid.empty()) {
    throw std::invalid_argument("budget grid is empty");
  }
  for (std::size_t i = 0; i < budget_grid.size(); ++i) {
    if (!(budget_grid[i] > config.t_min) ||
        (i > 0 && !(budget_grid[i] > budget_grid[i - 1]))) {
      throw std::invalid_argument(
          "budget grid must be strictly increasing and above t_min");
    }
  }

  std::vector<FrontierPoint> out;
  out.reserve(budget_grid.size());
  for (const double budget : budget_grid) {
    FrontierPoint pt;
    pt.budget = budget;
    pt.cmr = critical_ratio_at(family, config, budget, r_tol,
                               &pt.at_ratio_range_edge);
    out.push_back(pt);
  }
  return out;
}

std::pair<CmrLaw, FitDiagnostics> fit_cmr_law(
    std::span<const FrontierPoint> points, const FitOptions& options) {
  std::vector<Point> pts;
  for (const auto& p : points) {
    if (p.cmr) pts.push_back({p.budget, *p.cmr});
  }
  if (pts.size() < 4) {
    throw std::invalid_argument("cmr law fit needs >= 4 frontier points");
  }
  const auto [law, diag] = fit_power1(pts, options);
  CmrLaw out{law.alpha, law.s, law.beta, pts.front().x, pts.back().x};
  return {out, diag};
}

CmrPrediction predict_cmr(const CmrLaw& law, double t) {
  if (!(t > 0.0)) throw std::domain_error("predict_cmr needs t > 0");
  const double raw = law.alpha4 * std::pow(t, law.s4) + law.beta3;
  CmrPrediction pred;
  pred.ratio = std::clamp(raw, 0.0, 1.0);
  pred.clamped = raw < 0.0 || raw > 1.0;
  pred.extrapolated = t < law.fit_lo || t > law.fit_hi;
  return pred;
}

}  // namespace cmrkit
