#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cmrkit/cmr_law.hpp"
#include "cmrkit/rng.hpp"

using namespace cmrkit;

namespace {

// Family engineered so the tolerance constraint alone binds, with the exact
// critical ratio R(b) = 0.1 * b^0.3:
//   gen delta(t; R) = eps + kappa*R - 0.1*kappa*t^0.3   (<= eps iff R <= 0.1 t^0.3)
//   dom delta(t)    = -0.02 * t^0.5                     (slope always negative)
// All gen parameters are constant or linear in R, which the monotone cubic
// interpolation reproduces exactly.
struct ExactFamily {
  double eps = 0.05;
  double kappa = 0.1;
  std::vector<double> ratios;
  LawFamily family;

  explicit ExactFamily(int n_knots = 9)
      : family(make(n_knots, eps, kappa, ratios)) {}

  static LawFamily make(int n_knots, double eps, double kappa,
                        std::vector<double>& ratios_out) {
    std::vector<double> ratios;
    std::vector<PowerLaw1> dom;
    std::vector<PowerLaw2> gen;
    for (int i = 0; i < n_knots; ++i) {
      const double r = 0.1 + 0.8 * static_cast<double>(i) / (n_knots - 1);
      ratios.push_back(r);
      dom.push_back(PowerLaw1{-0.02, 0.5, 0.0});
      gen.push_back(PowerLaw2{-0.1 * kappa, 0.3, 0.0, 1.3, eps + kappa * r});
    }
    ratios_out = ratios;
    return LawFamily(ratios, dom, gen, 1.0, 700.0);
  }
};

}  // namespace

TEST_CASE("pchip reproduces linear data exactly and clamps outside") {
  const std::vector<double> x = {0.1, 0.25, 0.5, 0.8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 2.0 * v);
  const Pchip p(x, y);
  for (double q : {0.1, 0.17, 0.3, 0.62, 0.8}) {
    CHECK(p(q) == doctest::Approx(3.0 - 2.0 * q).epsilon(1e-14));
  }
  CHECK(p(0.0) == doctest::Approx(y.front()));
  CHECK(p(1.0) == doctest::Approx(y.back()));
}

TEST_CASE("pchip preserves monotone data") {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const std::vector<double> y = {0.0, 0.5, 0.55, 2.0, 2.01, 3.0};
  const Pchip p(x, y);
  double prev = p(1.0);
  for (int i = 1; i <= 500; ++i) {
    const double q = 1.0 + 5.0 * i / 500.0;
    const double v = p(q);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("pchip rejects bad knots") {
  CHECK_THROWS_AS(Pchip({1.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(Pchip({1.0, 1.0}, {2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(Pchip({1.0, 2.0}, {2.0}), std::invalid_argument);
}

TEST_CASE("law family interpolates parameters across the ratio") {
  ExactFamily ef;
  // at knots: exact laws back
  for (double r : ef.ratios) {
    const auto gen = ef.family.gen_at(r);
    CHECK(gen.beta2 == doctest::Approx(ef.eps + ef.kappa * r).epsilon(1e-13));
    CHECK(gen.alpha2 == doctest::Approx(-0.1 * ef.kappa).epsilon(1e-13));
  }
  // between knots: the linear beta2 track is reproduced exactly
  for (double r : {0.13, 0.305, 0.6177, 0.88}) {
    const auto gen = ef.family.gen_at(r);
    CHECK(gen.beta2 == doctest::Approx(ef.eps + ef.kappa * r).epsilon(1e-12));
    CHECK(gen.s2 == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(gen.alpha3 == 0.0);
    const auto dom = ef.family.dom_at(r);
    CHECK(dom.alpha == doctest::Approx(-0.02).epsilon(1e-13));
  }
}

TEST_CASE("law family prunes a negligible junk term before interpolating") {
  // Same dominant term everywhere, junk second term with wild exponents that
  // would explode at large t if it leaked into the interpolation.
  std::vector<double> ratios = {0.2, 0.4, 0.6, 0.8};
  std::vector<PowerLaw1> dom(4, PowerLaw1{-0.02, 0.5, 0.0});
  std::vector<PowerLaw2> gen = {
      PowerLaw2{-0.01, 0.3, 1e-15, 2.0, 0.07},
      PowerLaw2{-0.01, 0.3, -3e-16, -2.5, 0.09},
      PowerLaw2{-0.01, 0.3, 2e-15, 1.7, 0.11},
      PowerLaw2{-0.01, 0.3, 8e-16, 0.05, 0.13},
  };
  const LawFamily fam(ratios, dom, gen, 1.0, 500.0);
  for (double r : {0.2, 0.3, 0.5, 0.7, 0.8}) {
    const auto g = fam.gen_at(r);
    CHECK(g.alpha3 == 0.0);
    const double want = -0.01 * std::pow(400.0, 0.3) + (0.07 + 0.1 * (r - 0.2));
    CHECK(evaluate(g, 400.0) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("frontier recovers the closed-form critical ratio curve") {
  ExactFamily ef;
  const FeasibilityConfig cfg{ef.eps, 1000.0, 650.0, 1e-3};
  std::vector<double> budgets;
  for (int i = 0; i < 12; ++i) {
    budgets.push_back(4.0 * std::pow(600.0 / 4.0, i / 11.0));
  }
  const auto pts = frontier(ef.family, cfg, budgets, 1e-4);
  REQUIRE(pts.size() == budgets.size());
  for (const auto& p : pts) {
    REQUIRE(p.cmr.has_value());
    CHECK_FALSE(p.at_ratio_range_edge);
    const double want = 0.1 * std::pow(p.budget, 0.3);
    CHECK(std::abs(*p.cmr - want) < 1e-3);
  }
  // non-decreasing in the budget
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(*pts[i].cmr >= *pts[i - 1].cmr - 1e-9);
  }
}

TEST_CASE("frontier edge cases: saturation and absence") {
  ExactFamily ef;
  const FeasibilityConfig cfg{ef.eps, 1000.0, 650.0, 1e-3};
  // tiny budget: even the smallest family ratio is out of tolerance
  {
    const std::vector<double> budgets = {0.5};
    const auto pts = frontier(ef.family, cfg, budgets, 1e-4);
    CHECK_FALSE(pts[0].cmr.has_value());
  }
  // huge budget: every family ratio is feasible, the edge is reported
  {
    const std::vector<double> budgets = {5000.0};
    const auto pts = frontier(ef.family, cfg, budgets, 1e-4);
    REQUIRE(pts[0].cmr.has_value());
    CHECK(*pts[0].cmr == doctest::Approx(0.9));
    CHECK(pts[0].at_ratio_range_edge);
  }
  // grid validation
  const std::vector<double> bad = {10.0, 5.0};
  CHECK_THROWS_AS(frontier(ef.family, cfg, bad, 1e-4), std::invalid_argument);
  CHECK_THROWS_AS(frontier(ef.family, cfg, std::vector<double>{}, 1e-4),
                  std::invalid_argument);
}

TEST_CASE("fit_cmr_law recovers exact frontier parameters") {
  std::vector<FrontierPoint> pts;
  for (int i = 0; i < 10; ++i) {
    const double b = 5.0 * std::pow(100.0, i / 9.0);
    FrontierPoint p;
    p.budget = b;
    p.cmr = 0.1 * std::pow(b, 0.3);
    pts.push_back(p);
  }
  const auto [law, diag] = fit_cmr_law(pts);
  CHECK(law.alpha4 == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(law.s4 == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(std::abs(law.beta3) < 1e-6);
  CHECK(law.fit_lo == doctest::Approx(5.0));
  CHECK(law.fit_hi == doctest::Approx(500.0));
  CHECK(diag.converged);
}

TEST_CASE("fit_cmr_law on a noisy frontier keeps r2 high") {
  Rng rng(55);
  std::vector<FrontierPoint> pts;
  for (int i = 0; i < 14; ++i) {
    const double b = 4.0 * std::pow(150.0, i / 13.0);
    FrontierPoint p;
    p.budget = b;
    p.cmr = 0.1 * std::pow(b, 0.3) + rng.normal(0.0, 0.005);
    pts.push_back(p);
  }
  const auto [law, diag] = fit_cmr_law(pts);
  REQUIRE(diag.r2.has_value());
  CHECK(*diag.r2 >= 0.98);
}

TEST_CASE("fit_cmr_law needs four present points") {
  std::vector<FrontierPoint> pts(6);
  for (int i = 0; i < 6; ++i) pts[i].budget = 1.0 + i;
  pts[0].cmr = 0.2;
  pts[1].cmr = 0.25;
  pts[2].cmr = 0.3;  // only three present
  CHECK_THROWS_AS(fit_cmr_law(pts), std::invalid_argument);
}

TEST_CASE("predict_cmr: clamping and extrapolation flags") {
  // constant law
  const CmrLaw flat{0.0, 0.7, 0.3, 10.0, 100.0};
  for (double t : {1.0, 50.0, 400.0}) {
    const auto p = predict_cmr(flat, t);
    CHECK(p.ratio == doctest::Approx(0.3));
    CHECK_FALSE(p.clamped);
    CHECK(p.extrapolated == (t < 10.0 || t > 100.0));
  }

  const CmrLaw law{0.1, 0.3, 0.0, 10.0, 100.0};
  const auto at100 = predict_cmr(law, 100.0);
  CHECK(at100.ratio == doctest::Approx(0.39810717055349726).epsilon(1e-12));
  CHECK_FALSE(at100.extrapolated);
  const auto at250 = predict_cmr(law, 250.0);
  CHECK(at250.extrapolated);
  CHECK_FALSE(at250.clamped);
  CHECK(at250.ratio == doctest::Approx(0.1 * std::pow(250.0, 0.3)).epsilon(1e-12));

  // raw value beyond 1: clamped and flagged
  const CmrLaw big{0.5, 0.5, 0.0, 1.0, 100.0};
  const auto p = predict_cmr(big, 64.0);
  CHECK(p.ratio == 1.0);
  CHECK(p.clamped);
  // clamping never alters in-range values
  const auto q = predict_cmr(big, 2.0);
  CHECK_FALSE(q.clamped);
  CHECK(q.ratio == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(predict_cmr(law, 0.0), std::domain_error);
}

TEST_CASE("predict_cmr monotone when sign(alpha4*s4) >= 0") {
  const CmrLaw rising{0.1, 0.3, 0.0, 1.0, 100.0};
  CHECK(rising.alpha4 * rising.s4 >= 0.0);
  CHECK(predict_cmr(rising, 80.0).ratio > predict_cmr(rising, 20.0).ratio);

  const CmrLaw falling{0.1, -0.3, 0.2, 1.0, 100.0};
  CHECK(falling.alpha4 * falling.s4 < 0.0);
  CHECK(predict_cmr(falling, 80.0).ratio < predict_cmr(falling, 20.0).ratio);
}
