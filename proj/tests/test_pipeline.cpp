#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmrkit/pipeline.hpp"
#include "cmrkit/synth.hpp"
#include "test_util.hpp"

using namespace cmrkit;
namespace fs = std::filesystem;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) {
    g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  return g;
}

// Curves whose final domain losses are the published per-ratio values; each
// trajectory decays smoothly into its end point.
std::vector<TrainingCurve> table1_like_curves() {
  const double ratios[4] = {1.0, 0.75, 0.5, 0.3333};
  const double end_dom[4] = {1.4628, 1.4844, 1.5122, 1.5387};
  const double end_gen[4] = {2.005, 2.012, 2.03, 2.06};
  std::vector<TrainingCurve> curves;
  const auto grid = log_grid(1.0, 100.0, 10);
  for (int i = 0; i < 4; ++i) {
    TrainingCurve c;
    c.model_label = "460M";
    c.ratio = ratios[i];
    c.baseline_gen = 2.0;
    c.baseline_dom = 1.9;
    for (double t : grid) {
      // dom delta: power decay ending exactly at the published value
      const double dom_end_delta = end_dom[i] - c.baseline_dom;
      const double dom_delta = dom_end_delta * std::pow(t / 100.0, 0.35);
      // gen delta: mild rise
      const double gen_delta = (end_gen[i] - c.baseline_gen) * std::pow(t / 100.0, 0.4);
      c.dom_samples.push_back({t, c.baseline_dom + dom_delta});
      c.gen_samples.push_back({t, c.baseline_gen + gen_delta});
    }
    // pin the end points exactly
    c.dom_samples.back().loss = end_dom[i];
    c.gen_samples.back().loss = end_gen[i];
    curves.push_back(c);
  }
  return curves;
}

PipelineConfig base_config() {
  PipelineConfig pc;
  pc.epsilon = 0.05;
  pc.lambdas = {1000.0};
  pc.t_max = 100.0;
  pc.t_min = 1e-3;
  return pc;
}

}  // namespace

TEST_CASE("fit_curves on a sigma=0 family recovers the truth") {
  const FeasibilityConfig cfg{0.05, 1000.0, 100.0, 1e-3};
  auto truth = draw_realistic_family(101, 6, 0.1, 0.7, cfg);
  truth.noise_sigma = 0.0;
  const auto curves = generate_family(truth, log_grid(1.0, 100.0, 25));
  const auto bundle = fit_curves(curves, base_config());

  REQUIRE(bundle.ratios.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& rec = bundle.ratios[i];
    const auto& rt = truth.ratios[i];
    CHECK(rec.dom_law.alpha == doctest::Approx(rt.dom.alpha).epsilon(1e-4));
    CHECK(rec.dom_law.s == doctest::Approx(rt.dom.s).epsilon(1e-4));
    CHECK(rec.gen_law.alpha2 == doctest::Approx(rt.gen.alpha2).epsilon(1e-4));
    CHECK(rec.gen_law.s2 == doctest::Approx(rt.gen.s2).epsilon(1e-4));
    REQUIRE(rec.dom_diag.r2.has_value());
    REQUIRE(rec.gen_diag.r2.has_value());
    CHECK(*rec.dom_diag.r2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(*rec.gen_diag.r2 == doctest::Approx(1.0).epsilon(1e-9));
  }
  REQUIRE(bundle.ratio_law_gen.has_value());
  REQUIRE(bundle.ratio_law_dom.has_value());
}

TEST_CASE("fit_curves rejects mixed labels, baselines and duplicate ratios") {
  const FeasibilityConfig cfg{0.05, 1000.0, 100.0, 1e-3};
  auto truth = draw_realistic_family(102, 4, 0.1, 0.7, cfg);
  truth.noise_sigma = 0.0;
  auto curves = generate_family(truth, log_grid(1.0, 100.0, 12));

  auto broken = curves;
  broken[1].model_label = "another";
  CHECK_THROWS_AS(fit_curves(broken, base_config()), std::invalid_argument);

  broken = curves;
  broken[2].baseline_gen += 0.1;
  CHECK_THROWS_AS(fit_curves(broken, base_config()), std::invalid_argument);

  broken = curves;
  broken[3].ratio = broken[2].ratio;
  CHECK_THROWS_AS(fit_curves(broken, base_config()), std::invalid_argument);

  CHECK_THROWS_AS(fit_curves({}, base_config()), std::invalid_argument);
}

TEST_CASE("table-1 style fixture: pipeline ratio law predicts the held-out ratio") {
  const auto curves = table1_like_curves();
  const auto bundle = fit_curves(curves, base_config());
  REQUIRE(bundle.ratio_law_dom.has_value());
  const double pred = evaluate(bundle.ratio_law_dom->law, 0.25);
  CHECK(std::abs(pred - 1.5561) / 1.5561 < 0.002);
}

TEST_CASE("fit bundle json round trip") {
  const auto curves = table1_like_curves();
  const auto bundle = fit_curves(curves, base_config(), "abc123");
  const auto dir = testutil::temp_dir("pipeline");
  save_fit_bundle(bundle, dir + "/fits.json");
  const auto loaded = load_fit_bundle(dir + "/fits.json");
  CHECK(loaded.model_label == bundle.model_label);
  CHECK(loaded.baseline_gen == bundle.baseline_gen);
  CHECK(loaded.input_digest == "abc123");
  REQUIRE(loaded.ratios.size() == bundle.ratios.size());
  for (std::size_t i = 0; i < bundle.ratios.size(); ++i) {
    CHECK(loaded.ratios[i].ratio == bundle.ratios[i].ratio);
    CHECK(loaded.ratios[i].dom_law.alpha == bundle.ratios[i].dom_law.alpha);
    CHECK(loaded.ratios[i].gen_law.s3 == bundle.ratios[i].gen_law.s3);
    CHECK(loaded.ratios[i].gen_diag.mse == bundle.ratios[i].gen_diag.mse);
  }
  REQUIRE(loaded.ratio_law_gen.has_value());
  CHECK(loaded.ratio_law_gen->law.alpha == bundle.ratio_law_gen->law.alpha);
}

TEST_CASE("feasibility sweep needs positive lambdas and a gen ratio law") {
  const auto curves = table1_like_curves();
  const auto bundle = fit_curves(curves, base_config());
  auto pc = base_config();
  pc.lambdas = {0.0};
  CHECK_THROWS_AS(feasibility_sweep(bundle, pc), std::invalid_argument);
  pc.lambdas.clear();
  CHECK_THROWS_AS(feasibility_sweep(bundle, pc), std::invalid_argument);

  auto no_law = bundle;
  no_law.ratio_law_gen.reset();
  CHECK_THROWS_AS(feasibility_sweep(no_law, base_config()),
                  std::invalid_argument);
}

TEST_CASE("doubling the budget never shrinks the feasible set") {
  const FeasibilityConfig cfg{0.05, 1000.0, 50.0, 1e-3};
  auto truth = draw_realistic_family(103, 6, 0.1, 0.75, cfg);
  const auto curves = generate_family(truth, log_grid(1.0, 100.0, 25));
  auto pc = base_config();
  pc.t_max = 50.0;
  const auto bundle = fit_curves(curves, pc);
  const auto small = feasibility_sweep(bundle, pc);
  pc.t_max = 100.0;
  const auto big = feasibility_sweep(bundle, pc);
  REQUIRE(small.size() == 1);
  REQUIRE(big.size() == 1);
  for (std::size_t i = 0; i < small[0].verdicts.size(); ++i) {
    if (small[0].verdicts[i].feasible) {
      CHECK(big[0].verdicts[i].feasible);
    }
  }
}

TEST_CASE("frontier sweep: single budget emits points but skips the law fit") {
  const FeasibilityConfig cfg{0.05, 1000.0, 100.0, 1e-3};
  auto truth = draw_realistic_family(104, 6, 0.1, 0.75, cfg);
  truth.noise_sigma = 0.0;
  const auto curves = generate_family(truth, log_grid(1.0, 100.0, 25));
  auto pc = base_config();
  pc.budget_grid = {80.0};
  const auto bundle = fit_curves(curves, pc);
  const auto results = frontier_sweep(bundle, pc);
  REQUIRE(results.size() == 1);
  CHECK(results[0].points.size() == 1);
  CHECK_FALSE(results[0].law.has_value());
  CHECK_FALSE(results[0].notice.empty());
}

TEST_CASE("frontier sweep requires four ratios") {
  const FeasibilityConfig cfg{0.05, 1000.0, 100.0, 1e-3};
  auto truth = draw_realistic_family(105, 3, 0.1, 0.5, cfg);
  truth.noise_sigma = 0.0;
  const auto curves = generate_family(truth, log_grid(1.0, 100.0, 25));
  const auto bundle = fit_curves(curves, base_config());
  CHECK_THROWS_AS(frontier_sweep(bundle, base_config()), std::invalid_argument);
}

TEST_CASE("run_fit and run_report write deterministic artifacts") {
  const FeasibilityConfig cfg{0.05, 1000.0, 100.0, 1e-3};
  auto truth = draw_realistic_family(106, 6, 0.1, 0.75, cfg);
  const auto curves = generate_family(truth, log_grid(1.0, 100.0, 25));
  const auto dir = testutil::temp_dir("pipeline_run");
  write_csv(curves, dir + "/input.csv", kDefaultTokensPerUnit);

  auto pc = base_config();
  pc.input_path = dir + "/input.csv";
  pc.output_dir = dir + "/out_a";
  run_report(pc);
  for (const char* name : {"fits.json", "verdicts.json", "frontier.csv",
                           "cmr_law.json", "report.json", "frontier.svg"}) {
    CAPTURE(name);
    CHECK(fs::exists(fs::path(pc.output_dir) / name));
  }
  // one loss plot per ratio
  int svg_count = 0;
  for (const auto& entry : fs::directory_iterator(pc.output_dir)) {
    if (entry.path().filename().string().rfind("losses_", 0) == 0) ++svg_count;
  }
  CHECK(svg_count == 6);

  pc.output_dir = dir + "/out_b";
  run_report(pc);
  for (const char* name : {"fits.json", "verdicts.json", "report.json",
                           "frontier.csv", "cmr_law.json"}) {
    CAPTURE(name);
    const auto a = testutil::read_file(dir + "/out_a/" + name);
    const auto b = testutil::read_file(dir + "/out_b/" + name);
    CHECK(a == b);
    CHECK_FALSE(a.empty());
  }
  // report embeds the input digest
  const auto report = nlohmann::json::parse(
      std::ifstream(dir + "/out_a/report.json"));
  CHECK(report.at("provenance").at("input_digest").get<std::string>() ==
        file_digest(pc.input_path));
}

TEST_CASE("run_synth produces an ingestible labeled dataset") {
  const auto dir = testutil::temp_dir("pipeline_synth");
  {
    std::ofstream spec(dir + "/truth.json");
    spec << R"({"seed": 9, "noise_sigma": 0.0,
               "label_config": {"epsilon": 0.05, "lambda": 1000, "t_max": 100},
               "random_family": {"n_ratios": 6, "ratio_lo": 0.1, "ratio_hi": 0.75},
               "t_grid": {"lo": 1.0, "hi": 100.0, "points": 25}})";
  }
  PipelineConfig pc;
  pc.input_path = dir + "/truth.json";
  pc.output_dir = dir + "/out";
  run_synth(pc);

  const auto curves = ingest_curves(dir + "/out/dataset.csv");
  REQUIRE(curves.size() == 6);

  // end-to-end: fits on the sigma=0 dataset match the labels sidecar
  auto fit_pc = base_config();
  const auto bundle = fit_curves(curves, fit_pc);
  const auto sweeps = feasibility_sweep(bundle, fit_pc);
  const auto labels = nlohmann::json::parse(
      std::ifstream(dir + "/out/labels.json"));
  REQUIRE(labels.at("labels").size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    const bool want = labels.at("labels")[i].at("feasible").get<bool>();
    CAPTURE(i);
    CHECK(sweeps[0].verdicts[i].feasible == want);
  }
  if (labels.at("cmr").is_null()) {
    CHECK_FALSE(sweeps[0].cmr.has_value());
  } else {
    REQUIRE(sweeps[0].cmr.has_value());
    CHECK(*sweeps[0].cmr ==
          doctest::Approx(labels.at("cmr").get<double>()).epsilon(1e-12));
  }

  // the truth block lets the sigma=0 fits be checked directly
  const auto& truth0 = labels.at("truth")[0];
  CHECK(bundle.ratios[0].dom_law.alpha ==
        doctest::Approx(truth0.at("dom").at("alpha").get<double>())
            .epsilon(1e-4));
}

TEST_CASE("run_synth: changing the seed keeps labels, changes noise") {
  const auto dir = testutil::temp_dir("pipeline_synth_seed");
  {
    std::ofstream spec(dir + "/truth.json");
    spec << R"({"seed": 5, "noise_sigma": 1e-4,
               "label_config": {"epsilon": 0.05, "lambda": 1000, "t_max": 100},
               "random_family": {"n_ratios": 5, "ratio_lo": 0.1, "ratio_hi": 0.7}})";
  }
  PipelineConfig a;
  a.input_path = dir + "/truth.json";
  a.output_dir = dir + "/a";
  run_synth(a);

  PipelineConfig b = a;
  b.output_dir = dir + "/b";
  run_synth(b);

  // same seed: identical bytes
  CHECK(testutil::read_file(dir + "/a/dataset.csv") ==
        testutil::read_file(dir + "/b/dataset.csv"));

  PipelineConfig c = a;
  c.output_dir = dir + "/c";
  c.seed = 6;
  c.seed_explicit = true;
  run_synth(c);
  CHECK(testutil::read_file(dir + "/a/dataset.csv") !=
        testutil::read_file(dir + "/c/dataset.csv"));
  // note: an explicit seed redraws the family, so labels may differ between
  // a and c; label invariance under pure noise reseeding is covered by the
  // synth unit tests.
  CHECK(fs::exists(dir + "/c/labels.json"));
}

TEST_CASE("verdict records carry their full context") {
  const auto curves = table1_like_curves();
  auto pc = base_config();
  pc.lambdas = {100.0, 1000.0};
  const auto bundle = fit_curves(curves, pc);
  const auto sweeps = feasibility_sweep(bundle, pc);
  const auto dir = testutil::temp_dir("pipeline_verdicts");
  pc.input_path = dir + "/fits.json";
  pc.output_dir = dir;
  save_fit_bundle(bundle, pc.input_path);
  run_feasible(pc);
  const auto j = nlohmann::json::parse(std::ifstream(dir + "/verdicts.json"));
  REQUIRE(j.size() == 2);
  CHECK(j[0].at("lambda").get<double>() == 100.0);
  const auto& v = j[0].at("verdicts")[0];
  for (const char* key : {"ratio", "in_tolerance_set", "t0", "feasible",
                          "lambda", "epsilon", "t_max"}) {
    CAPTURE(key);
    CHECK(v.contains(key));
  }
  CHECK(sweeps.size() == 2);
}
