#include "cmrkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "cmrkit/svg.hpp"
#include "cmrkit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace cmrkit {

namespace {

std::string fmt_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", r);
  return buf;
}

FitOptions fit_options_of(const PipelineConfig& config) {
  FitOptions opt;
  opt.restarts = config.restarts;
  opt.seed = config.seed;
  return opt;
}

// ---- JSON builders ---------------------------------------------------------

ordered_json law_json(const PowerLaw1& law) {
  return {{"alpha", law.alpha}, {"s", law.s}, {"beta", law.beta}};
}

ordered_json law_json(const PowerLaw2& law) {
  return {{"alpha2", law.alpha2},
          {"s2", law.s2},
          {"alpha3", law.alpha3},
          {"s3", law.s3},
          {"beta2", law.beta2}};
}

ordered_json diag_json(const FitDiagnostics& d) {
  ordered_json j;
  j["mse"] = d.mse;
  if (d.r2) {
    j["r2"] = *d.r2;
  } else {
    j["r2"] = nullptr;
  }
  j["n_points"] = d.n_points;
  j["converged"] = d.converged;
  j["n_restarts_used"] = d.n_restarts_used;
  j["near_collinear"] = d.near_collinear;
  return j;
}

ordered_json fit_json(const PowerLaw1& law, const FitDiagnostics& d) {
  return {{"form", "power1"}, {"params", law_json(law)},
          {"diagnostics", diag_json(d)}};
}

ordered_json fit_json(const PowerLaw2& law, const FitDiagnostics& d) {
  return {{"form", "power2"}, {"params", law_json(law)},
          {"diagnostics", diag_json(d)}};
}

PowerLaw1 law1_from(const ordered_json& j) {
  return PowerLaw1{j.at("alpha").get<double>(), j.at("s").get<double>(),
                   j.at("beta").get<double>()};
}

PowerLaw2 law2_from(const ordered_json& j) {
  return PowerLaw2{j.at("alpha2").get<double>(), j.at("s2").get<double>(),
                   j.at("alpha3").get<double>(), j.at("s3").get<double>(),
                   j.at("beta2").get<double>()};
}

FitDiagnostics diag_from(const ordered_json& j) {
  FitDiagnostics d;
  d.mse = j.at("mse").get<double>();
  if (!j.at("r2").is_null()) d.r2 = j.at("r2").get<double>();
  d.n_points = j.at("n_points").get<int>();
  d.converged = j.at("converged").get<bool>();
  d.n_restarts_used = j.at("n_restarts_used").get<int>();
  d.near_collinear = j.value("near_collinear", false);
  return d;
}

ordered_json bundle_json(const FitBundle& bundle) {
  ordered_json j;
  j["model_label"] = bundle.model_label;
  j["baseline_gen"] = bundle.baseline_gen;
  j["baseline_dom"] = bundle.baseline_dom;
  j["tokens_per_unit"] = bundle.tokens_per_unit;
  j["seed"] = bundle.seed;
  j["restarts"] = bundle.restarts;
  j["input_digest"] = bundle.input_digest;
  j["t_lo"] = bundle.t_lo;
  j["t_hi"] = bundle.t_hi;
  j["ratio_law_dom"] = bundle.ratio_law_dom
                           ? fit_json(bundle.ratio_law_dom->law,
                                      bundle.ratio_law_dom->diag)
                           : ordered_json(nullptr);
  j["ratio_law_gen"] = bundle.ratio_law_gen
                           ? fit_json(bundle.ratio_law_gen->law,
                                      bundle.ratio_law_gen->diag)
                           : ordered_json(nullptr);
  j["ratios"] = ordered_json::array();
  for (const auto& r : bundle.ratios) {
    ordered_json rec;
    rec["ratio"] = r.ratio;
    rec["t_end"] = r.t_end;
    rec["end_gen_loss"] = r.end_gen_loss;
    rec["end_dom_loss"] = r.end_dom_loss;
    rec["dom_fit"] = fit_json(r.dom_law, r.dom_diag);
    rec["gen_fit"] = fit_json(r.gen_law, r.gen_diag);
    j["ratios"].push_back(rec);
  }
  return j;
}

FitBundle bundle_from(const ordered_json& j) {
  FitBundle b;
  b.model_label = j.at("model_label").get<std::string>();
  b.baseline_gen = j.at("baseline_gen").get<double>();
  b.baseline_dom = j.at("baseline_dom").get<double>();
  b.tokens_per_unit = j.at("tokens_per_unit").get<double>();
  b.seed = j.at("seed").get<std::uint64_t>();
  b.restarts = j.at("restarts").get<int>();
  b.input_digest = j.at("input_digest").get<std::string>();
  b.t_lo = j.at("t_lo").get<double>();
  b.t_hi = j.at("t_hi").get<double>();
  if (!j.at("ratio_law_dom").is_null()) {
    const auto& rl = j.at("ratio_law_dom");
    b.ratio_law_dom = RatioLawFit{law1_from(rl.at("params")),
                                  diag_from(rl.at("diagnostics"))};
  }
  if (!j.at("ratio_law_gen").is_null()) {
    const auto& rl = j.at("ratio_law_gen");
    b.ratio_law_gen = RatioLawFit{law1_from(rl.at("params")),
                                  diag_from(rl.at("diagnostics"))};
  }
  for (const auto& rec : j.at("ratios")) {
    RatioFitRecord r;
    r.ratio = rec.at("ratio").get<double>();
    r.t_end = rec.at("t_end").get<double>();
    r.end_gen_loss = rec.at("end_gen_loss").get<double>();
    r.end_dom_loss = rec.at("end_dom_loss").get<double>();
    r.dom_law = law1_from(rec.at("dom_fit").at("params"));
    r.dom_diag = diag_from(rec.at("dom_fit").at("diagnostics"));
    r.gen_law = law2_from(rec.at("gen_fit").at("params"));
    r.gen_diag = diag_from(rec.at("gen_fit").at("diagnostics"));
    b.ratios.push_back(r);
  }
  return b;
}

ordered_json verdict_json(const FeasibilityVerdict& v, double lambda,
                          double epsilon, double t_max) {
  ordered_json j;
  j["ratio"] = v.ratio;
  j["in_tolerance_set"] = v.in_tolerance_set;
  j["t0"] = v.t0 ? ordered_json(*v.t0) : ordered_json(nullptr);
  j["feasible"] = v.feasible;
  j["lambda"] = lambda;
  j["epsilon"] = epsilon;
  j["t_max"] = t_max;
  return j;
}

ordered_json verdicts_json(const std::vector<LambdaVerdicts>& sweeps) {
  ordered_json arr = ordered_json::array();
  for (const auto& sweep : sweeps) {
    ordered_json j;
    j["lambda"] = sweep.lambda;
    j["epsilon"] = sweep.epsilon;
    j["t_max"] = sweep.t_max;
    j["t_min"] = sweep.t_min;
    j["tolerance_set"] = sweep.tolerance.empty
                             ? ordered_json(nullptr)
                             : ordered_json{{"lo", sweep.tolerance.lo},
                                            {"hi", sweep.tolerance.hi}};
    j["verdicts"] = ordered_json::array();
    for (const auto& v : sweep.verdicts) {
      j["verdicts"].push_back(
          verdict_json(v, sweep.lambda, sweep.epsilon, sweep.t_max));
    }
    j["cmr"] = sweep.cmr ? ordered_json(*sweep.cmr) : ordered_json(nullptr);
    arr.push_back(j);
  }
  return arr;
}

ordered_json frontier_json(const std::vector<FrontierResult>& results) {
  ordered_json arr = ordered_json::array();
  for (const auto& fr : results) {
    ordered_json j;
    j["lambda"] = fr.lambda;
    j["points"] = ordered_json::array();
    for (const auto& p : fr.points) {
      j["points"].push_back(
          {{"t_max", p.budget},
           {"cmr", p.cmr ? ordered_json(*p.cmr) : ordered_json(nullptr)},
           {"at_ratio_range_edge", p.at_ratio_range_edge}});
    }
    if (fr.law) {
      j["law"] = {{"alpha4", fr.law->alpha4},
                  {"s4", fr.law->s4},
                  {"beta3", fr.law->beta3},
                  {"fit_range", {fr.law->fit_lo, fr.law->fit_hi}}};
      j["diagnostics"] = diag_json(*fr.law_diag);
    } else {
      j["law"] = nullptr;
      j["diagnostics"] = nullptr;
    }
    j["notice"] = fr.notice;
    arr.push_back(j);
  }
  return arr;
}

ordered_json config_json(const PipelineConfig& config) {
  ordered_json j;
  j["input"] = config.input_path;
  j["tokens_per_unit"] = config.tokens_per_unit;
  j["epsilon"] = config.epsilon;
  j["lambda"] = config.lambdas;
  j["t_max"] = config.t_max;
  j["t_min"] = config.t_min;
  j["restarts"] = config.restarts;
  j["seed"] = config.seed;
  j["budget_grid"] = config.budget_grid;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

fs::path out_path(const PipelineConfig& config, const std::string& name) {
  fs::create_directories(config.output_dir);
  return fs::path(config.output_dir) / name;
}

std::string frontier_csv(const std::vector<FrontierResult>& results) {
  std::string out = "lambda,t_max,cmr,at_ratio_range_edge\n";
  char buf[128];
  for (const auto& fr : results) {
    for (const auto& p : fr.points) {
      if (p.cmr) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d\n", fr.lambda,
                      p.budget, *p.cmr, p.at_ratio_range_edge ? 1 : 0);
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,,%d\n", fr.lambda,
                      p.budget, p.at_ratio_range_edge ? 1 : 0);
      }
      out += buf;
    }
  }
  return out;
}

std::string token_note(double tokens_per_unit) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "1 unit = %.4g tokens", tokens_per_unit);
  return buf;
}

void write_frontier_svg(const fs::path& path,
                        const std::vector<FrontierResult>& results,
                        const PipelineConfig& config) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e"};
  SvgPlot plot("Critical mixture ratio vs training budget", "T (units)",
               "critical mixture ratio");
  plot.set_x_note(token_note(config.tokens_per_unit));
  int ci = 0;
  for (const auto& fr : results) {
    const std::string color = kColors[ci++ % 5];
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : fr.points) {
      if (p.cmr) pts.push_back({p.budget, *p.cmr});
    }
    char name[64];
    std::snprintf(name, sizeof(name), "lambda=%g", fr.lambda);
    plot.add_points(pts, color, name);
    if (fr.law && !pts.empty()) {
      std::vector<std::pair<double, double>> fitted;
      std::vector<std::pair<double, double>> extrapolated;
      const double lo = fr.law->fit_lo;
      const double hi = fr.law->fit_hi;
      const double ex_hi = std::max(hi, 2.5 * config.t_max);
      for (int i = 0; i <= 160; ++i) {
        const double t =
            lo * std::pow(ex_hi / lo, static_cast<double>(i) / 160.0);
        const auto pred = predict_cmr(*fr.law, t);
        (t <= hi ? fitted : extrapolated).push_back({t, pred.ratio});
      }
      plot.add_line(fitted, color, "");
      if (!extrapolated.empty()) {
        extrapolated.insert(extrapolated.begin(), fitted.back());
        plot.add_line(extrapolated, color, "", /*dashed=*/true);
      }
    }
  }
  plot.write(path.string());
}

void write_losses_svg(const PipelineConfig& config, const FitBundle& bundle,
                      const std::vector<TrainingCurve>& curves) {
  for (const auto& rec : bundle.ratios) {
    SvgPlot plot("Delta losses at ratio " + fmt_ratio(rec.ratio), "T (units)",
                 "delta loss (nats)");
    plot.set_x_note(token_note(config.tokens_per_unit));
    for (const auto& c : curves) {
      if (c.ratio != rec.ratio) continue;
      std::vector<std::pair<double, double>> gen_pts, dom_pts;
      for (const auto& s : to_delta(c, DeltaKind::general).samples) {
        gen_pts.push_back({s.t, s.delta});
      }
      for (const auto& s : to_delta(c, DeltaKind::domain).samples) {
        dom_pts.push_back({s.t, s.delta});
      }
      plot.add_points(gen_pts, "#1f77b4", "general delta");
      plot.add_points(dom_pts, "#d62728", "domain delta");
    }
    std::vector<std::pair<double, double>> gen_fit, dom_fit;
    for (int i = 0; i <= 200; ++i) {
      const double t = bundle.t_lo * std::pow(bundle.t_hi / bundle.t_lo,
                                              static_cast<double>(i) / 200.0);
      gen_fit.push_back({t, evaluate(rec.gen_law, t)});
      dom_fit.push_back({t, evaluate(rec.dom_law, t)});
    }
    plot.add_line(gen_fit, "#1f77b4", "general fit");
    plot.add_line(dom_fit, "#d62728", "domain fit");
    plot.write(out_path(config, "losses_" + fmt_ratio(rec.ratio) + ".svg")
                   .string());
  }
}

std::vector<TrainingCurve> load_curves(const PipelineConfig& config) {
  if (config.input_path.empty()) {
    throw std::invalid_argument("no input file given");
  }
  return ingest_curves(config.input_path, config.tokens_per_unit,
                       config.format);
}

void validate_lambdas(const PipelineConfig& config) {
  if (config.lambdas.empty()) {
    throw std::invalid_argument("need at least one lambda");
  }
  for (const double l : config.lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("lambda must be > 0");
  }
}

}  // namespace

// ---- stages ----------------------------------------------------------------

FitBundle fit_curves(const std::vector<TrainingCurve>& curves,
                     const PipelineConfig& config,
                     const std::string& input_digest) {
  if (curves.empty()) throw std::invalid_argument("no curves to fit");

  FitBundle bundle;
  bundle.model_label = curves.front().model_label;
  bundle.baseline_gen = curves.front().baseline_gen;
  bundle.baseline_dom = curves.front().baseline_dom;
  bundle.tokens_per_unit = config.tokens_per_unit;
  bundle.seed = config.seed;
  bundle.restarts = config.restarts;
  bundle.input_digest = input_digest;

  std::vector<const TrainingCurve*> sorted;
  std::set<double> seen;
  for (const auto& c : curves) {
    if (c.model_label != bundle.model_label) {
      throw std::invalid_argument(
          "input mixes model labels ('" + bundle.model_label + "' vs '" +
          c.model_label + "'); analyze one model size at a time");
    }
    if (c.baseline_gen != bundle.baseline_gen ||
        c.baseline_dom != bundle.baseline_dom) {
      throw std::invalid_argument(
          "runs disagree on baseline losses; one pre-CPT model is required");
    }
    if (!seen.insert(c.ratio).second) {
      throw std::invalid_argument("duplicate ratio " + fmt_ratio(c.ratio));
    }
    sorted.push_back(&c);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const TrainingCurve* a, const TrainingCurve* b) {
              return a->ratio < b->ratio;
            });

  const FitOptions options = fit_options_of(config);
  bundle.t_lo = std::numeric_limits<double>::infinity();
  bundle.t_hi = 0.0;

  std::vector<Point> dom_ratio_pts;
  std::vector<Point> gen_ratio_pts;
  for (const TrainingCurve* c : sorted) {
    RatioFitRecord rec;
    rec.ratio = c->ratio;
    rec.t_end = c->gen_samples.back().t;
    rec.end_gen_loss = end_of_training_loss(*c, DeltaKind::general);
    rec.end_dom_loss = end_of_training_loss(*c, DeltaKind::domain);

    const DeltaCurve dom_delta = to_delta(*c, DeltaKind::domain);
    const DeltaCurve gen_delta = to_delta(*c, DeltaKind::general);
    std::vector<Point> dom_pts, gen_pts;
    for (const auto& s : dom_delta.samples) dom_pts.push_back({s.t, s.delta});
    for (const auto& s : gen_delta.samples) gen_pts.push_back({s.t, s.delta});

    std::tie(rec.dom_law, rec.dom_diag) = fit_power1(dom_pts, options);
    std::tie(rec.gen_law, rec.gen_diag) = fit_power2(gen_pts, options);

    bundle.t_lo = std::min({bundle.t_lo, dom_pts.front().x, gen_pts.front().x});
    bundle.t_hi = std::max({bundle.t_hi, dom_pts.back().x, gen_pts.back().x});

    // The ratio law is a power form in R, singular at R = 0; the pure-replay
    // run cannot enter the fit.
    if (c->ratio > 0.0) {
      dom_ratio_pts.push_back({c->ratio, rec.end_dom_loss});
      gen_ratio_pts.push_back({c->ratio, rec.end_gen_loss});
    }
    bundle.ratios.push_back(rec);
  }

  if (dom_ratio_pts.size() >= 4) {
    auto [dlaw, ddiag] = fit_power1(dom_ratio_pts, options);
    bundle.ratio_law_dom = RatioLawFit{dlaw, ddiag};
    auto [glaw, gdiag] = fit_power1(gen_ratio_pts, options);
    bundle.ratio_law_gen = RatioLawFit{glaw, gdiag};
  } else {
    std::cerr << "note: fewer than 4 positive-ratio runs; "
                 "ratio laws not fitted\n";
  }
  return bundle;
}

std::vector<LambdaVerdicts> feasibility_sweep(const FitBundle& bundle,
                                              const PipelineConfig& config) {
  validate_lambdas(config);
  if (!bundle.ratio_law_gen) {
    throw std::invalid_argument(
        "fit bundle has no general ratio law; cannot form the tolerance set");
  }
  std::vector<LambdaVerdicts> out;
  for (const double lambda : config.lambdas) {
    FeasibilityConfig fc{config.epsilon, lambda, config.t_max, config.t_min};
    validate(fc);
    LambdaVerdicts sweep;
    sweep.lambda = lambda;
    sweep.epsilon = fc.epsilon;
    sweep.t_max = fc.t_max;
    sweep.t_min = fc.t_min;
    sweep.tolerance = tolerance_set(bundle.ratio_law_gen->law,
                                    bundle.baseline_gen, fc.epsilon);
    for (const auto& rec : bundle.ratios) {
      sweep.verdicts.push_back(classify_ratio(rec.ratio, rec.dom_law,
                                              rec.gen_law, sweep.tolerance,
                                              fc));
    }
    sweep.cmr = cmr_from_verdicts(sweep.verdicts);
    out.push_back(std::move(sweep));
  }
  return out;
}

std::vector<double> default_budget_grid(const PipelineConfig& config) {
  std::vector<double> grid;
  const double lo = config.t_max / 10.0;
  const double hi = config.t_max;
  for (int i = 0; i < 12; ++i) {
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / 11.0));
  }
  return grid;
}

LawFamily law_family_of(const FitBundle& bundle) {
  if (bundle.ratios.size() < 4) {
    throw std::invalid_argument(
        "frontier needs fit records spanning >= 4 ratios");
  }
  std::vector<double> ratios;
  std::vector<PowerLaw1> dom_laws;
  std::vector<PowerLaw2> gen_laws;
  for (const auto& rec : bundle.ratios) {
    ratios.push_back(rec.ratio);
    dom_laws.push_back(rec.dom_law);
    gen_laws.push_back(rec.gen_law);
  }
  return LawFamily(std::move(ratios), std::move(dom_laws), std::move(gen_laws),
                   bundle.t_lo, bundle.t_hi);
}

std::vector<FrontierResult> frontier_sweep(const FitBundle& bundle,
                                           const PipelineConfig& config) {
  validate_lambdas(config);
  const LawFamily family = law_family_of(bundle);
  const std::vector<double> budgets = config.budget_grid.empty()
                                          ? default_budget_grid(config)
                                          : config.budget_grid;
  std::vector<FrontierResult> out;
  for (const double lambda : config.lambdas) {
    FeasibilityConfig fc{config.epsilon, lambda, config.t_max, config.t_min};
    validate(fc);
    FrontierResult fr;
    fr.lambda = lambda;
    fr.points = frontier(family, fc, budgets);
    long present = 0;
    for (const auto& p : fr.points) present += p.cmr.has_value();
    if (present >= 4) {
      auto [law, diag] = fit_cmr_law(fr.points, fit_options_of(config));
      fr.law = law;
      fr.law_diag = diag;
    } else {
      fr.notice = "cmr law fit skipped: fewer than 4 frontier points";
      std::cerr << "note: lambda=" << lambda << ": " << fr.notice << "\n";
    }
    out.push_back(std::move(fr));
  }
  return out;
}

void save_fit_bundle(const FitBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bundle_json(bundle).dump(2) << "\n";
}

FitBundle load_fit_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return bundle_from(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---- commands ---------------------------------------------------------------

void run_fit(const PipelineConfig& config) {
  const auto curves = load_curves(config);
  const auto bundle =
      fit_curves(curves, config, file_digest(config.input_path));
  save_fit_bundle(bundle, out_path(config, "fits.json").string());
}

void run_feasible(const PipelineConfig& config) {
  const FitBundle bundle = load_fit_bundle(config.input_path);
  const auto sweeps = feasibility_sweep(bundle, config);
  write_json(out_path(config, "verdicts.json"), verdicts_json(sweeps));
}

void run_frontier(const PipelineConfig& config) {
  const FitBundle bundle = load_fit_bundle(config.input_path);
  const auto results = frontier_sweep(bundle, config);
  write_text(out_path(config, "frontier.csv"), frontier_csv(results));
  write_json(out_path(config, "cmr_law.json"), frontier_json(results));
  write_frontier_svg(out_path(config, "frontier.svg"), results, config);
}

void run_synth(const PipelineConfig& config) {
  std::ifstream in(config.input_path);
  if (!in) throw std::runtime_error("cannot open " + config.input_path);
  ordered_json spec;
  try {
    spec = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(config.input_path + ": " + e.what());
  }

  FeasibilityConfig label_cfg;
  if (spec.contains("label_config")) {
    const auto& lc = spec["label_config"];
    label_cfg.epsilon = lc.value("epsilon", 0.05);
    label_cfg.lambda = lc.value("lambda", 1000.0);
    label_cfg.t_max = lc.value("t_max", 100.0);
    label_cfg.t_min = lc.value("t_min", 1e-3);
  }
  validate(label_cfg);

  GroundTruth truth;
  truth.model_label = spec.value("model_label", std::string("synthetic"));
  truth.baseline_gen = spec.value("baseline_gen", 2.0);
  truth.baseline_dom = spec.value("baseline_dom", 1.8);
  truth.noise_sigma = spec.value("noise_sigma", 1e-4);
  truth.seed = spec.value("seed", std::uint64_t{1});
  if (config.seed_explicit) truth.seed = config.seed;

  if (spec.contains("ratios")) {
    for (const auto& r : spec["ratios"]) {
      RatioTruth rt;
      rt.ratio = r.at("ratio").get<double>();
      rt.dom = law1_from(r.at("dom"));
      rt.gen = law2_from(r.at("gen"));
      truth.ratios.push_back(rt);
    }
  } else {
    int n_ratios = 8;
    double r_lo = 0.05, r_hi = 0.8;
    if (spec.contains("random_family")) {
      const auto& rf = spec["random_family"];
      n_ratios = rf.value("n_ratios", 8);
      r_lo = rf.value("ratio_lo", 0.05);
      r_hi = rf.value("ratio_hi", 0.8);
    }
    const GroundTruth drawn =
        draw_realistic_family(truth.seed, n_ratios, r_lo, r_hi, label_cfg);
    truth.ratios = drawn.ratios;
  }
  validate(truth);

  std::vector<double> t_grid;
  {
    double lo = 1.0, hi = label_cfg.t_max;
    int points = 25;
    std::string spacing = "log";
    if (spec.contains("t_grid")) {
      const auto& tg = spec["t_grid"];
      lo = tg.value("lo", lo);
      hi = tg.value("hi", hi);
      points = tg.value("points", points);
      spacing = tg.value("spacing", spacing);
    }
    if (!(lo > 0.0) || !(hi > lo) || points < 4) {
      throw std::invalid_argument("bad t_grid in truth spec");
    }
    for (int i = 0; i < points; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(points - 1);
      t_grid.push_back(spacing == "linear" ? lo + (hi - lo) * f
                                           : lo * std::pow(hi / lo, f));
    }
  }

  const auto curves = generate_family(truth, t_grid);
  if (config.format == CurveFormat::jsonl) {
    write_jsonl(curves, out_path(config, "dataset.jsonl").string(),
                config.tokens_per_unit);
  } else {
    write_csv(curves, out_path(config, "dataset.csv").string(),
              config.tokens_per_unit);
  }

  ordered_json labels;
  labels["config"] = {{"epsilon", label_cfg.epsilon},
                      {"lambda", label_cfg.lambda},
                      {"t_max", label_cfg.t_max},
                      {"t_min", label_cfg.t_min}};
  labels["seed"] = truth.seed;
  labels["labels"] = ordered_json::array();
  for (const auto& rt : truth.ratios) {
    const auto v = true_verdict(rt, label_cfg);
    labels["labels"].push_back(
        verdict_json(v, label_cfg.lambda, label_cfg.epsilon, label_cfg.t_max));
  }
  const auto cmr = true_cmr(truth, label_cfg);
  labels["cmr"] = cmr ? ordered_json(*cmr) : ordered_json(nullptr);
  labels["truth"] = ordered_json::array();
  for (const auto& rt : truth.ratios) {
    labels["truth"].push_back({{"ratio", rt.ratio},
                               {"dom", law_json(rt.dom)},
                               {"gen", law_json(rt.gen)}});
  }
  write_json(out_path(config, "labels.json"), labels);
}

void run_report(const PipelineConfig& config) {
  const auto curves = load_curves(config);
  const std::string digest = file_digest(config.input_path);
  const auto bundle = fit_curves(curves, config, digest);
  save_fit_bundle(bundle, out_path(config, "fits.json").string());

  const auto sweeps = feasibility_sweep(bundle, config);
  write_json(out_path(config, "verdicts.json"), verdicts_json(sweeps));

  const auto results = frontier_sweep(bundle, config);
  write_text(out_path(config, "frontier.csv"), frontier_csv(results));
  write_json(out_path(config, "cmr_law.json"), frontier_json(results));
  write_frontier_svg(out_path(config, "frontier.svg"), results, config);
  write_losses_svg(config, bundle, curves);

  ordered_json report;
  report["provenance"] = {{"input", config.input_path},
                          {"input_digest", digest},
                          {"config", config_json(config)}};
  report["fits"] = bundle_json(bundle);
  report["verdicts"] = verdicts_json(sweeps);
  report["frontier"] = frontier_json(results);
  write_json(out_path(config, "report.json"), report);
}

}  // namespace cmrkit
