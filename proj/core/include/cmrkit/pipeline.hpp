#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmrkit/cmr_law.hpp"
#include "cmrkit/curves.hpp"
#include "cmrkit/feasibility.hpp"
#include "cmrkit/fit.hpp"
#include "cmrkit/io.hpp"

namespace cmrkit {

struct PipelineConfig {
  std::string input_path;
  std::string output_dir = ".";
  double tokens_per_unit = kDefaultTokensPerUnit;
  double epsilon = 0.05;
  std::vector<double> lambdas = {100.0, 300.0, 1000.0, 3000.0, 7000.0};
  double t_max = 100.0;
  double t_min = 1e-3;
  int restarts = 32;
  std::uint64_t seed = 1;
  bool seed_explicit = false;  // 'synth' prefers the truth file's seed otherwise
  std::vector<double> budget_grid;  // empty: 12 log-spaced in [t_max/10, t_max]
  CurveFormat format = CurveFormat::auto_detect;
};

struct RatioLawFit {
  PowerLaw1 law;
  FitDiagnostics diag;
};

struct RatioFitRecord {
  double ratio = 0.0;
  double t_end = 0.0;
  double end_gen_loss = 0.0;
  double end_dom_loss = 0.0;
  PowerLaw1 dom_law;
  FitDiagnostics dom_diag;
  PowerLaw2 gen_law;
  FitDiagnostics gen_diag;
};

// Everything the fit stage produces; serialized as fits.json and consumed by
// the feasible/frontier stages.
struct FitBundle {
  std::string model_label;
  double baseline_gen = 0.0;
  double baseline_dom = 0.0;
  double tokens_per_unit = kDefaultTokensPerUnit;
  std::uint64_t seed = 1;
  int restarts = 32;
  std::string input_digest;
  double t_lo = 0.0;  // sample range shared by the per-ratio fits
  double t_hi = 0.0;
  // End-of-training loss over the mixture ratio (general law feeds the
  // tolerance set). Absent when fewer than four positive-ratio runs exist.
  std::optional<RatioLawFit> ratio_law_dom;
  std::optional<RatioLawFit> ratio_law_gen;
  std::vector<RatioFitRecord> ratios;
};

struct LambdaVerdicts {
  double lambda = 0.0;
  double epsilon = 0.0;
  double t_max = 0.0;
  double t_min = 0.0;
  RatioInterval tolerance;
  std::vector<FeasibilityVerdict> verdicts;
  std::optional<double> cmr;
};

struct FrontierResult {
  double lambda = 0.0;
  std::vector<FrontierPoint> points;
  std::optional<CmrLaw> law;
  std::optional<FitDiagnostics> law_diag;
  std::string notice;  // set when the law fit was skipped
};

// Stage logic, usable directly from tests.
FitBundle fit_curves(const std::vector<TrainingCurve>& curves,
                     const PipelineConfig& config,
                     const std::string& input_digest = "");
std::vector<LambdaVerdicts> feasibility_sweep(const FitBundle& bundle,
                                              const PipelineConfig& config);
std::vector<FrontierResult> frontier_sweep(const FitBundle& bundle,
                                           const PipelineConfig& config);
std::vector<double> default_budget_grid(const PipelineConfig& config);
LawFamily law_family_of(const FitBundle& bundle);

// fits.json round trip.
void save_fit_bundle(const FitBundle& bundle, const std::string& path);
FitBundle load_fit_bundle(const std::string& path);

// Command entry points; each writes its artifacts under config.output_dir.
// Failures are reported by exception; warnings go to stderr and do not fail.
void run_fit(const PipelineConfig& config);       // fits.json
void run_feasible(const PipelineConfig& config);  // verdicts.json
void run_frontier(const PipelineConfig& config);  // frontier.csv, cmr_law.json,
                                                  // frontier.svg
void run_synth(const PipelineConfig& config);     // dataset.{csv,jsonl},
                                                  // labels.json
void run_report(const PipelineConfig& config);    // all of the above plus
                                                  // losses_<ratio>.svg and
                                                  // report.json

}  // namespace cmrkit
