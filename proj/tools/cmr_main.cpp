// cmr: fits continual-pre-training loss curves, classifies mixture-ratio
// feasibility and extrapolates the critical mixture ratio over the budget.
//
// Subcommands: fit, feasible, frontier, synth, report. Flags can be seeded
// from a JSON config file (--config); explicit flags win. Environment
// variables are never consulted.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmrkit/pipeline.hpp"

namespace {

struct FlagState {
  std::string config_file;
  std::string format = "auto";
};

void apply_config_file(const std::string& path, cmrkit::PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ValidationError("--config", std::string(e.what()));
  }
  cfg.input_path = j.value("input", cfg.input_path);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.tokens_per_unit = j.value("tokens_per_unit", cfg.tokens_per_unit);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  if (j.contains("lambda")) {
    cfg.lambdas = j["lambda"].get<std::vector<double>>();
  }
  cfg.t_max = j.value("t_max", cfg.t_max);
  cfg.t_min = j.value("t_min", cfg.t_min);
  cfg.restarts = j.value("restarts", cfg.restarts);
  if (j.contains("seed")) {
    cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.seed_explicit = true;
  }
  if (j.contains("budget_grid")) {
    cfg.budget_grid = j["budget_grid"].get<std::vector<double>>();
  }
  if (j.contains("format")) {
    const auto f = j["format"].get<std::string>();
    if (f == "csv") cfg.format = cmrkit::CurveFormat::csv;
    if (f == "jsonl") cfg.format = cmrkit::CurveFormat::jsonl;
  }
}

void add_common_flags(CLI::App* cmd, cmrkit::PipelineConfig& cfg,
                      FlagState& flags) {
  cmd->add_option("--config", flags.config_file,
                  "JSON config file; explicit flags override it");
  cmd->add_option("--input", cfg.input_path, "input file");
  cmd->add_option("--output-dir", cfg.output_dir, "directory for artifacts");
  cmd->add_option("--tokens-per-unit", cfg.tokens_per_unit,
                  "raw tokens per training-volume unit");
  cmd->add_option("--epsilon", cfg.epsilon,
                  "tolerated general-loss increase (nats)");
  cmd->add_option("--lambda", cfg.lambdas,
                  "Lagrange multiplier; repeat for a sweep")
      ->delimiter(',');
  cmd->add_option("--t-max", cfg.t_max, "training budget, units");
  cmd->add_option("--t-min", cfg.t_min, "search floor, units");
  cmd->add_option("--restarts", cfg.restarts, "fit restarts");
  cmd->add_option("--seed", cfg.seed, "fit/generator seed");
  cmd->add_option("--budget-grid", cfg.budget_grid,
                  "frontier budgets, comma separated")
      ->delimiter(',');
  cmd->add_option("--format", flags.format, "csv|jsonl")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
}

void finish_config(const CLI::App* cmd, cmrkit::PipelineConfig& cfg,
                   const FlagState& flags) {
  if (!flags.config_file.empty()) {
    // Re-apply explicit flags on top of the file values.
    cmrkit::PipelineConfig from_file = cfg;
    apply_config_file(flags.config_file, from_file);
    auto keep = [&](const char* name) { return cmd->count(name) > 0; };
    if (!keep("--input")) cfg.input_path = from_file.input_path;
    if (!keep("--output-dir")) cfg.output_dir = from_file.output_dir;
    if (!keep("--tokens-per-unit"))
      cfg.tokens_per_unit = from_file.tokens_per_unit;
    if (!keep("--epsilon")) cfg.epsilon = from_file.epsilon;
    if (!keep("--lambda")) cfg.lambdas = from_file.lambdas;
    if (!keep("--t-max")) cfg.t_max = from_file.t_max;
    if (!keep("--t-min")) cfg.t_min = from_file.t_min;
    if (!keep("--restarts")) cfg.restarts = from_file.restarts;
    if (!keep("--seed")) {
      cfg.seed = from_file.seed;
      cfg.seed_explicit = from_file.seed_explicit;
    }
    if (!keep("--budget-grid")) cfg.budget_grid = from_file.budget_grid;
    if (!keep("--format")) cfg.format = from_file.format;
  }
  if (cmd->count("--seed") > 0) cfg.seed_explicit = true;
  if (flags.format == "csv") cfg.format = cmrkit::CurveFormat::csv;
  if (flags.format == "jsonl") cfg.format = cmrkit::CurveFormat::jsonl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continual pre-training scaling-law and critical mixture "
               "ratio toolkit"};
  app.require_subcommand(1);

  cmrkit::PipelineConfig cfg;
  FlagState flags;

  auto* fit = app.add_subcommand("fit", "fit loss laws from curve data");
  auto* feasible =
      app.add_subcommand("feasible", "classify ratios from fits.json");
  auto* frontier = app.add_subcommand(
      "frontier", "critical-ratio frontier and scaling law from fits.json");
  auto* synth =
      app.add_subcommand("synth", "generate a labeled synthetic dataset");
  auto* report =
      app.add_subcommand("report", "run the whole pipeline into one directory");
  for (CLI::App* cmd : {fit, feasible, frontier, synth, report}) {
    add_common_flags(cmd, cfg, flags);
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = app.get_subcommands().front();
  try {
    finish_config(active, cfg, flags);
    if (active == fit) {
      cmrkit::run_fit(cfg);
    } else if (active == feasible) {
      cmrkit::run_feasible(cfg);
    } else if (active == frontier) {
      cmrkit::run_frontier(cfg);
    } else if (active == synth) {
      cmrkit::run_synth(cfg);
    } else {
      cmrkit::run_report(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
