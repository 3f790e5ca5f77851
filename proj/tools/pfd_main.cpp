#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "pfd/harness.hpp"

namespace {

using pfd::harness::RunConfig;

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->set_config("--config")->description(
      "key=value file; command-line flags override file values");
  cmd->add_option("--seed", cfg.master_seed, "master seed")
      ->capture_default_str();
  cmd->add_option("--out", cfg.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--sigma", cfg.sigma, "outcome noise std dev")
      ->capture_default_str();
  cmd->add_option("--estimator", cfg.estimator,
                  "truncated_ols or ols_ridge")
      ->capture_default_str();
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("-p,--treatments", cfg.p, "number of treatments")
      ->capture_default_str();
  cmd->add_option("-k,--order", cfg.k, "max interaction order")
      ->capture_default_str();
  cmd->add_option("-n,--samples", cfg.n, "units per round")
      ->capture_default_str();
  cmd->add_option("--trials", cfg.trials, "observation sets per cell")
      ->capture_default_str();
}

void add_distance_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--distances", cfg.distances,
                  "l_inf distance grid from the reference dosage")
      ->capture_default_str();
  cmd->add_option("--dosages-per-distance", cfg.dosages_per_distance,
                  "dosage draws per distance")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Probabilistic factorial experimental design: simulation harness"};
  app.require_subcommand(1);

  RunConfig cfg;

  auto* passive = app.add_subcommand(
      "passive-sweep", "estimation error vs l_inf distance from the half dosage");
  add_common_options(passive, cfg);
  add_model_options(passive, cfg);
  add_distance_options(passive, cfg);
  passive->callback([&] {
    cfg.experiment = "passive_sweep";
    pfd::harness::run_and_write(cfg);
  });

  auto* uniform = app.add_subcommand(
      "uniform-sweep", "estimation error across uniform dosage values");
  add_common_options(uniform, cfg);
  add_model_options(uniform, cfg);
  uniform->add_option("--grid", cfg.dosage_grid, "uniform dosage values")
      ->capture_default_str();
  uniform->callback([&] {
    cfg.experiment = "uniform_sweep";
    cfg.trials = uniform->count("--trials") ? cfg.trials : 500;
    pfd::harness::run_and_write(cfg);
  });

  auto* active = app.add_subcommand(
      "active-compare", "multi-round comparison of acquisition strategies");
  add_common_options(active, cfg);
  add_model_options(active, cfg);
  active->add_option("-T,--rounds", cfg.rounds, "number of rounds")
      ->capture_default_str();
  active->add_option("--strategies", cfg.strategies,
                     "subset of optimal random half partial")
      ->capture_default_str();
  active->add_option("--objective", cfg.objective,
                     "auto, eigen_sum or min_eig_proxy")
      ->capture_default_str();
  active->add_option("--restarts", cfg.restarts)->capture_default_str();
  active->add_option("--max-iters", cfg.max_iters)->capture_default_str();
  active->add_option("--tol", cfg.tol)->capture_default_str();
  active->callback([&] {
    cfg.experiment = "active_compare";
    cfg.rounds = active->count("--rounds") ? cfg.rounds : 10;
    pfd::harness::run_and_write(cfg);
  });

  auto* constrained = app.add_subcommand(
      "constrained-sweep",
      "estimation error vs distance from the L/p dosage under sum d_i <= L");
  add_common_options(constrained, cfg);
  add_model_options(constrained, cfg);
  add_distance_options(constrained, cfg);
  constrained->add_option("-L,--supply", cfg.L, "supply limit")
      ->capture_default_str();
  constrained->callback([&] {
    cfg.experiment = "constrained_sweep";
    pfd::harness::run_and_write(cfg);
  });

  auto* misspec = app.add_subcommand(
      "misspecified-sweep",
      "full-degree truth fitted with an assumed lower interaction order");
  add_common_options(misspec, cfg);
  add_model_options(misspec, cfg);
  add_distance_options(misspec, cfg);
  misspec->add_option("--k-assumed", cfg.k_assumed, "assumed order for the fit")
      ->capture_default_str();
  misspec->callback([&] {
    cfg.experiment = "misspecified_sweep";
    cfg.p = misspec->count("--treatments") ? cfg.p : 5;
    pfd::harness::run_and_write(cfg);
  });

  auto* fractional = app.add_subcommand(
      "fractional-compare",
      "Resolution V fractional design vs half dosage, single round");
  add_common_options(fractional, cfg);
  add_model_options(fractional, cfg);
  fractional->callback([&] {
    cfg.experiment = "fractional_compare";
    cfg.p = fractional->count("--treatments") ? cfg.p : 8;
    cfg.k = fractional->count("--order") ? cfg.k : 1;
    cfg.n = fractional->count("--samples") ? cfg.n : 64;
    cfg.trials = fractional->count("--trials") ? cfg.trials : 300;
    pfd::harness::run_and_write(cfg);
  });

  auto* emulate = app.add_subcommand(
      "emulate", "marginal-matching dosage for a target distribution");
  add_common_options(emulate, cfg);
  emulate->add_option("--target", cfg.target_file,
                      "file of <+- pattern> <probability> lines")
      ->required();
  emulate->callback([&] {
    cfg.experiment = "emulate";
    pfd::harness::run_and_write(cfg);
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
