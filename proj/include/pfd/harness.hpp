#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pfd/optimize.hpp"

namespace pfd::harness {

struct RunConfig {
  std::string experiment;
  int p = 10;
  int k = 2;
  int k_assumed = 2;  // misspecified_sweep fits with this order
  int n = 200;
  int rounds = 1;
  int trials = 20;
  int dosages_per_distance = 100;
  double sigma = 1.0;
  double L = 2.0;
  std::vector<double> distances = {0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> dosage_grid = {0.40, 0.45, 0.50, 0.55, 0.60};
  std::vector<std::string> strategies = {"optimal", "random", "half"};
  std::string estimator = "truncated_ols";  // or "ols_ridge"
  std::uint64_t master_seed = 0;
  std::string out_dir = ".";
  std::string target_file;  // emulate: outcome/probability pairs
  // acquisition settings
  std::string objective = "auto";  // auto | eigen_sum | min_eig_proxy
  int restarts = 5;
  int max_iters = 500;
  double tol = 1e-6;
};

struct ResultRow {
  std::string experiment;
  std::uint64_t trial = 0;  // unique run id within the experiment
  int round = 1;
  double distance = 0.0;  // l_inf distance or uniform dosage value
  std::string strategy;
  double mse = 0.0;
  std::string branch;
  std::uint64_t seed = 0;
};

std::vector<ResultRow> run_passive_sweep(const RunConfig& cfg);
std::vector<ResultRow> run_uniform_sweep(const RunConfig& cfg);
std::vector<ResultRow> run_active_compare(const RunConfig& cfg);
std::vector<ResultRow> run_constrained_sweep(const RunConfig& cfg);
std::vector<ResultRow> run_misspecified_sweep(const RunConfig& cfg);
std::vector<ResultRow> run_fractional_compare(const RunConfig& cfg);

struct EmulateReport {
  Dosage dosage;
  double achieved_kl = 0.0;
  std::vector<double> comparator_kl;  // 100 random dosages
};
EmulateReport run_emulate(const RunConfig& cfg);

/// Dispatch on cfg.experiment, run it and write <experiment>.csv,
/// summary.csv and manifest.txt under cfg.out_dir.
void run_and_write(const RunConfig& cfg);

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path);
void write_summary_csv(const std::vector<ResultRow>& rows,
                       const std::string& path);
void write_manifest(const RunConfig& cfg, const std::string& path);

/// A dosage at exactly l_inf distance r from the uniform `center` dosage:
/// coordinates uniform on [center-r, center+r], then one uniformly chosen
/// coordinate pinned to center +- r. With a supply limit, draws violating
/// sum d_i <= L are rejected.
Dosage sample_dosage_at_distance(int p, double center, double r, Rng& rng,
                                 std::optional<double> supply_limit = {});

CombinationDistribution load_target_distribution(const std::string& path);

/// Aggregate mean over rows matching a strategy and round/distance cell;
/// exposed for the acceptance checks.
struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};
CellStats cell_stats(const std::vector<ResultRow>& rows,
                     const std::string& strategy, int round, double distance);

}  // namespace pfd::harness
