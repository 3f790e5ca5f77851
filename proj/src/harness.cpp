#include "pfd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "pfd/estimation.hpp"
#include "pfd/kernels.hpp"
#include "pfd/model.hpp"

namespace pfd::harness {

namespace {

constexpr const char* kVersion = "pfd 1.0.0";

std::vector<double> row_of(const AssignmentMatrix& x, int m) {
  std::vector<double> out(x.cols());
  for (int i = 0; i < x.cols(); ++i) out[i] = x(m, i);
  return out;
}

Eigen::VectorXd observe_all(const OutcomeModel& model,
                            const AssignmentMatrix& x, Rng& rng) {
  Eigen::VectorXd y(x.rows());
  for (int m = 0; m < x.rows(); ++m) y[m] = observe(model, row_of(x, m), rng);
  return y;
}

EstimationResult fit(const RunConfig& cfg, const FeatureMatrix& features,
                     const Eigen::VectorXd& y, double B, double sigma) {
  if (cfg.estimator == "truncated_ols")
    return truncated_ols(features, y, B, sigma);
  if (cfg.estimator == "ols_ridge") return ols_ridge(features, y, B, sigma);
  throw std::invalid_argument("unknown estimator: " + cfg.estimator);
}

AcquisitionOptions acquisition_options(const RunConfig& cfg, std::uint64_t seed) {
  AcquisitionOptions opts = AcquisitionOptions::defaults_for(cfg.p);
  if (cfg.objective == "eigen_sum")
    opts.objective = AcquisitionObjective::eigen_sum;
  else if (cfg.objective == "min_eig_proxy")
    opts.objective = AcquisitionObjective::min_eig_proxy;
  else if (cfg.objective != "auto")
    throw std::invalid_argument("unknown objective: " + cfg.objective);
  opts.restarts = cfg.restarts;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  opts.seed = seed;
  return opts;
}

void check_counts(const RunConfig& cfg) {
  if (cfg.p < 1 || cfg.n < 1 || cfg.trials < 1 || cfg.rounds < 1 ||
      cfg.dosages_per_distance < 1 || cfg.sigma < 0.0)
    throw std::invalid_argument("run config: counts must be positive");
  for (double r : cfg.distances)
    if (r < 0.0 || r >= 0.5)
      throw std::invalid_argument("run config: distances must lie in [0, 0.5)");
}

// One model draw + one observation-set fit at a fixed dosage. Models are
// re-drawn per run; beta is held fixed within the run.
ResultRow single_run(const RunConfig& cfg, const SubsetIndex& fit_index,
                     double distance, const Dosage& dosage, std::uint64_t run,
                     int true_k) {
  const std::uint64_t model_seed =
      derive_seed(cfg.master_seed, cfg.experiment + "/model", run, 0);
  const std::uint64_t data_seed =
      derive_seed(cfg.master_seed, cfg.experiment, run, 0);
  OutcomeModel model = generate_model(cfg.p, true_k, model_seed, cfg.sigma);
  Rng rng(data_seed);
  AssignmentMatrix x = sample_assignments(dosage, cfg.n, rng);
  DesignMatrix dm = design_matrix(x, fit_index);
  Eigen::VectorXd y = observe_all(model, x, rng);
  EstimationResult est = fit(cfg, dm.features, y, model.B, model.sigma);
  // Error against the degree-limited truncation of the truth; with a
  // well-specified model this is the full coefficient vector.
  Eigen::VectorXd beta_target = model.beta.head(fit_index.size());
  ResultRow row;
  row.experiment = cfg.experiment;
  row.trial = run;
  row.round = 1;
  row.distance = distance;
  row.strategy = "";
  row.mse = mse(est.beta_hat, beta_target);
  row.branch = branch_name(est.branch);
  row.seed = data_seed;
  return row;
}

std::vector<ResultRow> distance_sweep(const RunConfig& cfg, double center,
                                      std::optional<double> supply_limit,
                                      int true_k, const SubsetIndex& fit_index) {
  check_counts(cfg);
  std::vector<ResultRow> rows;
  std::uint64_t run = 0;
  for (std::size_t di = 0; di < cfg.distances.size(); ++di) {
    const double r = cfg.distances[di];
    for (int j = 0; j < cfg.dosages_per_distance; ++j) {
      Dosage d = Dosage::uniform(cfg.p, center);
      if (r > 0.0) {
        Rng dosage_rng(derive_seed(cfg.master_seed, cfg.experiment + "/dosage",
                                   di, static_cast<std::uint64_t>(j)));
        d = sample_dosage_at_distance(cfg.p, center, r, dosage_rng,
                                      supply_limit);
      }
      for (int t = 0; t < cfg.trials; ++t, ++run)
        rows.push_back(single_run(cfg, fit_index, r, d, run, true_k));
    }
  }
  return rows;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dosage sample_dosage_at_distance(int p, double center, double r, Rng& rng,
                                 std::optional<double> supply_limit) {
  // The box is clamped to [0,1]; the exact distance is realized by pinning
  // one coordinate to a side that is r away from the center, so r may not
  // exceed the center's distance to the farther unit-box wall.
  const double lo = std::max(0.0, center - r);
  const double hi = std::min(1.0, center + r);
  const bool lo_exact = std::abs(center - lo - r) < 1e-12;
  const bool hi_exact = std::abs(hi - center - r) < 1e-12;
  if (r > 0.0 && !lo_exact && !hi_exact)
    throw std::invalid_argument(
        "sample_dosage_at_distance: distance unreachable inside the unit box");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Eigen::VectorXd d(p);
    for (int i = 0; i < p; ++i) d[i] = rng.uniform(lo, hi);
    const int pin = rng.uniform_int(p);
    const bool to_lo = lo_exact && (!hi_exact || rng.uniform() < 0.5);
    d[pin] = to_lo ? lo : hi;
    if (supply_limit && d.sum() > *supply_limit) continue;
    return Dosage(d);
  }
  throw std::invalid_argument(
      "sample_dosage_at_distance: no feasible dosage at this distance");
}

std::vector<ResultRow> run_passive_sweep(const RunConfig& cfg) {
  SubsetIndex index(cfg.p, cfg.k);
  return distance_sweep(cfg, 0.5, std::nullopt, cfg.k, index);
}

std::vector<ResultRow> run_constrained_sweep(const RunConfig& cfg) {
  if (cfg.L <= 0.0)
    throw std::invalid_argument("constrained_sweep: L must be positive");
  const double center =
      cfg.L >= cfg.p / 2.0 ? 0.5 : cfg.L / static_cast<double>(cfg.p);
  SubsetIndex index(cfg.p, cfg.k);
  return distance_sweep(cfg, center, cfg.L, cfg.k, index);
}

std::vector<ResultRow> run_misspecified_sweep(const RunConfig& cfg) {
  if (cfg.k_assumed >= cfg.p)
    throw std::invalid_argument("misspecified_sweep: k_assumed must be < p");
  SubsetIndex fit_index(cfg.p, cfg.k_assumed);
  return distance_sweep(cfg, 0.5, std::nullopt, cfg.p, fit_index);
}

std::vector<ResultRow> run_uniform_sweep(const RunConfig& cfg) {
  check_counts(cfg);
  SubsetIndex index(cfg.p, cfg.k);
  std::vector<ResultRow> rows;
  std::uint64_t run = 0;
  for (double value : cfg.dosage_grid) {
    if (value < 0.0 || value > 1.0)
      throw std::invalid_argument("uniform_sweep: grid values must be in [0,1]");
    Dosage d = Dosage::uniform(cfg.p, value);
    for (int t = 0; t < cfg.trials; ++t, ++run) {
      ResultRow row = single_run(cfg, index, value, d, run, cfg.k);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ResultRow> run_active_compare(const RunConfig& cfg) {
  check_counts(cfg);
  if (cfg.strategies.empty())
    throw std::invalid_argument("active_compare: strategies must be nonempty");
  SubsetIndex index(cfg.p, cfg.k);
  const int K = index.size();

  for (const std::string& s : cfg.strategies) {
    if (s != "optimal" && s != "random" && s != "half" && s != "partial")
      throw std::invalid_argument("active_compare: unknown strategy " + s);
    if (s == "partial") {
      if (!has_resolution_v_design(cfg.p))
        throw std::invalid_argument(
            "active_compare: no Resolution V design for this p; supported "
            "pairs are (p=5, 2^{5-1}) and (p=8, 2^{8-2})");
      const int design_rows = cfg.p == 5 ? 16 : 64;
      if (cfg.n != design_rows)
        throw std::invalid_argument(
            "active_compare: partial strategy needs n equal to the design "
            "size (16 for p=5, 64 for p=8)");
    }
  }

  std::vector<ResultRow> rows;
  for (const std::string& strategy : cfg.strategies) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      // Model seed depends only on the trial, so strategies compare against
      // the same truth.
      OutcomeModel model = generate_model(
          cfg.p, cfg.k,
          derive_seed(cfg.master_seed, cfg.experiment + "/model", trial, 0),
          cfg.sigma);

      ExperimentState state(index, cfg.n);
      FeatureMatrix all_features(cfg.rounds * cfg.n, K);
      Eigen::VectorXd all_y(cfg.rounds * cfg.n);

      for (int round = 1; round <= cfg.rounds; ++round) {
        // The dosage choice draws from a strategy-specific stream; sampling
        // and noise share one stream across strategies so the comparison is
        // paired (common random numbers, on top of the shared model).
        const std::uint64_t strategy_seed = derive_seed(
            cfg.master_seed, cfg.experiment + "/" + strategy, trial, round);
        const std::uint64_t data_seed = derive_seed(
            cfg.master_seed, cfg.experiment + "/data", trial, round);
        Rng rng(data_seed);

        AssignmentMatrix x;
        if (strategy == "partial") {
          x = resolution_v_design(cfg.p);
        } else {
          Dosage d = Dosage::half(cfg.p);
          if (strategy == "random") {
            Rng dosage_rng(strategy_seed);
            Eigen::VectorXd v(cfg.p);
            for (int i = 0; i < cfg.p; ++i) v[i] = dosage_rng.uniform();
            d = Dosage(v);
          } else if (strategy == "optimal" && round > 1) {
            d = active_dosage(state, acquisition_options(cfg, strategy_seed))
                    .dosage;
          }
          x = sample_assignments(d, cfg.n, rng);
        }

        DesignMatrix dm = design_matrix(x, index);
        Eigen::VectorXd y = observe_all(model, x, rng);
        all_features.middleRows((round - 1) * cfg.n, cfg.n) = dm.features;
        all_y.segment((round - 1) * cfg.n, cfg.n) = y;
        state.add_round(dm.features);

        // Refit on the union of all rounds collected so far.
        EstimationResult est =
            fit(cfg, all_features.topRows(round * cfg.n),
                all_y.head(round * cfg.n), model.B, model.sigma);
        ResultRow row;
        row.experiment = cfg.experiment;
        row.trial = trial;
        row.round = round;
        row.distance = 0.0;
        row.strategy = strategy;
        row.mse = mse(est.beta_hat, model.beta);
        row.branch = branch_name(est.branch);
        row.seed = data_seed;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_fractional_compare(const RunConfig& cfg) {
  check_counts(cfg);
  if (!has_resolution_v_design(cfg.p))
    throw std::invalid_argument(
        "fractional_compare: no Resolution V design for this p (use 5 or 8)");
  const AssignmentMatrix frac = resolution_v_design(cfg.p);
  if (cfg.n != frac.rows())
    throw std::invalid_argument(
        "fractional_compare: n must equal the fractional design size");
  SubsetIndex index(cfg.p, cfg.k);

  std::vector<ResultRow> rows;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    OutcomeModel model = generate_model(
        cfg.p, cfg.k,
        derive_seed(cfg.master_seed, cfg.experiment + "/model", trial, 0),
        cfg.sigma);
    for (const char* strategy : {"fractional", "half"}) {
      const std::uint64_t seed = derive_seed(
          cfg.master_seed, cfg.experiment + "/" + strategy, trial, 1);
      Rng rng(seed);
      AssignmentMatrix x = std::string(strategy) == "fractional"
                               ? frac
                               : sample_assignments(Dosage::half(cfg.p), cfg.n,
                                                    rng);
      DesignMatrix dm = design_matrix(x, index);
      Eigen::VectorXd y = observe_all(model, x, rng);
      EstimationResult est = fit(cfg, dm.features, y, model.B, model.sigma);
      ResultRow row;
      row.experiment = cfg.experiment;
      row.trial = trial;
      row.round = 1;
      row.distance = 0.0;
      row.strategy = strategy;
      row.mse = mse(est.beta_hat, model.beta);
      row.branch = branch_name(est.branch);
      row.seed = seed;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

CombinationDistribution load_target_distribution(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open target distribution: " + path);
  CombinationDistribution q;
  std::string line;
  int lineno = 0;
  double total = 0.0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string pattern;
    double prob;
    if (!(ss >> pattern)) continue;  // blank line
    if (!(ss >> prob))
      throw std::invalid_argument("target distribution line " +
                                  std::to_string(lineno) +
                                  ": expected <pattern> <probability>");
    if (q.p == 0) {
      q.p = static_cast<int>(pattern.size());
      if (q.p < 1 || q.p > 16)
        throw std::invalid_argument("target distribution line " +
                                    std::to_string(lineno) +
                                    ": pattern length must be in [1, 16]");
      q.prob.assign(std::size_t{1} << q.p, 0.0);
    }
    if (static_cast<int>(pattern.size()) != q.p)
      throw std::invalid_argument("target distribution line " +
                                  std::to_string(lineno) +
                                  ": inconsistent pattern length");
    std::size_t bits = 0;
    for (int i = 0; i < q.p; ++i) {
      if (pattern[i] == '+' || pattern[i] == '1')
        bits |= std::size_t{1} << i;
      else if (pattern[i] != '-' && pattern[i] != '0')
        throw std::invalid_argument("target distribution line " +
                                    std::to_string(lineno) +
                                    ": pattern chars must be + or -");
    }
    if (prob < 0.0)
      throw std::invalid_argument("target distribution line " +
                                  std::to_string(lineno) +
                                  ": negative probability");
    q.prob[bits] += prob;
    total += prob;
  }
  if (q.p == 0)
    throw std::invalid_argument("target distribution: file is empty");
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument(
        "target distribution: probabilities sum to " + format_double(total) +
        ", expected 1 within 1e-9");
  return q;
}

EmulateReport run_emulate(const RunConfig& cfg) {
  CombinationDistribution q = load_target_distribution(cfg.target_file);
  EmulateReport report{emulate_dosage(q), 0.0, {}};
  report.achieved_kl = kl_divergence(q, report.dosage);
  Rng rng(derive_seed(cfg.master_seed, cfg.experiment + "/comparators", 0, 0));
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd d(q.p);
    for (int j = 0; j < q.p; ++j) d[j] = rng.uniform();
    report.comparator_kl.push_back(kl_divergence(q, Dosage(d)));
  }
  return report;
}

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "experiment,trial,round,distance,strategy,mse,branch,seed\n";
  for (const ResultRow& r : rows) {
    os << r.experiment << "," << r.trial << "," << r.round << ","
       << format_double(r.distance) << "," << r.strategy << ","
       << format_double(r.mse) << "," << r.branch << "," << r.seed << "\n";
  }
}

void write_summary_csv(const std::vector<ResultRow>& rows,
                       const std::string& path) {
  // Cells keyed by (strategy, round, distance); mean/std over raw mse.
  std::map<std::tuple<std::string, int, double>, std::vector<double>> cells;
  for (const ResultRow& r : rows)
    cells[{r.strategy, r.round, r.distance}].push_back(r.mse);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "strategy,round,distance,count,mean_mse,std_mse\n";
  for (const auto& [key, values] : cells) {
    const auto& [strategy, round, distance] = key;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = values.size() > 1 ? var / (values.size() - 1) : 0.0;
    os << strategy << "," << round << "," << format_double(distance) << ","
       << values.size() << "," << format_double(mean) << ","
       << format_double(std::sqrt(var)) << "\n";
  }
}

void write_manifest(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "version=" << kVersion << "\n"
     << "kernel_backend=" << kernels::active().name << "\n"
     << "experiment=" << cfg.experiment << "\n"
     << "p=" << cfg.p << "\n"
     << "k=" << cfg.k << "\n"
     << "k_assumed=" << cfg.k_assumed << "\n"
     << "n=" << cfg.n << "\n"
     << "rounds=" << cfg.rounds << "\n"
     << "trials=" << cfg.trials << "\n"
     << "dosages_per_distance=" << cfg.dosages_per_distance << "\n"
     << "sigma=" << format_double(cfg.sigma) << "\n"
     << "L=" << format_double(cfg.L) << "\n"
     << "estimator=" << cfg.estimator << "\n"
     << "objective=" << cfg.objective << "\n"
     << "restarts=" << cfg.restarts << "\n"
     << "max_iters=" << cfg.max_iters << "\n"
     << "tol=" << format_double(cfg.tol) << "\n"
     << "seed=" << cfg.master_seed << "\n"
     << "target_file=" << cfg.target_file << "\n";
  os << "distances=";
  for (std::size_t i = 0; i < cfg.distances.size(); ++i)
    os << (i ? " " : "") << format_double(cfg.distances[i]);
  os << "\ndosage_grid=";
  for (std::size_t i = 0; i < cfg.dosage_grid.size(); ++i)
    os << (i ? " " : "") << format_double(cfg.dosage_grid[i]);
  os << "\nstrategies=";
  for (std::size_t i = 0; i < cfg.strategies.size(); ++i)
    os << (i ? " " : "") << cfg.strategies[i];
  os << "\n";
}

CellStats cell_stats(const std::vector<ResultRow>& rows,
                     const std::string& strategy, int round, double distance) {
  CellStats stats;
  double sum = 0.0, sumsq = 0.0;
  for (const ResultRow& r : rows) {
    if (r.strategy != strategy || r.round != round) continue;
    if (std::abs(r.distance - distance) > 1e-12) continue;
    sum += r.mse;
    sumsq += r.mse * r.mse;
    ++stats.count;
  }
  if (stats.count == 0) return stats;
  stats.mean = sum / stats.count;
  const double var =
      stats.count > 1
          ? std::max(0.0, (sumsq - stats.count * stats.mean * stats.mean) /
                              (stats.count - 1))
          : 0.0;
  stats.stddev = std::sqrt(var);
  return stats;
}

void run_and_write(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string base = cfg.out_dir + "/";

  if (cfg.experiment == "emulate") {
    EmulateReport report = run_emulate(cfg);
    std::ofstream os(base + "emulate_report.txt");
    if (!os) throw std::runtime_error("cannot open emulate report for writing");
    os << "dosage=";
    for (int i = 0; i < report.dosage.p(); ++i)
      os << (i ? " " : "") << format_double(report.dosage[i]);
    os << "\nachieved_kl=" << format_double(report.achieved_kl) << "\n";
    double best = std::numeric_limits<double>::infinity();
    for (double v : report.comparator_kl) best = std::min(best, v);
    os << "best_random_comparator_kl=" << format_double(best) << "\n";
    for (std::size_t i = 0; i < report.comparator_kl.size(); ++i)
      os << "comparator_" << i << "="
         << format_double(report.comparator_kl[i]) << "\n";
    write_manifest(cfg, base + "manifest.txt");
    return;
  }

  std::vector<ResultRow> rows;
  if (cfg.experiment == "passive_sweep")
    rows = run_passive_sweep(cfg);
  else if (cfg.experiment == "uniform_sweep")
    rows = run_uniform_sweep(cfg);
  else if (cfg.experiment == "active_compare")
    rows = run_active_compare(cfg);
  else if (cfg.experiment == "constrained_sweep")
    rows = run_constrained_sweep(cfg);
  else if (cfg.experiment == "misspecified_sweep")
    rows = run_misspecified_sweep(cfg);
  else if (cfg.experiment == "fractional_compare")
    rows = run_fractional_compare(cfg);
  else
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);

  write_results_csv(rows, base + cfg.experiment + ".csv");
  write_summary_csv(rows, base + "summary.csv");
  write_manifest(cfg, base + "manifest.txt");
}

}  // namespace pfd::harness
