#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "pfd/harness.hpp"

using namespace pfd;
using namespace pfd::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream is(path);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("pfd_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream os(path);
  REQUIRE(os);
  os << body;
}

}  // namespace

TEST_CASE("sample_dosage_at_distance hits the radius exactly") {
  Rng rng(1);
  for (double r : {0.1, 0.3, 0.45}) {
    for (int it = 0; it < 50; ++it) {
      Dosage d = sample_dosage_at_distance(6, 0.5, r, rng);
      double linf = 0.0;
      for (int i = 0; i < 6; ++i) {
        CHECK(d[i] >= 0.5 - r - 1e-15);
        CHECK(d[i] <= 0.5 + r + 1e-15);
        linf = std::max(linf, std::abs(d[i] - 0.5));
      }
      CHECK(linf == doctest::Approx(r).epsilon(1e-12));
    }
  }
}

TEST_CASE("sample_dosage_at_distance off-center and constrained") {
  Rng rng(2);
  const double center = 0.2, r = 0.15, L = 1.2;
  for (int it = 0; it < 50; ++it) {
    Dosage d = sample_dosage_at_distance(4, center, r, rng, L);
    CHECK(d.vec().sum() <= L + 1e-12);
    for (int i = 0; i < 4; ++i) {
      CHECK(d[i] >= center - r - 1e-15);
      CHECK(d[i] <= center + r + 1e-15);
    }
  }
  CHECK_THROWS_AS(sample_dosage_at_distance(4, 0.5, 0.6, rng),
                  std::invalid_argument);
  // Infeasible supply limit: every dosage at this distance exceeds L.
  CHECK_THROWS_AS(sample_dosage_at_distance(4, 0.5, 0.05, rng, 1.0),
                  std::invalid_argument);
}

TEST_CASE("target distribution parsing") {
  fs::path dir = temp_dir("target");
  SUBCASE("well-formed file with both alphabets and a repeated line") {
    write_file(dir / "q.txt", "++ 0.25\n-- 0.25\n10 0.25\n\n01 0.125\n01 0.125\n");
    CombinationDistribution q = load_target_distribution((dir / "q.txt").string());
    CHECK(q.p == 2);
    CHECK(q.prob[0b11] == doctest::Approx(0.25));
    CHECK(q.prob[0b00] == doctest::Approx(0.25));
    CHECK(q.prob[0b01] == doctest::Approx(0.25));  // "10": first char = coord 1
    CHECK(q.prob[0b10] == doctest::Approx(0.25));
  }
  SUBCASE("error messages carry the line number") {
    write_file(dir / "bad_prob.txt", "++ 0.5\n-- oops\n");
    try {
      load_target_distribution((dir / "bad_prob.txt").string());
      FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    write_file(dir / "bad_char.txt", "+x 1.0\n");
    CHECK_THROWS_AS(load_target_distribution((dir / "bad_char.txt").string()),
                    std::invalid_argument);

    write_file(dir / "bad_len.txt", "++ 0.5\n+-- 0.5\n");
    CHECK_THROWS_AS(load_target_distribution((dir / "bad_len.txt").string()),
                    std::invalid_argument);

    write_file(dir / "bad_sum.txt", "++ 0.5\n-- 0.4\n");
    CHECK_THROWS_AS(load_target_distribution((dir / "bad_sum.txt").string()),
                    std::invalid_argument);

    write_file(dir / "neg.txt", "++ 1.5\n-- -0.5\n");
    CHECK_THROWS_AS(load_target_distribution((dir / "neg.txt").string()),
                    std::invalid_argument);

    write_file(dir / "empty.txt", "\n\n");
    CHECK_THROWS_AS(load_target_distribution((dir / "empty.txt").string()),
                    std::invalid_argument);

    CHECK_THROWS_AS(load_target_distribution((dir / "missing.txt").string()),
                    std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("passive sweep output is byte-identical across reruns") {
  RunConfig cfg;
  cfg.experiment = "passive_sweep";
  cfg.p = 4;
  cfg.k = 1;
  cfg.n = 20;
  cfg.trials = 2;
  cfg.dosages_per_distance = 3;
  cfg.distances = {0.0, 0.3};
  cfg.master_seed = 1234;

  fs::path a = temp_dir("rerun_a"), b = temp_dir("rerun_b");
  cfg.out_dir = a.string();
  run_and_write(cfg);
  cfg.out_dir = b.string();
  run_and_write(cfg);
  CHECK(slurp(a / "passive_sweep.csv") == slurp(b / "passive_sweep.csv"));
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));

  // Different master seed changes the data.
  cfg.master_seed = 1235;
  fs::path c = temp_dir("rerun_c");
  cfg.out_dir = c.string();
  run_and_write(cfg);
  CHECK(slurp(a / "passive_sweep.csv") != slurp(c / "passive_sweep.csv"));

  std::string manifest = slurp(a / "manifest.txt");
  CHECK(manifest.find("experiment=passive_sweep") != std::string::npos);
  CHECK(manifest.find("seed=1234") != std::string::npos);

  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("passive sweep row bookkeeping") {
  RunConfig cfg;
  cfg.experiment = "passive_sweep";
  cfg.p = 3;
  cfg.k = 1;
  cfg.n = 16;
  cfg.trials = 3;
  cfg.dosages_per_distance = 2;
  cfg.distances = {0.0, 0.2};
  cfg.master_seed = 7;
  std::vector<ResultRow> rows = run_passive_sweep(cfg);
  REQUIRE(rows.size() == 12);  // 2 distances x 2 dosages x 3 trials
  CHECK(cell_stats(rows, "", 1, 0.0).count == 6);
  CHECK(cell_stats(rows, "", 1, 0.2).count == 6);
  // run ids are unique
  std::set<std::uint64_t> ids;
  for (const ResultRow& r : rows) ids.insert(r.trial);
  CHECK(ids.size() == rows.size());
}

TEST_CASE("uniform sweep uses the grid as the distance column") {
  RunConfig cfg;
  cfg.experiment = "uniform_sweep";
  cfg.p = 3;
  cfg.k = 1;
  cfg.n = 16;
  cfg.trials = 2;
  cfg.dosage_grid = {0.3, 0.5};
  cfg.master_seed = 11;
  std::vector<ResultRow> rows = run_uniform_sweep(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(cell_stats(rows, "", 1, 0.3).count == 2);
  CHECK(cell_stats(rows, "", 1, 0.5).count == 2);
  cfg.dosage_grid = {1.2};
  CHECK_THROWS_AS(run_uniform_sweep(cfg), std::invalid_argument);
}

TEST_CASE("active compare shares the truth across strategies") {
  RunConfig cfg;
  cfg.experiment = "active_compare";
  cfg.p = 3;
  cfg.k = 1;
  cfg.n = 8;
  cfg.rounds = 2;
  cfg.trials = 2;
  cfg.sigma = 0.0;  // noiseless: any full-rank strategy recovers exactly
  cfg.strategies = {"optimal", "half"};
  cfg.master_seed = 5;
  std::vector<ResultRow> rows = run_active_compare(cfg);
  REQUIRE(rows.size() == 8);  // 2 strategies x 2 trials x 2 rounds
  for (const ResultRow& r : rows) {
    if (r.branch == "ols") CHECK(r.mse < 1e-18);
  }
  CHECK(cell_stats(rows, "optimal", 2, 0.0).count == 2);
  CHECK(cell_stats(rows, "half", 1, 0.0).count == 2);
}

TEST_CASE("active compare partial strategy validation") {
  RunConfig cfg;
  cfg.experiment = "active_compare";
  cfg.p = 6;
  cfg.k = 2;
  cfg.n = 16;
  cfg.strategies = {"partial"};
  CHECK_THROWS_AS(run_active_compare(cfg), std::invalid_argument);

  cfg.p = 5;
  cfg.n = 20;  // wrong row count for the 2^{5-1} design
  CHECK_THROWS_AS(run_active_compare(cfg), std::invalid_argument);

  cfg.n = 16;
  cfg.trials = 1;
  cfg.rounds = 1;
  cfg.sigma = 0.0;
  cfg.k = 2;
  std::vector<ResultRow> rows = run_active_compare(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].branch == "ols");
  CHECK(rows[0].mse < 1e-18);

  cfg.strategies = {"bogus"};
  CHECK_THROWS_AS(run_active_compare(cfg), std::invalid_argument);
}

TEST_CASE("fractional compare validation and determinism") {
  RunConfig cfg;
  cfg.experiment = "fractional_compare";
  cfg.p = 8;
  cfg.k = 1;
  cfg.n = 60;
  cfg.trials = 2;
  CHECK_THROWS_AS(run_fractional_compare(cfg), std::invalid_argument);
  cfg.n = 64;
  std::vector<ResultRow> a = run_fractional_compare(cfg);
  std::vector<ResultRow> b = run_fractional_compare(cfg);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mse == b[i].mse);
    CHECK(a[i].seed == b[i].seed);
  }
  CHECK(cell_stats(a, "fractional", 1, 0.0).count == 2);
  CHECK(cell_stats(a, "half", 1, 0.0).count == 2);
}

TEST_CASE("constrained sweep centers at L/p and respects the limit") {
  RunConfig cfg;
  cfg.experiment = "constrained_sweep";
  cfg.p = 4;
  cfg.k = 1;
  cfg.n = 16;
  cfg.trials = 1;
  cfg.dosages_per_distance = 2;
  cfg.L = 1.0;
  cfg.distances = {0.0, 0.1};
  std::vector<ResultRow> rows = run_constrained_sweep(cfg);
  CHECK(rows.size() == 4);
  cfg.L = 0.0;
  CHECK_THROWS_AS(run_constrained_sweep(cfg), std::invalid_argument);
}

TEST_CASE("misspecified sweep fits a truncated index") {
  RunConfig cfg;
  cfg.experiment = "misspecified_sweep";
  cfg.p = 4;
  cfg.k_assumed = 1;
  cfg.n = 32;
  cfg.trials = 2;
  cfg.dosages_per_distance = 1;
  cfg.distances = {0.0};
  std::vector<ResultRow> rows = run_misspecified_sweep(cfg);
  CHECK(rows.size() == 2);
  cfg.k_assumed = 4;
  CHECK_THROWS_AS(run_misspecified_sweep(cfg), std::invalid_argument);
}

TEST_CASE("emulate report files") {
  fs::path dir = temp_dir("emulate");
  write_file(dir / "q.txt", "+- 0.5\n-+ 0.5\n");
  RunConfig cfg;
  cfg.experiment = "emulate";
  cfg.target_file = (dir / "q.txt").string();
  cfg.out_dir = (dir / "out").string();
  run_and_write(cfg);
  std::string report = slurp(dir / "out" / "emulate_report.txt");
  CHECK(report.find("dosage=0.5 0.5") != std::string::npos);
  CHECK(report.find("achieved_kl=") != std::string::npos);
  CHECK(report.find("comparator_99=") != std::string::npos);

  EmulateReport r = run_emulate(cfg);
  CHECK(r.achieved_kl == doctest::Approx(std::log(2.0)));
  REQUIRE(r.comparator_kl.size() == 100);
  for (double v : r.comparator_kl) CHECK(r.achieved_kl <= v + 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("run_and_write rejects unknown experiments and bad configs") {
  RunConfig cfg;
  cfg.experiment = "nope";
  cfg.out_dir = (fs::temp_directory_path() / "pfd_test_nope").string();
  CHECK_THROWS_AS(run_and_write(cfg), std::invalid_argument);
  cfg.experiment = "passive_sweep";
  cfg.trials = 0;
  CHECK_THROWS_AS(run_and_write(cfg), std::invalid_argument);
  cfg.trials = 1;
  cfg.distances = {0.6};
  CHECK_THROWS_AS(run_and_write(cfg), std::invalid_argument);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("results csv format") {
  ResultRow row;
  row.experiment = "x";
  row.trial = 3;
  row.round = 2;
  row.distance = 0.25;
  row.strategy = "half";
  row.mse = 0.5;
  row.branch = "ols";
  row.seed = 9;
  fs::path dir = temp_dir("csv");
  write_results_csv({row}, (dir / "r.csv").string());
  CHECK(slurp(dir / "r.csv") ==
        "experiment,trial,round,distance,strategy,mse,branch,seed\n"
        "x,3,2,0.25,half,0.5,ols,9\n");
  fs::remove_all(dir);
}
