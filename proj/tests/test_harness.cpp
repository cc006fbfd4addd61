#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <limits>
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "decopt/harness.hpp"
#include "oracles.hpp"

using namespace decopt;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("decopt_test_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RunRecord synthetic_record(const std::vector<double>& rel_errs) {
  RunRecord rec;
  rec.method = "dgd";
  for (std::size_t k = 0; k < rel_errs.size(); ++k) {
    IterationRow row;
    row.k = static_cast<long long>(k);
    row.rel_err = rel_errs[k];
    rec.rows.push_back(row);
  }
  return rec;
}

ExperimentPlan smoke_plan() {
  ExperimentPlan plan;
  plan.n = 3;
  plan.m_i = 2;
  plan.p = 2;
  plan.l_target = 1.0;
  plan.mu_target = 0.5;
  plan.noise_scale = 0.05;
  plan.seed = 77;
  plan.r_c = 0.9;
  plan.max_iterations = 60;
  plan.target_rel_err = 1e-10;
  MethodPlan mp;
  mp.method = Method::dgm_bb_c;
  mp.inner_loops = 2;
  mp.alpha0 = 1.4;
  plan.methods = {mp};
  return plan;
}

}  // namespace

TEST_CASE("rate_fit: exactly geometric sequence recovers the factor") {
  std::vector<double> errs;
  for (int k = 0; k <= 300; ++k) errs.push_back(std::pow(0.9, k));
  CHECK(rate_fit(synthetic_record(errs)) == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("rate_fit: constant converged sequence has slope zero") {
  CHECK(rate_fit(synthetic_record(std::vector<double>(40, 1e-9))) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rate_fit rejects short windows and unconverged records") {
  std::vector<double> short_errs;
  for (int k = 0; k < 8; ++k) short_errs.push_back(std::pow(0.1, k + 2));
  CHECK_THROWS_AS(rate_fit(synthetic_record(short_errs)),
                  std::invalid_argument);
  CHECK_THROWS_AS(rate_fit(synthetic_record(std::vector<double>(40, 0.5))),
                  std::invalid_argument);
}

TEST_CASE("emit_csv: empty record produces a header-only file") {
  const auto dir = fresh_dir("header");
  RunRecord rec;
  rec.method = "dgd";
  emit_csv(rec, (dir / "empty.csv").string());
  CHECK(slurp(dir / "empty.csv") ==
        "k,rel_err,grad_evals,comm_rounds,cost,mean_alpha,max_alpha,v1,v2,v3\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("emit_csv: 17 significant digits, LF endings, no temp litter") {
  const auto dir = fresh_dir("format");
  RunRecord rec;
  rec.method = "dgd";
  IterationRow row;
  row.k = 3;
  row.rel_err = 1.0 / 3.0;
  row.grad_evals = 30;
  row.comm_rounds = 6;
  row.cost = 16.0;
  row.mean_alpha = 0.1;
  row.max_alpha = 0.1;
  rec.rows.push_back(row);
  emit_csv(rec, (dir / "row.csv").string());
  const std::string text = slurp(dir / "row.csv");
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find("3,0.33333333333333331,30,6,16,") != std::string::npos);
  bool litter = false;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".tmp") litter = true;
  CHECK_FALSE(litter);
  std::filesystem::remove_all(dir);
}

TEST_CASE("smoke experiment matches the golden CSV byte for byte") {
  ExperimentPlan plan = smoke_plan();
  const auto dir = fresh_dir("golden");
  plan.out_dir = dir.string();
  const auto records = run_experiment(plan);
  REQUIRE(records.size() == 1);
  CHECK(records[0].status == RunStatus::converged);
  const std::string produced = slurp(dir / "dgm-bb-c.csv");
  const std::string golden =
      slurp(std::filesystem::path(DECOPT_TEST_DATA_DIR) / "golden_smoke.csv");
  CHECK(produced == golden);
  CHECK(std::filesystem::exists(dir / "summary.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("cost bookkeeping is exact for configured cost weights") {
  ExperimentPlan plan = smoke_plan();
  plan.cost_comm = 2.5;
  plan.cost_grad = 0.3;
  const auto records = run_experiment(plan);
  for (const auto& row : records[0].rows) {
    const double expected = 2.5 * static_cast<double>(row.comm_rounds) +
                            0.3 * static_cast<double>(row.grad_evals) / 3.0;
    CHECK(row.cost == expected);
  }
}

TEST_CASE("empty method list is rejected") {
  ExperimentPlan plan = smoke_plan();
  plan.methods.clear();
  CHECK_THROWS_AS(run_experiment(plan), std::invalid_argument);
}

TEST_CASE("tuning on the centralized quadratic picks the grid point nearest 2/(mu+L)") {
  // n = 1, spectrum endpoints exactly {0.25, 1}: classical optimum 1.6.
  const auto inst = generate_sensing_instance(1, 3, 2, 1.0, 0.25, 0.0, 5);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Ones(1, 1);
  SolverConfig base;
  base.method = Method::dgd;
  const auto grid = default_step_grid(1.0);
  const TunedStep tuned =
      tune_constant_step(base, inst, w, inst.x_star, grid);
  REQUIRE(tuned.converged);

  double nearest = grid[0];
  for (const double g : grid)
    if (std::abs(g - 1.6) < std::abs(nearest - 1.6)) nearest = g;
  CHECK(tuned.alpha == doctest::Approx(nearest));

  // Independent recount: no grid point beats the returned iteration count.
  for (const double g : grid) {
    SolverConfig c = base;
    c.step = g;
    c.target_rel_err = 1e-6;
    c.max_iterations = 10000;
    const RunRecord rec = run(c, inst, w, inst.x_star);
    const long long iters = iterations_to(rec, 1e-6);
    if (iters >= 0) CHECK(iters >= tuned.iterations);
  }
}

TEST_CASE("degenerate one-point grid returns that point") {
  const auto inst = generate_sensing_instance(1, 3, 2, 1.0, 0.5, 0.0, 6);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Ones(1, 1);
  SolverConfig base;
  base.method = Method::dgd;
  const TunedStep tuned =
      tune_constant_step(base, inst, w, inst.x_star, {0.5});
  CHECK(tuned.alpha == 0.5);
}

TEST_CASE("default grid spans [0.01/L, 2/L] with 20 log-spaced points") {
  const auto grid = default_step_grid(2.0);
  REQUIRE(grid.size() == 20);
  CHECK(grid.front() == doctest::Approx(0.005));
  CHECK(grid.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(grid[i] / grid[i - 1] ==
          doctest::Approx(grid[1] / grid[0]).epsilon(1e-12));
}

TEST_CASE("sweep_alpha0: single point equals a plain run; spread recounted") {
  ExperimentPlan plan = smoke_plan();
  plan.target_rel_err = 1e-8;

  const SweepResult single = sweep_alpha0(plan, {1.4});
  REQUIRE(single.records.size() == 1);
  const auto records = run_experiment(plan);
  CHECK(single.records[0].rows.size() == records[0].rows.size());
  CHECK(single.records[0].final_row().rel_err ==
        records[0].final_row().rel_err);
  CHECK(single.spread == doctest::Approx(1.0));

  const SweepResult sweep = sweep_alpha0(plan, {0.5, 1.0, 1.4});
  REQUIRE(sweep.records.size() == 3);
  long long lo = std::numeric_limits<long long>::max(), hi = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const long long iters = iterations_to(sweep.records[i], 1e-8);
    CHECK(iters == sweep.iterations_to_target[i]);
    if (iters >= 0) {
      lo = std::min(lo, iters);
      hi = std::max(hi, iters);
    }
  }
  CHECK(sweep.spread ==
        doctest::Approx(static_cast<double>(hi) / static_cast<double>(lo)));
}

TEST_CASE("sweep_inner_loops: per-R communication counts equal 2RK") {
  ExperimentPlan plan = smoke_plan();
  plan.target_rel_err = 1e-8;
  const SweepResult sweep = sweep_inner_loops(plan, {1, 2, 3});
  REQUIRE(sweep.records.size() == 3);
  CHECK(sweep.certificate_r_min >= 1);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& rec = sweep.records[i];
    const long long r = static_cast<long long>(sweep.axis[i]);
    const long long k_final = rec.final_row().k;
    CHECK(rec.final_row().comm_rounds == 2 * r * k_final);
  }
}

TEST_CASE("invariants_ok flags divergence and violated row zero") {
  RunRecord rec;
  rec.method = "dgd";
  IterationRow row;
  row.rel_err = 1.0;
  rec.rows.push_back(row);
  rec.status = RunStatus::max_iterations;
  CHECK(invariants_ok(rec));
  rec.status = RunStatus::diverged;
  CHECK_FALSE(invariants_ok(rec));
  rec.status = RunStatus::converged;
  rec.rows[0].rel_err = 0.7;
  CHECK_FALSE(invariants_ok(rec));
}

TEST_CASE("key-value config files parse and apply") {
  const auto dir = fresh_dir("config");
  const auto path = dir / "run.conf";
  {
    std::ofstream out(path);
    out << "# smoke config\n";
    out << "version = 1\n";
    out << "method = dgm-bb-c,dgd\n";
    out << "n = 12\n";
    out << "m_i = 4\n";
    out << "p = 3\n";
    out << "L = 2.0\n";
    out << "mu = 0.4\n";
    out << "r_c = 0.6    # dense\n";
    out << "seed = 99\n";
    out << "R = 3\n";
    out << "bb = long\n";
    out << "alpha0 = 0.9\n";
    out << "step = 0.2\n";
    out << "target = 1e-7\n";
  }
  ExperimentPlan plan;
  apply_plan_kv(parse_key_value_file(path.string()), plan);
  CHECK(plan.n == 12);
  CHECK(plan.m_i == 4);
  CHECK(plan.p == 3);
  CHECK(plan.l_target == 2.0);
  CHECK(plan.mu_target == 0.4);
  CHECK(plan.r_c == 0.6);
  CHECK(plan.seed == 99);
  CHECK(plan.target_rel_err == 1e-7);
  REQUIRE(plan.methods.size() == 2);
  CHECK(plan.methods[0].method == Method::dgm_bb_c);
  CHECK(plan.methods[0].inner_loops == 3);
  CHECK(plan.methods[0].bb_variant == BbVariant::long_step);
  CHECK(plan.methods[0].alpha0 == 0.9);
  CHECK(plan.methods[1].method == Method::dgd);
  CHECK(plan.methods[1].step == 0.2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config version mismatch is rejected") {
  const auto dir = fresh_dir("badver");
  const auto path = dir / "bad.conf";
  {
    std::ofstream out(path);
    out << "version = 2\n";
  }
  ExperimentPlan plan;
  CHECK_THROWS_AS(apply_plan_kv(parse_key_value_file(path.string()), plan),
                  std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary JSON lists one entry per run with target accounting") {
  ExperimentPlan plan = smoke_plan();
  MethodPlan dgd;
  dgd.method = Method::dgd;
  dgd.step = 0.3;
  plan.methods.push_back(dgd);
  const auto dir = fresh_dir("summary");
  plan.out_dir = dir.string();
  run_experiment(plan);
  const std::string text = slurp(dir / "summary.json");
  CHECK(text.find("\"dgm-bb-c\"") != std::string::npos);
  CHECK(text.find("\"dgd\"") != std::string::npos);
  CHECK(text.find("\"iterations_to_target\"") != std::string::npos);
  CHECK(text.find("\"alpha_max\"") != std::string::npos);
  CHECK(text.find("\"rho\"") != std::string::npos);
  std::filesystem::remove_all(dir);
}
