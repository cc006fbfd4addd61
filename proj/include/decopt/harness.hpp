// Experiment orchestration: builds instances and graphs from a plan, runs
// method cells, tunes baseline step sizes, sweeps configuration axes, and
// writes the CSV / JSON artifacts.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "decopt/certificates.hpp"
#include "decopt/graph.hpp"
#include "decopt/objective.hpp"
#include "decopt/run_record.hpp"
#include "decopt/solvers.hpp"
#include "decopt/weights.hpp"

namespace decopt {

struct MethodPlan {
  Method method = Method::dgm_bb_c;
  int inner_loops = 1;
  BbVariant bb_variant = BbVariant::short_step;
  double alpha0 = 1.4;
  double step = 0.0;           // constant step; 0 with tune_step=false is an error
  bool tune_step = false;      // grid-search the constant step first
  bool perturb_steps = false;  // per-agent steps = step * U(0.6, 1.2)
};

struct ExperimentPlan {
  // Sensing instance.
  int n = 200;
  int m_i = 20;
  int p = 10;
  double l_target = 1.0;
  double mu_target = 0.5;
  double noise_scale = 0.01;

  // Graph.
  double r_c = 0.1;

  // Master seed; instance, graph and perturbation streams derive from it.
  std::uint64_t seed = 1;

  std::vector<MethodPlan> methods;
  long long max_iterations = 10000;
  double target_rel_err = 1e-10;
  long long stall_window = 0;
  double cost_comm = 1.0;
  double cost_grad = 1.0;
  std::string out_dir;  // empty: keep results in memory only
};

struct ExperimentSetup {
  LeastSquaresInstance instance;
  Graph graph;
  WeightMatrix weights;
};

// Instance and connected weighted graph for a plan; deterministic.
ExperimentSetup prepare(const ExperimentPlan& plan);

// Executes every method cell. Writes one CSV per cell plus summary.json when
// out_dir is set; a diverged cell is recorded (and its partial CSV written)
// before the error is reported through the record's status.
std::vector<RunRecord> run_experiment(const ExperimentPlan& plan);

// Same, but on an externally supplied instance/graph pair (e.g. fixtures
// loaded from JSON instead of generated from the plan).
std::vector<RunRecord> run_experiment(const ExperimentPlan& plan,
                                      const ExperimentSetup& setup);

struct TunedStep {
  double alpha = 0.0;
  bool converged = false;      // false: best-effort pick, nothing hit target
  long long iterations = -1;   // iterations to target at the chosen step
};

// Grid-searches a constant step size, minimizing iterations to 1e-6 relative
// error (cap 10^4); ties break toward the smaller step. Perturbation is never
// applied while tuning.
TunedStep tune_constant_step(const SolverConfig& base,
                             const MultiAgentObjective& objective,
                             const Eigen::MatrixXd& w,
                             const Eigen::VectorXd& x_star,
                             const std::vector<double>& grid);

// 20 log-spaced points in [0.01/L, 2/L].
std::vector<double> default_step_grid(double l_const);

struct SweepResult {
  std::vector<double> axis;
  std::vector<RunRecord> records;
  std::vector<long long> iterations_to_target;  // -1 when never reached
  double spread = 0.0;      // max/min over cells that reached the target
  int certificate_r_min = 0;  // R lower bound for the realized spectral gap
};

// DGM-BB-C across a grid of initial step sizes.
SweepResult sweep_alpha0(const ExperimentPlan& plan,
                         const std::vector<double>& alpha0_values);

// DGM-BB-C across a grid of inner consensus iteration counts.
SweepResult sweep_inner_loops(const ExperimentPlan& plan,
                              const std::vector<int>& r_values);

// First iteration index whose relative error reaches the target, -1 if none.
long long iterations_to(const RunRecord& record, double target);

// Per-iteration contraction factor exp(slope) from a least-squares fit of
// log rel_err over the last `window_fraction` of iterations before the floor.
// Requires the record to have converged below 1e-8 and at least 10 fit
// points; throws std::invalid_argument otherwise.
double rate_fit(const RunRecord& record, double window_fraction = 0.6);

// Columns: k,rel_err,grad_evals,comm_rounds,cost,mean_alpha,max_alpha,v1,v2,v3
// with 17 significant digits, LF line endings, written atomically.
void emit_csv(const RunRecord& record, const std::string& path);

void emit_summary(const std::vector<RunRecord>& records, double target,
                  const std::string& path);

// True when the run finished without divergence and every asserted invariant
// held (BB bounds, tracking residual, terminal residual triple, cost
// bookkeeping). Details of any violation land in record.metadata.
bool invariants_ok(const RunRecord& record);

// Key-value config files: `key = value` lines, # comments, version = 1.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);
void apply_plan_kv(const std::map<std::string, std::string>& kv,
                   ExperimentPlan& plan);

}  // namespace decopt
