// Per-run metrics stream shared by the solver loop and the experiment
// harness.

#pragma once

#include <map>
#include <string>
#include <vector>

namespace decopt {

struct IterationRow {
  long long k = 0;
  double rel_err = 0.0;        // ||X_k - X*||_F / ||X_0 - X*||_F
  long long grad_evals = 0;    // cumulative, network total
  long long comm_rounds = 0;   // cumulative multiplications by W
  double cost = 0.0;           // c_c * comm_rounds + c_g * grad_evals / n
  double mean_alpha = 0.0;     // over agents, of the steps that produced X_k
  double max_alpha = 0.0;
  double v1 = 0.0;             // ||X_k - 1 xbar_k||_F
  double v2 = 0.0;             // ||Y_k - 1 ybar_k||_F (0 for tracker-free methods)
  double v3 = 0.0;             // ||xbar_k - x*^T||_2
};

enum class RunStatus { converged, max_iterations, stalled, diverged };

const char* run_status_name(RunStatus s);

struct RunRecord {
  std::string method;
  std::vector<IterationRow> rows;
  RunStatus status = RunStatus::max_iterations;
  std::string diagnostic;

  // Statistics over BB-computed steps only (iterations k >= 1); the priming
  // step alpha_0 is user-supplied, not a BB step, and is excluded.
  bool has_bb_stats = false;
  double alpha_max = 0.0;       // max over k >= 1 and agents
  double mean_alpha_max = 0.0;  // max over k >= 1 of the per-iteration mean
  long long bb_fallbacks = 0;   // nonpositive-curvature fallbacks to 1/L
  long long bb_bound_violations = 0;  // steps outside [1/L - 1e-9, 1/mu + 1e-9]

  // Mean-step-size condition monitoring (flagged, never enforced).
  long long mean_step_violations_strict = 0;  // mean alpha > 2/L - mu/L^2
  long long mean_step_violations_weak = 0;    // mean alpha >= 2/L
  double max_lambda = 0.0;  // max over k of max{|1-mu*abar|, |1-L*abar|}

  double max_tracking_residual = 0.0;  // gradient-tracking methods only

  std::map<std::string, std::string> metadata;

  const IterationRow& final_row() const { return rows.back(); }
};

}  // namespace decopt
