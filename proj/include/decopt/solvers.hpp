// Synchronous round-based steppers for DGM-BB-C and the baseline methods,
// all simulated in lock step over dense stacked states (row i of an n x p
// matrix is agent i's copy). Message passing is simulated, not transported:
// one communication round is one multiplication by the weight matrix.

#pragma once

#include <string>

#include <Eigen/Dense>

#include "decopt/bb_step.hpp"
#include "decopt/objective.hpp"
#include "decopt/run_record.hpp"

namespace decopt {

enum class Method {
  dgm_bb_c,
  dgm_c,
  atc_diging,
  diging,
  extra,
  dgd,
  near_dgd_plus,
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);

// True for methods that maintain the gradient-tracking sequence y.
bool has_tracker(Method m);

struct SolverConfig {
  Method method = Method::dgm_bb_c;
  int inner_loops = 1;  // R, consensus sweeps per phase (DGM-BB-C / DGM-C)
  BbVariant bb_variant = BbVariant::short_step;
  double alpha0 = 1.4;            // priming step before BB kicks in
  Eigen::VectorXd agent_steps;    // per-agent constants (DGM-C / ATC-DIGing)
  double step = 0.1;              // identical constant step (other baselines)
  long long max_iterations = 10000;
  double target_rel_err = 1e-10;
  long long stall_window = 0;     // 0 disables stall detection
  double divergence_threshold = 1e6;
  double cost_comm = 1.0;         // c_c
  double cost_grad = 1.0;         // c_g
};

struct SolverState {
  Eigen::MatrixXd x;           // n x p iterates
  Eigen::MatrixXd y;           // n x p trackers, y_0 = grad f(x_0)
  Eigen::MatrixXd grads;       // grad f at x
  Eigen::MatrixXd x_prev;
  Eigen::MatrixXd grads_prev;
  Eigen::MatrixXd wx_prev;     // cached W * x_prev (EXTRA recursion)
  Eigen::VectorXd alphas;      // per-agent steps used by the most recent step
  long long k = 0;
  long long comms = 0;
  long long grad_evals = 0;

  // BB bookkeeping over iterations k >= 1.
  bool has_bb_stats = false;
  double bb_alpha_max = 0.0;
  double bb_mean_alpha_max = 0.0;
  long long bb_fallbacks = 0;
};

// y_0 = grad f(x_0) (n gradient evaluations); step sizes primed from config.
SolverState init_state(const SolverConfig& config,
                       const MultiAgentObjective& objective,
                       const Eigen::MatrixXd& x0);

// R successive left-multiplications by W (never an explicit matrix power);
// bumps the caller's communication counter by R.
Eigen::MatrixXd consensus_sweep(const Eigen::MatrixXd& v,
                                const Eigen::MatrixXd& w, int rounds,
                                long long& comms);

// x+ = W^R [x - D_k y], y+ = W^R [y + grad f(x+) - grad f(x)], with D_k the
// diagonal of per-agent BB steps. 2R communication rounds, n gradient
// evaluations.
void dgm_bb_c_step(SolverState& state, const MultiAgentObjective& objective,
                   const Eigen::MatrixXd& w, int inner_loops,
                   BbVariant variant);

// Same update with fixed per-agent constant steps.
void dgm_c_step(SolverState& state, const MultiAgentObjective& objective,
                const Eigen::MatrixXd& w, int inner_loops);

// DGM-C with R pinned to 1.
void atc_diging_step(SolverState& state, const MultiAgentObjective& objective,
                     const Eigen::MatrixXd& w);

// x+ = W x - alpha y, y+ = W y + grad f(x+) - grad f(x). 2 rounds.
void diging_step(SolverState& state, const MultiAgentObjective& objective,
                 const Eigen::MatrixXd& w);

// Two-step recursion x_{k+2} = (I+W) x_{k+1} - (I+W)/2 x_k
//                             - alpha [grad f(x_{k+1}) - grad f(x_k)],
// first step x_1 = W x_0 - alpha grad f(x_0). 1 round per iteration.
void extra_step(SolverState& state, const MultiAgentObjective& objective,
                const Eigen::MatrixXd& w);

// x+ = W x - alpha grad f(x). 1 round. Converges only to a neighborhood.
void dgd_step(SolverState& state, const MultiAgentObjective& objective,
              const Eigen::MatrixXd& w);

// x+ = W^{t_k} [x - alpha grad f(x)] with t_k = k (1 round at iteration 1).
void near_dgd_plus_step(SolverState& state,
                        const MultiAgentObjective& objective,
                        const Eigen::MatrixXd& w);

// Dispatches on config.method.
void step(SolverState& state, const SolverConfig& config,
          const MultiAgentObjective& objective, const Eigen::MatrixXd& w);

// Runs until the relative error reaches the target, the iteration budget is
// spent, progress stalls (if enabled), or the run diverges. Row 0 records the
// initial state. Deterministic.
RunRecord run(const SolverConfig& config, const MultiAgentObjective& objective,
              const Eigen::MatrixXd& w, const Eigen::VectorXd& x_star);
RunRecord run(const SolverConfig& config, const MultiAgentObjective& objective,
              const Eigen::MatrixXd& w, const Eigen::VectorXd& x_star,
              const Eigen::MatrixXd& x0);

}  // namespace decopt
