#include "decopt/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace decopt {

const char* method_name(Method m) {
  switch (m) {
    case Method::dgm_bb_c: return "dgm-bb-c";
    case Method::dgm_c: return "dgm-c";
    case Method::atc_diging: return "atc-diging";
    case Method::diging: return "diging";
    case Method::extra: return "extra";
    case Method::dgd: return "dgd";
    case Method::near_dgd_plus: return "near-dgd+";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::dgm_bb_c, Method::dgm_c, Method::atc_diging,
                   Method::diging, Method::extra, Method::dgd,
                   Method::near_dgd_plus}) {
    if (name == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

bool has_tracker(Method m) {
  return m == Method::dgm_bb_c || m == Method::dgm_c ||
         m == Method::atc_diging || m == Method::diging;
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::stalled: return "stalled";
    case RunStatus::diverged: return "diverged";
  }
  return "?";
}

SolverState init_state(const SolverConfig& config,
                       const MultiAgentObjective& objective,
                       const Eigen::MatrixXd& x0) {
  const int n = objective.num_agents();
  if (x0.rows() != n || x0.cols() != objective.dim())
    throw std::invalid_argument("x0 shape does not match the objective");
  if (config.inner_loops < 1)
    throw std::invalid_argument("inner consensus iterations R must be >= 1");

  SolverState s;
  s.x = x0;
  s.grads = objective.stacked_gradient(x0);
  s.grad_evals = n;
  s.y = s.grads;
  s.x_prev = s.x;
  s.grads_prev = s.grads;

  if (config.method == Method::dgm_bb_c) {
    if (!(config.alpha0 > 0.0))
      throw std::invalid_argument("alpha0 must be positive");
    s.alphas = Eigen::VectorXd::Constant(n, config.alpha0);
  } else if (config.method == Method::dgm_c ||
             config.method == Method::atc_diging) {
    s.alphas = config.agent_steps.size() > 0
                   ? config.agent_steps
                   : Eigen::VectorXd::Constant(n, config.step);
    if (s.alphas.size() != n)
      throw std::invalid_argument("agent_steps length does not match n");
    if ((s.alphas.array() <= 0.0).any())
      throw std::invalid_argument("step sizes must be positive");
  } else {
    if (!(config.step > 0.0))
      throw std::invalid_argument("step size must be positive");
    s.alphas = Eigen::VectorXd::Constant(n, config.step);
  }
  return s;
}

Eigen::MatrixXd consensus_sweep(const Eigen::MatrixXd& v,
                                const Eigen::MatrixXd& w, int rounds,
                                long long& comms) {
  Eigen::MatrixXd out = v;
  for (int r = 0; r < rounds; ++r) out = w * out;
  comms += rounds;
  return out;
}

namespace {

// BB steps for iteration k >= 1; k = 0 keeps the priming alpha_0.
void update_bb_steps(SolverState& state, double l_const, BbVariant variant) {
  if (state.k < 1) return;
  const int n = static_cast<int>(state.x.rows());
  CurvaturePair pair;
  for (int i = 0; i < n; ++i) {
    pair.s = (state.x.row(i) - state.x_prev.row(i)).transpose();
    pair.z = (state.grads.row(i) - state.grads_prev.row(i)).transpose();
    const BbStep res = bb_step(pair, variant);
    switch (res.status) {
      case BbStatus::ok:
        state.alphas(i) = res.alpha;
        break;
      case BbStatus::zero_step:
        break;  // iterate did not move: reuse the previous step
      case BbStatus::nonpositive_curvature:
        state.alphas(i) = 1.0 / l_const;
        ++state.bb_fallbacks;
        break;
    }
  }
  state.bb_alpha_max = state.has_bb_stats
                           ? std::max(state.bb_alpha_max, state.alphas.maxCoeff())
                           : state.alphas.maxCoeff();
  const double mean = state.alphas.mean();
  state.bb_mean_alpha_max =
      state.has_bb_stats ? std::max(state.bb_mean_alpha_max, mean) : mean;
  state.has_bb_stats = true;
}

void tracked_update(SolverState& state, const MultiAgentObjective& objective,
                    const Eigen::MatrixXd& w, int inner_loops) {
  Eigen::MatrixXd x_new = consensus_sweep(
      state.x - state.alphas.asDiagonal() * state.y, w, inner_loops,
      state.comms);
  Eigen::MatrixXd grads_new = objective.stacked_gradient(x_new);
  state.grad_evals += objective.num_agents();
  Eigen::MatrixXd y_new = consensus_sweep(
      state.y + grads_new - state.grads, w, inner_loops, state.comms);

  state.x_prev = std::move(state.x);
  state.grads_prev = std::move(state.grads);
  state.x = std::move(x_new);
  state.grads = std::move(grads_new);
  state.y = std::move(y_new);
  ++state.k;
}

}  // namespace

void dgm_bb_c_step(SolverState& state, const MultiAgentObjective& objective,
                   const Eigen::MatrixXd& w, int inner_loops,
                   BbVariant variant) {
  update_bb_steps(state, objective.lipschitz(), variant);
  tracked_update(state, objective, w, inner_loops);
}

void dgm_c_step(SolverState& state, const MultiAgentObjective& objective,
                const Eigen::MatrixXd& w, int inner_loops) {
  tracked_update(state, objective, w, inner_loops);
}

void atc_diging_step(SolverState& state, const MultiAgentObjective& objective,
                     const Eigen::MatrixXd& w) {
  dgm_c_step(state, objective, w, 1);
}

void diging_step(SolverState& state, const MultiAgentObjective& objective,
                 const Eigen::MatrixXd& w) {
  Eigen::MatrixXd x_new =
      w * state.x - state.alphas.asDiagonal() * state.y;
  ++state.comms;
  Eigen::MatrixXd grads_new = objective.stacked_gradient(x_new);
  state.grad_evals += objective.num_agents();
  Eigen::MatrixXd y_new = w * state.y + grads_new - state.grads;
  ++state.comms;

  state.x_prev = std::move(state.x);
  state.grads_prev = std::move(state.grads);
  state.x = std::move(x_new);
  state.grads = std::move(grads_new);
  state.y = std::move(y_new);
  ++state.k;
}

void extra_step(SolverState& state, const MultiAgentObjective& objective,
                const Eigen::MatrixXd& w) {
  const double alpha = state.alphas(0);
  Eigen::MatrixXd x_new;
  if (state.k == 0) {
    state.wx_prev = w * state.x;
    ++state.comms;
    x_new = state.wx_prev - alpha * state.grads;
  } else {
    Eigen::MatrixXd wx = w * state.x;
    ++state.comms;
    x_new = state.x + wx - 0.5 * (state.x_prev + state.wx_prev) -
            alpha * (state.grads - state.grads_prev);
    state.wx_prev = std::move(wx);
  }
  state.x_prev = std::move(state.x);
  state.grads_prev = std::move(state.grads);
  state.x = std::move(x_new);
  state.grads = objective.stacked_gradient(state.x);
  state.grad_evals += objective.num_agents();
  ++state.k;
}

void dgd_step(SolverState& state, const MultiAgentObjective& objective,
              const Eigen::MatrixXd& w) {
  Eigen::MatrixXd x_new =
      w * state.x - state.alphas.asDiagonal() * state.grads;
  ++state.comms;
  state.x_prev = std::move(state.x);
  state.grads_prev = std::move(state.grads);
  state.x = std::move(x_new);
  state.grads = objective.stacked_gradient(state.x);
  state.grad_evals += objective.num_agents();
  ++state.k;
}

void near_dgd_plus_step(SolverState& state,
                        const MultiAgentObjective& objective,
                        const Eigen::MatrixXd& w) {
  const int rounds = static_cast<int>(state.k) + 1;  // t_k = k, t_1 = 1
  Eigen::MatrixXd x_new =
      consensus_sweep(state.x - state.alphas.asDiagonal() * state.grads, w,
                      rounds, state.comms);
  state.x_prev = std::move(state.x);
  state.grads_prev = std::move(state.grads);
  state.x = std::move(x_new);
  state.grads = objective.stacked_gradient(state.x);
  state.grad_evals += objective.num_agents();
  ++state.k;
}

void step(SolverState& state, const SolverConfig& config,
          const MultiAgentObjective& objective, const Eigen::MatrixXd& w) {
  switch (config.method) {
    case Method::dgm_bb_c:
      dgm_bb_c_step(state, objective, w, config.inner_loops,
                    config.bb_variant);
      break;
    case Method::dgm_c:
      dgm_c_step(state, objective, w, config.inner_loops);
      break;
    case Method::atc_diging:
      atc_diging_step(state, objective, w);
      break;
    case Method::diging:
      diging_step(state, objective, w);
      break;
    case Method::extra:
      extra_step(state, objective, w);
      break;
    case Method::dgd:
      dgd_step(state, objective, w);
      break;
    case Method::near_dgd_plus:
      near_dgd_plus_step(state, objective, w);
      break;
  }
}

namespace {

IterationRow make_row(const SolverState& state, const SolverConfig& config,
                      const Eigen::MatrixXd& x_star_stack, double denom,
                      int n) {
  IterationRow row;
  row.k = state.k;
  row.rel_err =
      denom > 0.0 ? (state.x - x_star_stack).norm() / denom : 0.0;
  row.grad_evals = state.grad_evals;
  row.comm_rounds = state.comms;
  row.cost = config.cost_comm * static_cast<double>(state.comms) +
             config.cost_grad * static_cast<double>(state.grad_evals) / n;
  row.mean_alpha = state.alphas.mean();
  row.max_alpha = state.alphas.maxCoeff();

  const Eigen::RowVectorXd xbar = state.x.colwise().mean();
  row.v1 = (state.x - Eigen::VectorXd::Ones(n) * xbar).norm();
  if (has_tracker(config.method)) {
    const Eigen::RowVectorXd ybar = state.y.colwise().mean();
    row.v2 = (state.y - Eigen::VectorXd::Ones(n) * ybar).norm();
  }
  row.v3 = (xbar.transpose() - x_star_stack.row(0).transpose()).norm();
  return row;
}

}  // namespace

RunRecord run(const SolverConfig& config, const MultiAgentObjective& objective,
              const Eigen::MatrixXd& w, const Eigen::VectorXd& x_star) {
  const Eigen::MatrixXd x0 =
      Eigen::MatrixXd::Zero(objective.num_agents(), objective.dim());
  return run(config, objective, w, x_star, x0);
}

RunRecord run(const SolverConfig& config, const MultiAgentObjective& objective,
              const Eigen::MatrixXd& w, const Eigen::VectorXd& x_star,
              const Eigen::MatrixXd& x0) {
  const int n = objective.num_agents();
  const double l_const = objective.lipschitz();
  const double mu = objective.strong_convexity();
  const double strict_bound = 2.0 / l_const - mu / (l_const * l_const);
  const double weak_bound = 2.0 / l_const;

  const Eigen::MatrixXd x_star_stack =
      Eigen::VectorXd::Ones(n) * x_star.transpose();
  const double denom = (x0 - x_star_stack).norm();

  SolverState state = init_state(config, objective, x0);
  RunRecord record;
  record.method = method_name(config.method);
  record.status = RunStatus::max_iterations;

  // Double precision cannot resolve relative errors below ~1e-12 reliably.
  const double stop_target = std::max(config.target_rel_err, 1e-12);

  // After the step producing x_{k+1} the state's alphas hold alpha_k; they
  // are BB-computed only from k >= 1, i.e. once s.k >= 2.
  auto note_step_stats = [&](const SolverState& s) {
    if (config.method != Method::dgm_bb_c || s.k < 2) return;
    const double mean = s.alphas.mean();
    if (mean > strict_bound + 1e-12) ++record.mean_step_violations_strict;
    if (mean >= weak_bound) ++record.mean_step_violations_weak;
    record.max_lambda =
        std::max(record.max_lambda,
                 std::max(std::abs(1.0 - mu * mean),
                          std::abs(1.0 - l_const * mean)));
    for (int i = 0; i < n; ++i) {
      if (!assert_bb_bounds(s.alphas(i), l_const, mu, 1e-9))
        ++record.bb_bound_violations;
    }
  };

  auto note_tracking = [&](const SolverState& s) {
    if (!has_tracker(config.method)) return;
    const Eigen::RowVectorXd ybar = s.y.colwise().mean();
    const Eigen::RowVectorXd gbar = s.grads.colwise().mean();
    record.max_tracking_residual =
        std::max(record.max_tracking_residual, (ybar - gbar).norm());
  };

  record.rows.push_back(make_row(state, config, x_star_stack, denom, n));
  note_tracking(state);

  while (true) {
    const IterationRow& last = record.rows.back();
    if (!std::isfinite(last.rel_err) ||
        last.rel_err > config.divergence_threshold) {
      record.status = RunStatus::diverged;
      record.diagnostic = "relative error exceeded " +
                          std::to_string(config.divergence_threshold) +
                          " at iteration " + std::to_string(last.k);
      break;
    }
    if (last.rel_err <= stop_target) {
      record.status = RunStatus::converged;
      break;
    }
    if (state.k >= config.max_iterations) {
      record.status = RunStatus::max_iterations;
      break;
    }
    if (config.stall_window > 0 &&
        state.k >= config.stall_window) {
      const double before =
          record.rows[record.rows.size() - 1 - config.stall_window].rel_err;
      if (last.rel_err > before * (1.0 - 1e-6)) {
        record.status = RunStatus::stalled;
        record.diagnostic = "no progress over the last " +
                            std::to_string(config.stall_window) +
                            " iterations";
        break;
      }
    }

    step(state, config, objective, w);
    note_step_stats(state);
    note_tracking(state);
    record.rows.push_back(make_row(state, config, x_star_stack, denom, n));
  }

  record.has_bb_stats = state.has_bb_stats;
  record.alpha_max = state.bb_alpha_max;
  record.mean_alpha_max = state.bb_mean_alpha_max;
  record.bb_fallbacks = state.bb_fallbacks;
  return record;
}

}  // namespace decopt
