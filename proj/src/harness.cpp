#include "decopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "decopt/rng.hpp"

namespace decopt {

namespace {

// Sub-stream tags off the plan master seed.
constexpr std::uint64_t kInstanceStream = 100;
constexpr std::uint64_t kGraphStream = 200;
constexpr std::uint64_t kPerturbStreamBase = 300;

constexpr double kTuneTarget = 1e-6;
constexpr long long kTuneCap = 10000;

bool uses_constant_step(Method m) { return m != Method::dgm_bb_c; }

SolverConfig make_config(const ExperimentPlan& plan, const MethodPlan& mp) {
  SolverConfig config;
  config.method = mp.method;
  config.inner_loops =
      (mp.method == Method::dgm_bb_c || mp.method == Method::dgm_c)
          ? mp.inner_loops
          : 1;
  config.bb_variant = mp.bb_variant;
  config.alpha0 = mp.alpha0;
  config.step = mp.step;
  config.max_iterations = plan.max_iterations;
  config.target_rel_err = plan.target_rel_err;
  config.stall_window = plan.stall_window;
  config.cost_comm = plan.cost_comm;
  config.cost_grad = plan.cost_grad;
  return config;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

ExperimentSetup prepare(const ExperimentPlan& plan) {
  ExperimentSetup setup;
  setup.instance = generate_sensing_instance(
      plan.n, plan.m_i, plan.p, plan.l_target, plan.mu_target,
      plan.noise_scale, derive_seed(plan.seed, kInstanceStream));
  setup.graph =
      generate_erdos_renyi(plan.n, plan.r_c, derive_seed(plan.seed, kGraphStream));
  setup.weights = metropolis_weights(setup.graph);
  return setup;
}

std::vector<double> default_step_grid(double l_const) {
  std::vector<double> grid;
  const double lo = 0.01 / l_const;
  const double hi = 2.0 / l_const;
  const double factor = std::pow(hi / lo, 1.0 / 19.0);
  double v = lo;
  for (int i = 0; i < 20; ++i, v *= factor) grid.push_back(v);
  return grid;
}

TunedStep tune_constant_step(const SolverConfig& base,
                             const MultiAgentObjective& objective,
                             const Eigen::MatrixXd& w,
                             const Eigen::VectorXd& x_star,
                             const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("empty tuning grid");
  SolverConfig config = base;
  config.agent_steps.resize(0);
  config.target_rel_err = kTuneTarget;
  config.max_iterations = kTuneCap;
  config.stall_window = 500;
  // NEAR-DGD+ communication grows quadratically with the iteration count; a
  // non-converging grid point at the full cap would cost 5e7 sweeps.
  if (base.method == Method::near_dgd_plus) config.max_iterations = 300;

  TunedStep best;
  double best_final = std::numeric_limits<double>::infinity();
  for (const double alpha : grid) {  // ascending grid: ties keep the smaller step
    config.step = alpha;
    const RunRecord rec = run(config, objective, w, x_star);
    const long long iters = iterations_to(rec, kTuneTarget);
    if (iters >= 0) {
      if (!best.converged || iters < best.iterations) {
        best = {alpha, true, iters};
      }
    } else if (!best.converged) {
      const double final_err = rec.final_row().rel_err;
      if (std::isfinite(final_err) && final_err < best_final) {
        best_final = final_err;
        best.alpha = alpha;
        best.iterations = -1;
      }
    }
  }
  if (!best.converged && best.alpha == 0.0) best.alpha = grid.front();
  return best;
}

long long iterations_to(const RunRecord& record, double target) {
  for (const auto& row : record.rows)
    if (row.rel_err <= target) return row.k;
  return -1;
}

std::vector<RunRecord> run_experiment(const ExperimentPlan& plan) {
  return run_experiment(plan, prepare(plan));
}

std::vector<RunRecord> run_experiment(const ExperimentPlan& plan,
                                      const ExperimentSetup& setup) {
  if (plan.methods.empty())
    throw std::invalid_argument("experiment plan lists no methods");
  if (setup.instance.num_agents() != setup.weights.w.rows())
    throw std::invalid_argument("instance and weight matrix disagree on n");

  const int n = setup.instance.num_agents();
  const ProblemConstants pc{setup.instance.lipschitz(),
                            setup.instance.strong_convexity(), n};

  if (!plan.out_dir.empty())
    std::filesystem::create_directories(plan.out_dir);

  std::vector<RunRecord> records;
  for (std::size_t cell = 0; cell < plan.methods.size(); ++cell) {
    const MethodPlan& mp = plan.methods[cell];
    SolverConfig config = make_config(plan, mp);

    TunedStep tuned;
    if (uses_constant_step(mp.method) && mp.tune_step) {
      tuned = tune_constant_step(config, setup.instance, setup.weights.w,
                                 setup.instance.x_star,
                                 default_step_grid(pc.l_const));
      config.step = tuned.alpha;
    }
    if (mp.perturb_steps && uses_constant_step(mp.method)) {
      Rng rng(derive_seed(plan.seed, kPerturbStreamBase + cell));
      config.agent_steps.resize(n);
      for (int i = 0; i < n; ++i)
        config.agent_steps(i) = config.step * rng.uniform(0.6, 1.2);
    }

    RunRecord rec =
        run(config, setup.instance, setup.weights.w, setup.instance.x_star);

    const Certificate cert =
        certify(pc, setup.weights.delta, config.inner_loops, 1.0 / pc.mu);
    rec.metadata["L"] = format_double(pc.l_const);
    rec.metadata["mu"] = format_double(pc.mu);
    rec.metadata["n"] = std::to_string(n);
    rec.metadata["p"] = std::to_string(setup.instance.dim());
    rec.metadata["seed"] = std::to_string(plan.seed);
    rec.metadata["r_c"] = format_double(plan.r_c);
    rec.metadata["graph_edges"] = std::to_string(setup.graph.edges.size());
    rec.metadata["delta"] = format_double(setup.weights.delta);
    rec.metadata["R"] = std::to_string(config.inner_loops);
    rec.metadata["target"] = format_double(plan.target_rel_err);
    rec.metadata["rho"] = format_double(cert.rho);
    rec.metadata["certificate"] = certificate_to_json(cert);
    if (mp.method == Method::dgm_bb_c) {
      rec.metadata["bb"] =
          mp.bb_variant == BbVariant::long_step ? "long" : "short";
      rec.metadata["alpha0"] = format_double(mp.alpha0);
    } else {
      rec.metadata["step"] = format_double(config.step);
      if (mp.tune_step)
        rec.metadata["tuned"] = tuned.converged ? "true" : "best-effort";
      if (mp.perturb_steps) rec.metadata["perturbed"] = "true";
    }

    if (!invariants_ok(rec))
      rec.metadata["invariant_violations"] = "see summary";

    if (!plan.out_dir.empty()) {
      emit_csv(rec, plan.out_dir + "/" + rec.method + ".csv");
    }
    records.push_back(std::move(rec));
  }

  if (!plan.out_dir.empty())
    emit_summary(records, plan.target_rel_err, plan.out_dir + "/summary.json");
  return records;
}

SweepResult sweep_alpha0(const ExperimentPlan& plan,
                         const std::vector<double>& alpha0_values) {
  if (alpha0_values.empty())
    throw std::invalid_argument("alpha0 sweep needs at least one value");
  const ExperimentSetup setup = prepare(plan);
  const MethodPlan base =
      plan.methods.empty() ? MethodPlan{} : plan.methods.front();

  SweepResult result;
  for (const double alpha0 : alpha0_values) {
    MethodPlan mp = base;
    mp.method = Method::dgm_bb_c;
    mp.alpha0 = alpha0;
    SolverConfig config = make_config(plan, mp);
    RunRecord rec =
        run(config, setup.instance, setup.weights.w, setup.instance.x_star);
    rec.metadata["alpha0"] = format_double(alpha0);
    result.axis.push_back(alpha0);
    result.iterations_to_target.push_back(
        iterations_to(rec, plan.target_rel_err));
    result.records.push_back(std::move(rec));
  }

  long long lo = std::numeric_limits<long long>::max();
  long long hi = 0;
  for (const long long iters : result.iterations_to_target) {
    if (iters < 0) continue;
    lo = std::min(lo, iters);
    hi = std::max(hi, iters);
  }
  result.spread = (lo == std::numeric_limits<long long>::max() || lo == 0)
                      ? 0.0
                      : static_cast<double>(hi) / static_cast<double>(lo);
  return result;
}

SweepResult sweep_inner_loops(const ExperimentPlan& plan,
                              const std::vector<int>& r_values) {
  if (r_values.empty())
    throw std::invalid_argument("R sweep needs at least one value");
  const ExperimentSetup setup = prepare(plan);
  const MethodPlan base =
      plan.methods.empty() ? MethodPlan{} : plan.methods.front();

  SweepResult result;
  result.certificate_r_min =
      select_c(setup.instance.lipschitz(), setup.instance.strong_convexity(),
               setup.instance.num_agents(), setup.weights.delta)
          .r_min;
  for (const int r : r_values) {
    MethodPlan mp = base;
    mp.method = Method::dgm_bb_c;
    mp.inner_loops = r;
    SolverConfig config = make_config(plan, mp);
    RunRecord rec =
        run(config, setup.instance, setup.weights.w, setup.instance.x_star);
    rec.metadata["R"] = std::to_string(r);
    result.axis.push_back(r);
    result.iterations_to_target.push_back(
        iterations_to(rec, plan.target_rel_err));
    result.records.push_back(std::move(rec));
  }
  return result;
}

double rate_fit(const RunRecord& record, double window_fraction) {
  std::size_t floor_index = 0;
  double floor_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < record.rows.size(); ++i) {
    const double e = record.rows[i].rel_err;
    if (e > 0.0 && e <= floor_value) {  // ties keep the latest row
      floor_value = e;
      floor_index = i;
    }
  }
  if (!(floor_value <= 1e-8))
    throw std::invalid_argument("rate_fit needs a record converged below 1e-8");

  const std::size_t start = static_cast<std::size_t>(
      std::ceil((1.0 - window_fraction) * static_cast<double>(floor_index)));
  std::vector<double> ks, logs;
  for (std::size_t i = start; i <= floor_index; ++i) {
    if (record.rows[i].rel_err <= 0.0) continue;
    ks.push_back(static_cast<double>(record.rows[i].k));
    logs.push_back(std::log(record.rows[i].rel_err));
  }
  if (ks.size() < 10)
    throw std::invalid_argument("rate_fit window has fewer than 10 points");

  const double m = static_cast<double>(ks.size());
  double sk = 0, sl = 0, skk = 0, skl = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sk += ks[i];
    sl += logs[i];
    skk += ks[i] * ks[i];
    skl += ks[i] * logs[i];
  }
  const double slope = (m * skl - sk * sl) / (m * skk - sk * sk);
  return std::exp(slope);
}

void emit_csv(const RunRecord& record, const std::string& path) {
  std::ostringstream out;
  out << "k,rel_err,grad_evals,comm_rounds,cost,mean_alpha,max_alpha,v1,v2,v3\n";
  for (const auto& row : record.rows) {
    out << row.k << ',' << format_double(row.rel_err) << ',' << row.grad_evals
        << ',' << row.comm_rounds << ',' << format_double(row.cost) << ','
        << format_double(row.mean_alpha) << ',' << format_double(row.max_alpha)
        << ',' << format_double(row.v1) << ',' << format_double(row.v2) << ','
        << format_double(row.v3) << '\n';
  }
  write_atomic(path, out.str());
}

void emit_summary(const std::vector<RunRecord>& records, double target,
                  const std::string& path) {
  nlohmann::json j;
  j["schema"] = "decopt.summary.v1";
  j["target"] = target;
  auto& runs = j["runs"] = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json r;
    r["method"] = rec.method;
    r["status"] = run_status_name(rec.status);
    if (!rec.diagnostic.empty()) r["diagnostic"] = rec.diagnostic;
    const auto& last = rec.final_row();
    r["iterations"] = last.k;
    r["final_rel_err"] = last.rel_err;
    r["grad_evals"] = last.grad_evals;
    r["comm_rounds"] = last.comm_rounds;
    r["cost"] = last.cost;
    const long long to_target = iterations_to(rec, target);
    r["iterations_to_target"] = to_target;
    if (to_target >= 0) {
      const auto& row = rec.rows[static_cast<std::size_t>(to_target)];
      r["comm_rounds_to_target"] = row.comm_rounds;
      r["grad_evals_to_target"] = row.grad_evals;
      r["cost_to_target"] = row.cost;
    }
    if (rec.has_bb_stats) {
      r["alpha_max"] = rec.alpha_max;
      r["mean_alpha_max"] = rec.mean_alpha_max;
      r["bb_fallbacks"] = rec.bb_fallbacks;
      r["bb_bound_violations"] = rec.bb_bound_violations;
      r["mean_step_violations_strict"] = rec.mean_step_violations_strict;
      r["mean_step_violations_weak"] = rec.mean_step_violations_weak;
      r["max_lambda"] = rec.max_lambda;
    }
    if (has_tracker(method_from_name(rec.method)))
      r["max_tracking_residual"] = rec.max_tracking_residual;
    r["invariants_ok"] = invariants_ok(rec);
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [key, value] : rec.metadata) {
      if (key == "certificate") {
        meta[key] = nlohmann::json::parse(value);
      } else {
        meta[key] = value;
      }
    }
    r["metadata"] = std::move(meta);
    runs.push_back(std::move(r));
  }
  write_atomic(path, j.dump(2));
}

bool invariants_ok(const RunRecord& record) {
  if (record.status == RunStatus::diverged) return false;
  if (record.rows.empty()) return false;

  const double first = record.rows.front().rel_err;
  if (first != 1.0 && first != 0.0) return false;

  for (std::size_t i = 1; i < record.rows.size(); ++i) {
    if (record.rows[i].grad_evals < record.rows[i - 1].grad_evals) return false;
    if (record.rows[i].comm_rounds < record.rows[i - 1].comm_rounds) return false;
  }

  const Method method = method_from_name(record.method);
  if (has_tracker(method) && record.max_tracking_residual > 1e-10) return false;

  if (method == Method::dgm_bb_c) {
    if (record.bb_bound_violations > 0) return false;
    if (record.has_bb_stats) {
      const auto l_it = record.metadata.find("L");
      const auto mu_it = record.metadata.find("mu");
      if (l_it != record.metadata.end() && mu_it != record.metadata.end()) {
        const double l_const = std::stod(l_it->second);
        const double mu = std::stod(mu_it->second);
        if (!assert_bb_bounds(record.alpha_max, l_const, mu, 1e-9)) return false;
        if (!assert_bb_bounds(record.mean_alpha_max, l_const, mu, 1e-9))
          return false;
      }
    }
    // Terminal residual triple, asserted for deep-target converged runs.
    const auto target_it = record.metadata.find("target");
    if (record.status == RunStatus::converged &&
        target_it != record.metadata.end() &&
        std::stod(target_it->second) <= 1e-9) {
      const auto& last = record.final_row();
      if (last.v1 > 1e-8 || last.v2 > 1e-8 || last.v3 > 1e-8) return false;
    }
  }
  return true;
}

std::map<std::string, std::string> parse_key_value_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

void apply_plan_kv(const std::map<std::string, std::string>& kv,
                   ExperimentPlan& plan) {
  if (const auto it = kv.find("version");
      it != kv.end() && it->second != "1")
    throw std::runtime_error("unsupported config version " + it->second);

  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("n")) plan.n = std::stoi(*v);
  if (const auto* v = get("m_i")) plan.m_i = std::stoi(*v);
  if (const auto* v = get("p")) plan.p = std::stoi(*v);
  if (const auto* v = get("L")) plan.l_target = std::stod(*v);
  if (const auto* v = get("mu")) plan.mu_target = std::stod(*v);
  if (const auto* v = get("noise")) plan.noise_scale = std::stod(*v);
  if (const auto* v = get("r_c")) plan.r_c = std::stod(*v);
  if (const auto* v = get("seed")) plan.seed = std::stoull(*v);
  if (const auto* v = get("max_iters")) plan.max_iterations = std::stoll(*v);
  if (const auto* v = get("target")) plan.target_rel_err = std::stod(*v);
  if (const auto* v = get("stall_window")) plan.stall_window = std::stoll(*v);
  if (const auto* v = get("cc")) plan.cost_comm = std::stod(*v);
  if (const auto* v = get("cg")) plan.cost_grad = std::stod(*v);
  if (const auto* v = get("out")) plan.out_dir = *v;

  MethodPlan defaults;
  if (const auto* v = get("R")) defaults.inner_loops = std::stoi(*v);
  if (const auto* v = get("bb"))
    defaults.bb_variant =
        *v == "long" ? BbVariant::long_step : BbVariant::short_step;
  if (const auto* v = get("alpha0")) defaults.alpha0 = std::stod(*v);
  if (const auto* v = get("step")) defaults.step = std::stod(*v);
  if (const auto* v = get("tune")) defaults.tune_step = *v == "true";
  if (const auto* v = get("perturb")) defaults.perturb_steps = *v == "true";

  if (const auto* v = get("method")) {
    plan.methods.clear();
    std::stringstream ss(*v);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const auto a = name.find_first_not_of(" \t");
      const auto b = name.find_last_not_of(" \t");
      if (a == std::string::npos) continue;
      MethodPlan mp = defaults;
      mp.method = method_from_name(name.substr(a, b - a + 1));
      plan.methods.push_back(mp);
    }
  } else if (!plan.methods.empty()) {
    for (auto& mp : plan.methods) {
      const Method m = mp.method;
      mp = defaults;
      mp.method = m;
    }
  }
}

}  // namespace decopt
