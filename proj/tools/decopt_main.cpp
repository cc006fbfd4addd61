// decopt command line: run a single method, compare a method matrix, sweep
// alpha0 or R, or print a theory certificate. Exit code 0 only when every run
// completed and every asserted invariant held.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "decopt/certificates.hpp"
#include "decopt/harness.hpp"

namespace {

using namespace decopt;

struct CommonOptions {
  std::string config_file;
  ExperimentPlan plan;
  std::string graph_out, instance_out;
  std::string graph_in, instance_in;
};

void add_plan_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_file,
                  "key-value config file (version = 1)");
  cmd->add_option("-n,--agents", opt.plan.n, "agent count");
  cmd->add_option("--mi", opt.plan.m_i, "measurements per agent");
  cmd->add_option("-p,--dim", opt.plan.p, "decision dimension");
  cmd->add_option("-L,--lipschitz", opt.plan.l_target, "Lipschitz constant");
  cmd->add_option("--mu", opt.plan.mu_target, "strong-convexity constant");
  cmd->add_option("--noise", opt.plan.noise_scale, "measurement noise scale");
  cmd->add_option("--rc", opt.plan.r_c, "Erdos-Renyi connectivity ratio");
  cmd->add_option("--seed", opt.plan.seed, "master seed");
  cmd->add_option("--max-iters", opt.plan.max_iterations, "iteration budget");
  cmd->add_option("--target", opt.plan.target_rel_err,
                  "relative-error target");
  cmd->add_option("--stall-window", opt.plan.stall_window,
                  "stop after this many iterations without progress (0: off)");
  cmd->add_option("--cc", opt.plan.cost_comm, "communication cost weight c_c");
  cmd->add_option("--cg", opt.plan.cost_grad, "gradient cost weight c_g");
  cmd->add_option("-o,--out", opt.plan.out_dir, "output directory");
  cmd->add_option("--save-graph", opt.graph_out, "write graph fixture JSON");
  cmd->add_option("--save-instance", opt.instance_out,
                  "write instance fixture JSON");
  cmd->add_option("--load-graph", opt.graph_in,
                  "use a graph fixture instead of generating one");
  cmd->add_option("--load-instance", opt.instance_in,
                  "use an instance fixture instead of generating one");
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSetup build_setup(const CommonOptions& opt) {
  if (opt.graph_in.empty() && opt.instance_in.empty())
    return prepare(opt.plan);
  ExperimentSetup setup = [&] {
    if (opt.instance_in.empty()) return prepare(opt.plan);
    ExperimentSetup s;
    s.instance = instance_from_json(slurp_file(opt.instance_in));
    ExperimentPlan generated = opt.plan;
    generated.n = s.instance.num_agents();
    const ExperimentSetup rest = prepare(generated);
    s.graph = rest.graph;
    s.weights = rest.weights;
    return s;
  }();
  if (!opt.graph_in.empty()) {
    setup.graph = graph_from_json(slurp_file(opt.graph_in));
    setup.weights = metropolis_weights(setup.graph);
  }
  return setup;
}

struct MethodOptionRefs {
  CLI::Option* inner_loops = nullptr;
  CLI::Option* bb = nullptr;
  CLI::Option* alpha0 = nullptr;
  CLI::Option* step = nullptr;
  CLI::Option* tune = nullptr;
  CLI::Option* perturb = nullptr;
};

MethodOptionRefs add_method_options(CLI::App* cmd, MethodPlan& mp,
                                    std::string& bb_name) {
  MethodOptionRefs refs;
  refs.inner_loops = cmd->add_option("-R,--inner-loops", mp.inner_loops,
                                     "inner consensus iterations per phase");
  refs.bb = cmd->add_option("--bb", bb_name, "BB variant: long | short");
  refs.alpha0 = cmd->add_option("--alpha0", mp.alpha0, "initial step size");
  refs.step = cmd->add_option("--step", mp.step, "constant step size");
  refs.tune =
      cmd->add_flag("--tune", mp.tune_step, "grid-search the constant step");
  refs.perturb = cmd->add_flag("--perturb", mp.perturb_steps,
                               "per-agent steps = step * U(0.6, 1.2)");
  return refs;
}

// Config-file values form the base; explicitly passed flags override them.
void overlay_method_flags(const MethodOptionRefs& refs, const MethodPlan& mp,
                          const std::string& bb_name,
                          std::vector<MethodPlan>& methods) {
  for (MethodPlan& entry : methods) {
    if (refs.inner_loops->count()) entry.inner_loops = mp.inner_loops;
    if (refs.bb->count())
      entry.bb_variant =
          bb_name == "long" ? BbVariant::long_step : BbVariant::short_step;
    if (refs.alpha0->count()) entry.alpha0 = mp.alpha0;
    if (refs.step->count()) entry.step = mp.step;
    if (refs.tune->count()) entry.tune_step = mp.tune_step;
    if (refs.perturb->count()) entry.perturb_steps = mp.perturb_steps;
  }
}

void finalize_plan(CommonOptions& opt) {
  if (!opt.config_file.empty())
    apply_plan_kv(parse_key_value_file(opt.config_file), opt.plan);
}

void save_fixtures(const CommonOptions& opt, const ExperimentSetup& setup) {
  if (!opt.graph_out.empty()) {
    std::ofstream out(opt.graph_out);
    out << graph_to_json(setup.graph) << '\n';
  }
  if (!opt.instance_out.empty()) {
    std::ofstream out(opt.instance_out);
    out << instance_to_json(setup.instance) << '\n';
  }
}

int report(const std::vector<RunRecord>& records, double target) {
  bool ok = true;
  for (const auto& rec : records) {
    const auto& last = rec.final_row();
    const long long to_target = iterations_to(rec, target);
    std::cout << rec.method << ": " << run_status_name(rec.status)
              << ", iterations " << last.k << ", rel_err " << last.rel_err
              << ", comms " << last.comm_rounds << ", cost " << last.cost;
    if (to_target >= 0) std::cout << ", reached target at k=" << to_target;
    std::cout << '\n';
    if (!rec.diagnostic.empty()) std::cout << "  " << rec.diagnostic << '\n';
    if (!invariants_ok(rec)) {
      std::cout << "  invariant violation detected\n";
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  return values;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stoi(item));
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decopt: distributed gradient optimization simulator"};
  app.require_subcommand(1);

  CommonOptions run_opt;
  MethodPlan run_method;
  std::string run_method_name = "dgm-bb-c";
  std::string run_bb = "short";
  auto* run_cmd = app.add_subcommand("run", "run one method");
  run_cmd->add_option("-m,--method", run_method_name,
                      "dgm-bb-c | dgm-c | atc-diging | diging | extra | dgd | "
                      "near-dgd+");
  const MethodOptionRefs run_refs =
      add_method_options(run_cmd, run_method, run_bb);
  add_plan_options(run_cmd, run_opt);

  CommonOptions cmp_opt;
  MethodPlan cmp_method;
  std::string cmp_methods =
      "dgm-bb-c,dgm-c,atc-diging,diging,extra,dgd,near-dgd+";
  std::string cmp_bb = "short";
  auto* cmp_cmd = app.add_subcommand("compare", "run a method matrix");
  cmp_cmd->add_option("-m,--methods", cmp_methods, "comma-separated methods");
  const MethodOptionRefs cmp_refs =
      add_method_options(cmp_cmd, cmp_method, cmp_bb);
  add_plan_options(cmp_cmd, cmp_opt);

  CommonOptions sw_opt;
  MethodPlan sw_method;
  std::string sw_axis = "alpha0";
  std::string sw_values = "0.1,0.5,1.0,1.4,2.0";
  std::string sw_bb = "short";
  auto* sw_cmd = app.add_subcommand("sweep", "sweep alpha0 or R for DGM-BB-C");
  sw_cmd->add_option("--axis", sw_axis, "alpha0 | R");
  sw_cmd->add_option("--values", sw_values, "comma-separated axis values");
  const MethodOptionRefs sw_refs =
      add_method_options(sw_cmd, sw_method, sw_bb);
  add_plan_options(sw_cmd, sw_opt);

  double th_l = 1.0, th_mu = 0.5, th_delta = -1.0, th_alpha_max = 0.0;
  double th_rc = 0.1;
  int th_n = 200, th_r = 0;
  std::uint64_t th_seed = 1;
  bool th_from_graph = false;
  auto* th_cmd =
      app.add_subcommand("theory", "print an admissibility certificate");
  th_cmd->add_option("-L,--lipschitz", th_l, "Lipschitz constant");
  th_cmd->add_option("--mu", th_mu, "strong-convexity constant");
  th_cmd->add_option("-n,--agents", th_n, "agent count");
  th_cmd->add_option("--delta", th_delta,
                     "spectral gap (omit to realize a graph)");
  th_cmd->add_flag("--from-graph", th_from_graph,
                   "realize delta from an Erdos-Renyi Metropolis graph");
  th_cmd->add_option("--rc", th_rc, "connectivity ratio for --from-graph");
  th_cmd->add_option("--seed", th_seed, "graph seed for --from-graph");
  th_cmd->add_option("-R,--inner-loops", th_r,
                     "inner consensus iterations (0: use R_min)");
  th_cmd->add_option("--alpha-max", th_alpha_max,
                     "largest step size (0: use 1/mu)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      // Precedence: a `method` key in the config replaces the -m selection;
      // file values form the parameter base, explicit flags override.
      run_method.method = method_from_name(run_method_name);
      run_method.bb_variant =
          run_bb == "long" ? BbVariant::long_step : BbVariant::short_step;
      run_opt.plan.methods = {run_method};
      finalize_plan(run_opt);
      overlay_method_flags(run_refs, run_method, run_bb,
                           run_opt.plan.methods);
      const ExperimentSetup setup = build_setup(run_opt);
      save_fixtures(run_opt, setup);
      const auto records = run_experiment(run_opt.plan, setup);
      return report(records, run_opt.plan.target_rel_err);
    }
    if (cmp_cmd->parsed()) {
      std::stringstream ss(cmp_methods);
      std::string name;
      while (std::getline(ss, name, ',')) {
        MethodPlan mp = cmp_method;
        mp.method = method_from_name(name);
        mp.bb_variant =
            cmp_bb == "long" ? BbVariant::long_step : BbVariant::short_step;
        cmp_opt.plan.methods.push_back(mp);
      }
      finalize_plan(cmp_opt);
      overlay_method_flags(cmp_refs, cmp_method, cmp_bb,
                           cmp_opt.plan.methods);
      const ExperimentSetup setup = build_setup(cmp_opt);
      save_fixtures(cmp_opt, setup);
      const auto records = run_experiment(cmp_opt.plan, setup);
      return report(records, cmp_opt.plan.target_rel_err);
    }
    if (sw_cmd->parsed()) {
      sw_method.method = Method::dgm_bb_c;
      sw_method.bb_variant =
          sw_bb == "long" ? BbVariant::long_step : BbVariant::short_step;
      sw_opt.plan.methods = {sw_method};
      finalize_plan(sw_opt);
      overlay_method_flags(sw_refs, sw_method, sw_bb, sw_opt.plan.methods);
      SweepResult result;
      if (sw_axis == "alpha0") {
        result = sweep_alpha0(sw_opt.plan, parse_doubles(sw_values));
      } else if (sw_axis == "R") {
        result = sweep_inner_loops(sw_opt.plan, parse_ints(sw_values));
      } else {
        std::cerr << "unknown sweep axis: " << sw_axis << '\n';
        return 2;
      }
      if (!sw_opt.plan.out_dir.empty()) {
        for (std::size_t i = 0; i < result.records.size(); ++i) {
          std::ostringstream name;
          name << sw_opt.plan.out_dir << "/sweep_" << sw_axis << "_"
               << result.axis[i] << ".csv";
          emit_csv(result.records[i], name.str());
        }
        emit_summary(result.records, sw_opt.plan.target_rel_err,
                     sw_opt.plan.out_dir + "/summary.json");
      }
      for (std::size_t i = 0; i < result.records.size(); ++i) {
        std::cout << sw_axis << "=" << result.axis[i] << ": iterations-to-target "
                  << result.iterations_to_target[i] << '\n';
      }
      if (sw_axis == "alpha0")
        std::cout << "iteration spread (max/min): " << result.spread << '\n';
      else
        std::cout << "certificate R_min for this graph: "
                  << result.certificate_r_min << '\n';
      int exit_code = 0;
      for (const auto& rec : result.records)
        if (!invariants_ok(rec)) exit_code = 1;
      return exit_code;
    }
    if (th_cmd->parsed()) {
      double delta = th_delta;
      if (th_from_graph || delta < 0.0) {
        const Graph g = generate_erdos_renyi(th_n, th_rc, th_seed);
        delta = metropolis_weights(g).delta;
      }
      const ProblemConstants pc{th_l, th_mu, th_n};
      const SelectedC sel = select_c(th_l, th_mu, th_n, delta);
      const int r = th_r > 0 ? th_r : sel.r_min;
      const double alpha_max = th_alpha_max > 0.0 ? th_alpha_max : 1.0 / th_mu;
      std::cout << certificate_to_json(certify(pc, delta, r, alpha_max))
                << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
