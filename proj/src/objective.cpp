#include "decopt/objective.hpp"

#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "decopt/rng.hpp"

namespace decopt {

namespace {

Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
  return a;
}

// Q factor of a Gaussian draw: orthonormal columns, deterministic given rng.
Eigen::MatrixXd random_orthonormal(Rng& rng, int rows, int cols) {
  const Eigen::MatrixXd a = gaussian_matrix(rng, rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return q;
}

Eigen::MatrixXd average_hessian(const LeastSquaresInstance& inst) {
  const int p = inst.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  for (const auto& mi : inst.m) h += mi.transpose() * mi;
  return h / static_cast<double>(inst.num_agents());
}

}  // namespace

Eigen::MatrixXd MultiAgentObjective::stacked_gradient(
    const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd g(num_agents(), dim());
  for (int i = 0; i < num_agents(); ++i)
    g.row(i) = local_gradient(i, x.row(i).transpose()).transpose();
  return g;
}

void LeastSquaresInstance::precompute() {
  grams_.clear();
  rhs_.clear();
  grams_.reserve(m.size());
  rhs_.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    grams_.push_back(m[i].transpose() * m[i]);
    rhs_.push_back(m[i].transpose() * y[i]);
  }
}

LeastSquaresInstance generate_sensing_instance(int n, int m_i, int p,
                                               double l_target,
                                               double mu_target,
                                               double noise_scale,
                                               std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("n and p must be positive");
  if (!(mu_target > 0.0) || mu_target > l_target)
    throw std::invalid_argument("need 0 < mu_target <= L_target");
  if (static_cast<long long>(m_i) * n < p)
    throw std::invalid_argument("m_i * n < p: stacked system is rank deficient");
  if (m_i < p)
    throw std::invalid_argument(
        "m_i < p: per-agent Gram matrices would be singular, violating "
        "per-agent strong convexity");
  if (p == 1 && mu_target != l_target)
    throw std::invalid_argument(
        "p == 1 admits a single eigenvalue per agent; mu_target must equal "
        "L_target");

  // Shared frame: the first column carries mu for every agent, the last
  // carries L. Interior directions are re-rotated per agent.
  Rng frame_rng(derive_seed(seed, 0));
  const Eigen::MatrixXd q = random_orthonormal(frame_rng, p, p);

  LeastSquaresInstance inst;
  inst.m.reserve(n);
  inst.y.reserve(n);
  inst.l_const = l_target;
  inst.mu_const = mu_target;

  for (int i = 0; i < n; ++i) {
    Rng agent_rng(derive_seed(seed, 10 + static_cast<std::uint64_t>(i)));
    const Eigen::MatrixXd left = random_orthonormal(agent_rng, m_i, p);

    Eigen::MatrixXd basis(p, p);
    Eigen::VectorXd eigvals(p);
    if (mu_target == l_target) {
      basis = q;
      eigvals.setConstant(l_target);
    } else {
      basis.col(0) = q.col(0);
      basis.col(p - 1) = q.col(p - 1);
      eigvals(0) = mu_target;
      eigvals(p - 1) = l_target;
      if (p > 2) {
        const Eigen::MatrixXd rot = random_orthonormal(agent_rng, p - 2, p - 2);
        basis.middleCols(1, p - 2) = q.middleCols(1, p - 2) * rot;
        for (int j = 1; j < p - 1; ++j)
          eigvals(j) = agent_rng.uniform(mu_target, l_target);
      }
    }
    inst.m.push_back(left * eigvals.cwiseSqrt().asDiagonal() *
                     basis.transpose());
  }

  Rng signal_rng(derive_seed(seed, 1));
  Eigen::VectorXd signal(p);
  for (int j = 0; j < p; ++j) signal(j) = signal_rng.normal();

  Rng noise_rng(derive_seed(seed, 2));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e(m_i);
    for (int r = 0; r < m_i; ++r) e(r) = noise_rng.normal();
    inst.y.push_back(inst.m[i] * signal + noise_scale * e);
  }

  inst.x_star = optimum(inst);
  inst.precompute();
  return inst;
}

Eigen::VectorXd optimum(const LeastSquaresInstance& inst) {
  const int p = inst.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < inst.num_agents(); ++i) {
    h += inst.m[i].transpose() * inst.m[i];
    b += inst.m[i].transpose() * inst.y[i];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("normal equations are singular");
  return llt.solve(b);
}

std::pair<double, double> hessian_spectrum_bounds(
    const LeastSquaresInstance& inst) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      average_hessian(inst), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

std::string instance_to_json(const LeastSquaresInstance& inst) {
  nlohmann::json j;
  j["schema"] = "decopt.instance.v1";
  j["n"] = inst.num_agents();
  j["p"] = inst.dim();
  j["L"] = inst.l_const;
  j["mu"] = inst.mu_const;
  auto& ms = j["M"] = nlohmann::json::array();
  auto& ys = j["y"] = nlohmann::json::array();
  for (int i = 0; i < inst.num_agents(); ++i) {
    nlohmann::json mi = nlohmann::json::array();
    for (Eigen::Index r = 0; r < inst.m[i].rows(); ++r)
      for (Eigen::Index c = 0; c < inst.m[i].cols(); ++c)
        mi.push_back(inst.m[i](r, c));
    ms.push_back({{"rows", inst.m[i].rows()}, {"data", std::move(mi)}});
    ys.push_back(std::vector<double>(inst.y[i].begin(), inst.y[i].end()));
  }
  j["x_star"] = std::vector<double>(inst.x_star.begin(), inst.x_star.end());
  return j.dump(2);
}

LeastSquaresInstance instance_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("schema") != "decopt.instance.v1")
    throw std::runtime_error("unexpected instance schema");
  LeastSquaresInstance inst;
  const int p = j.at("p").get<int>();
  inst.l_const = j.at("L").get<double>();
  inst.mu_const = j.at("mu").get<double>();
  for (const auto& mj : j.at("M")) {
    const auto rows = mj.at("rows").get<Eigen::Index>();
    const auto& data = mj.at("data");
    Eigen::MatrixXd mi(rows, p);
    Eigen::Index pos = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (int c = 0; c < p; ++c) mi(r, c) = data[pos++];
    inst.m.push_back(std::move(mi));
  }
  for (const auto& yj : j.at("y")) {
    Eigen::VectorXd yi(yj.size());
    for (Eigen::Index r = 0; r < yi.size(); ++r) yi(r) = yj[r];
    inst.y.push_back(std::move(yi));
  }
  const auto& xs = j.at("x_star");
  inst.x_star.resize(xs.size());
  for (Eigen::Index r = 0; r < inst.x_star.size(); ++r) inst.x_star(r) = xs[r];
  inst.precompute();
  return inst;
}

}  // namespace decopt
