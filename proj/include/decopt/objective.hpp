// Multi-agent objective abstraction and the distributed least-squares sensing
// problem used throughout the experiments.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace decopt {

// A sum objective f(x) = (1/n) * sum_i f_i(x) where every f_i is smooth and
// strongly convex. Implementations must supply the uniform per-agent
// constants: ||grad f_i(x) - grad f_i(y)|| <= L ||x - y|| and f_i is
// mu-strongly convex, with 0 < mu <= L.
class MultiAgentObjective {
 public:
  virtual ~MultiAgentObjective() = default;

  virtual int num_agents() const = 0;
  virtual int dim() const = 0;
  virtual double local_value(int agent, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd local_gradient(int agent,
                                         const Eigen::VectorXd& x) const = 0;
  virtual double lipschitz() const = 0;
  virtual double strong_convexity() const = 0;

  // Row i of the result is grad f_i evaluated at row i of the stacked state.
  Eigen::MatrixXd stacked_gradient(const Eigen::MatrixXd& x) const;
};

// Per-agent measurements y_i = M_i x + e_i with loss f_i(x) = 1/2 ||M_i x - y_i||^2,
// so grad f_i(x) = M_i^T (M_i x - y_i) and the local Hessian is M_i^T M_i.
class LeastSquaresInstance final : public MultiAgentObjective {
 public:
  std::vector<Eigen::MatrixXd> m;  // measurement matrices, m_i x p
  std::vector<Eigen::VectorXd> y;  // measurements, length m_i
  Eigen::VectorXd x_star;          // unique optimizer of the average loss
  double l_const = 0.0;            // uniform per-agent Lipschitz constant
  double mu_const = 0.0;           // uniform per-agent strong convexity

  int num_agents() const override { return static_cast<int>(m.size()); }
  int dim() const override { return m.empty() ? 0 : static_cast<int>(m[0].cols()); }
  double local_value(int agent, const Eigen::VectorXd& x) const override {
    return 0.5 * (m[agent] * x - y[agent]).squaredNorm();
  }
  Eigen::VectorXd local_gradient(int agent,
                                 const Eigen::VectorXd& x) const override {
    if (!grams_.empty()) return grams_[agent] * x - rhs_[agent];
    return m[agent].transpose() * (m[agent] * x - y[agent]);
  }
  double lipschitz() const override { return l_const; }
  double strong_convexity() const override { return mu_const; }

  // Caches M_i^T M_i and M_i^T y_i so gradients cost one p x p product.
  // Generators call this; call it again after editing m or y by hand.
  void precompute();

 private:
  std::vector<Eigen::MatrixXd> grams_;
  std::vector<Eigen::VectorXd> rhs_;
};

// Generates a sensing instance whose average Hessian (1/n) sum_i M_i^T M_i has
// extreme eigenvalues exactly mu_target and L_target, while every per-agent
// Gram matrix M_i^T M_i also has its spectrum inside [mu_target, L_target].
// Both properties together force all agents to share the extreme
// eigendirections, so the construction plants a common orthogonal frame and
// randomizes only the interior of each agent's spectrum.
// Deterministic given the seed. Requires m_i >= p (per-agent strong
// convexity) and mu_target == L_target when p == 1.
LeastSquaresInstance generate_sensing_instance(int n, int m_i, int p,
                                               double l_target,
                                               double mu_target,
                                               double noise_scale,
                                               std::uint64_t seed);

// Solves the normal equations (sum_i M_i^T M_i) x = sum_i M_i^T y_i with a
// dense SPD factorization. Throws std::runtime_error on a singular system.
Eigen::VectorXd optimum(const LeastSquaresInstance& inst);

// Extreme eigenvalues (mu_realized, l_realized) of the average Hessian.
std::pair<double, double> hessian_spectrum_bounds(const LeastSquaresInstance& inst);

// JSON fixture schema "decopt.instance.v1" (dense matrices, row-major).
std::string instance_to_json(const LeastSquaresInstance& inst);
LeastSquaresInstance instance_from_json(const std::string& text);

}  // namespace decopt
