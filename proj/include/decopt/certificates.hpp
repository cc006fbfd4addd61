// Convergence-certificate machinery: the 3x3 comparison matrix G^alpha, its
// spectral radius, the contraction bound Delta, the lower bound on the number
// of inner consensus iterations, the step-size ceiling alpha_hat, and the
// search for the parameter vector c. A configuration (problem constants,
// spectral gap, R, largest step size) is admissible when rho(G^alpha) < 1.

#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

namespace decopt {

struct ProblemConstants {
  double l_const = 0.0;  // Lipschitz constant of every local gradient
  double mu = 0.0;       // strong-convexity constant
  int n = 0;             // agent count
};

// Entries of G^alpha for spectral gap delta, R inner consensus iterations and
// largest step size alpha_max. The bottom-right entry is 1 - mu/L.
Eigen::Matrix3d build_g_alpha(double delta, int inner_loops, double l_const,
                              double mu, int n, double alpha_max);

// Largest-modulus eigenvalue of a nonnegative 3x3 matrix. Solves the
// characteristic cubic with a safeguarded real-root method and cross-checks
// the result by power iteration; throws std::runtime_error if the two routes
// disagree or the iteration fails to settle.
double spectral_radius_3x3(const Eigen::Matrix3d& g);

// Delta = min{ mu c1 / (C + mu c1), mu c2 / (L C + 2 L mu c1 + mu c2) } with
// C = L c1 + c2 + L sqrt(n) c3. Requires c > 0 entrywise and
// c3 > L (L c1 + c2) / (mu^2 sqrt(n)); throws std::invalid_argument otherwise.
double delta_bound(const Eigen::Vector3d& c, double l_const, double mu, int n);

// Smallest R with delta^R < Delta strictly: ceil(ln Delta / ln delta), plus
// one when the ratio is a positive integer (integer detection at 1e-12,
// resolved conservatively upward). delta == 0 returns 1.
int min_inner_loops(double delta_bnd, double delta);

// Three-term ceiling on the largest admissible step size. Requires the
// positivity condition delta^R < c2 / (2 L c1 + c2); throws std::domain_error
// when it fails (the second term would be negative).
double alpha_hat(const Eigen::Vector3d& c, double delta, int inner_loops,
                 double l_const, double mu, int n);

struct SelectedC {
  Eigen::Vector3d c;        // normalized to c1 = 1 (Delta is scale-invariant)
  double delta_bnd = 0.0;   // Delta at the returned c
  int r_min = 0;
};

// Picks c to minimize the lower bound on R, i.e. to maximize Delta, by a
// deterministic multi-start coordinate search over (c2, c3) with c3 kept a
// relative 1e-6 above its feasibility floor.
SelectedC select_c(double l_const, double mu, int n, double delta);

struct Certificate {
  // Inputs echoed for the report.
  double l_const = 0.0;
  double mu = 0.0;
  int n = 0;
  double delta = 0.0;
  int inner_loops = 0;
  double alpha_max = 0.0;

  Eigen::Vector3d c{0, 0, 0};
  double big_c = 0.0;  // C = L c1 + c2 + L sqrt(n) c3
  double delta_bnd = 0.0;
  int r_min = 0;
  std::optional<double> alpha_hat;  // empty when the positivity condition fails
  Eigen::Matrix3d g_alpha;
  double rho = 0.0;
  bool admissible = false;       // rho < 1
  bool witness_ok = false;       // G^alpha c < c entrywise for the selected c
  bool alpha_max_within_hat = false;

  // The two mean-step-size conditions the theory quotes; both are reported,
  // neither is enforced at run time.
  double mean_step_bound_strict = 0.0;  // 2/L - mu/L^2
  double mean_step_bound_weak = 0.0;    // 2/L
};

Certificate certify(const ProblemConstants& pc, double delta, int inner_loops,
                    double alpha_max);

std::string certificate_to_json(const Certificate& cert);

// max{ |1 - mu * mean_alpha|, |1 - L * mean_alpha| }, the contraction factor
// of the averaged iterate for the running mean step size.
double mean_step_contraction(double mean_alpha, double l_const, double mu);

}  // namespace decopt
