// Barzilai-Borwein step sizes from local curvature pairs.
//
// For a mu-strongly convex f_i with L-Lipschitz gradient, both step sizes land
// in [1/L, 1/mu]; callers assert that range rather than clamping, since only
// floating-point cancellation can break it.

#pragma once

#include <Eigen/Dense>

namespace decopt {

// s = x_k - x_{k-1}, z = grad f_i(x_k) - grad f_i(x_{k-1}).
struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd z;
};

enum class BbStatus {
  ok,
  zero_step,              // the iterate did not move; reuse the previous step
  nonpositive_curvature,  // s^T z <= 0 from cancellation; fall back to 1/L
};

struct BbStep {
  BbStatus status = BbStatus::ok;
  double alpha = 0.0;  // valid only when status == ok
};

enum class BbVariant { long_step, short_step };

// Long form (s^T s) / (s^T z).
BbStep bb_long(const CurvaturePair& pair);

// Short form (s^T z) / (z^T z); never exceeds bb_long by Cauchy-Schwarz.
BbStep bb_short(const CurvaturePair& pair);

inline BbStep bb_step(const CurvaturePair& pair, BbVariant variant) {
  return variant == BbVariant::long_step ? bb_long(pair) : bb_short(pair);
}

// Checks 1/L - tol <= alpha <= 1/mu + tol. Diagnostic only.
bool assert_bb_bounds(double alpha, double l_const, double mu, double tol);

}  // namespace decopt
