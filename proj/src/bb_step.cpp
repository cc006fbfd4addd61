#include "decopt/bb_step.hpp"

namespace decopt {

BbStep bb_long(const CurvaturePair& pair) {
  const double ss = pair.s.squaredNorm();
  if (ss == 0.0) return {BbStatus::zero_step, 0.0};
  const double sz = pair.s.dot(pair.z);
  if (sz <= 0.0) return {BbStatus::nonpositive_curvature, 0.0};
  return {BbStatus::ok, ss / sz};
}

BbStep bb_short(const CurvaturePair& pair) {
  if (pair.s.squaredNorm() == 0.0) return {BbStatus::zero_step, 0.0};
  const double zz = pair.z.squaredNorm();
  if (zz == 0.0) return {BbStatus::nonpositive_curvature, 0.0};
  const double sz = pair.s.dot(pair.z);
  if (sz <= 0.0) return {BbStatus::nonpositive_curvature, 0.0};
  return {BbStatus::ok, sz / zz};
}

bool assert_bb_bounds(double alpha, double l_const, double mu, double tol) {
  return alpha >= 1.0 / l_const - tol && alpha <= 1.0 / mu + tol;
}

}  // namespace decopt
