#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "decopt/bb_step.hpp"
#include "decopt/rng.hpp"

using namespace decopt;

namespace {

CurvaturePair make_pair(const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
  return {s, z};
}

// Random symmetric matrix with spectrum drawn inside [mu, L].
Eigen::MatrixXd random_spd(Rng& rng, int p, double mu, double l_const) {
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  Eigen::VectorXd eig(p);
  for (int i = 0; i < p; ++i) eig(i) = rng.uniform(mu, l_const);
  return q * eig.asDiagonal() * q.transpose();
}

}  // namespace

TEST_CASE("unit curvature gives alpha = 1 for both variants") {
  const Eigen::Vector2d s(0.4, -1.1);
  CHECK(bb_long(make_pair(s, s)).alpha == doctest::Approx(1.0));
  CHECK(bb_short(make_pair(s, s)).alpha == doctest::Approx(1.0));
}

TEST_CASE("scalar ratio example") {
  const auto pair = make_pair(Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0));
  CHECK(bb_long(pair).alpha == doctest::Approx(0.5));
}

TEST_CASE("diag(0.5, 1) fixture: 4/3 and 1.2, inside [1/L, 1/mu]") {
  // s = (1,1), z = H s = (0.5, 1); L = 1, mu = 0.5.
  const auto pair = make_pair(Eigen::Vector2d(1, 1), Eigen::Vector2d(0.5, 1));
  const BbStep lng = bb_long(pair);
  const BbStep shrt = bb_short(pair);
  CHECK(lng.alpha == doctest::Approx(4.0 / 3).epsilon(1e-15));
  CHECK(shrt.alpha == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(assert_bb_bounds(lng.alpha, 1.0, 0.5, 0.0));
  CHECK(assert_bb_bounds(shrt.alpha, 1.0, 0.5, 0.0));
}

TEST_CASE("degenerate pairs raise the documented fallback signals") {
  const Eigen::Vector2d zero = Eigen::Vector2d::Zero();
  const Eigen::Vector2d s(1, 2);
  CHECK(bb_long(make_pair(zero, s)).status == BbStatus::zero_step);
  CHECK(bb_short(make_pair(zero, s)).status == BbStatus::zero_step);
  CHECK(bb_long(make_pair(s, -s)).status == BbStatus::nonpositive_curvature);
  CHECK(bb_short(make_pair(s, -s)).status == BbStatus::nonpositive_curvature);
  CHECK(bb_short(make_pair(s, zero)).status == BbStatus::nonpositive_curvature);
}

TEST_CASE("assert_bb_bounds examples") {
  CHECK(assert_bb_bounds(1.0, 1.0, 0.5, 0.0));
  CHECK_FALSE(assert_bb_bounds(2.5, 1.0, 0.5, 1e-9));
  CHECK(assert_bb_bounds(2.0 + 5e-10, 1.0, 0.5, 1e-9));
}

TEST_CASE("property: quadratics with spectra in [mu, L] keep both variants in range") {
  Rng rng(271);
  const double mu = 0.5, l_const = 2.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform01() * 5);
    const Eigen::MatrixXd h = random_spd(rng, p, mu, l_const);
    Eigen::VectorXd s(p);
    for (int j = 0; j < p; ++j) s(j) = rng.normal();
    if (s.norm() == 0.0) continue;
    const Eigen::VectorXd z = h * s;

    const double lng = bb_long({s, z}).alpha;
    const double shrt = bb_short({s, z}).alpha;
    CHECK(lng >= 1.0 / l_const - 1e-12);
    CHECK(lng <= 1.0 / mu + 1e-12);
    CHECK(shrt >= 1.0 / l_const - 1e-12);
    CHECK(shrt <= 1.0 / mu + 1e-12);
    // Cauchy-Schwarz: the short form never exceeds the long one.
    CHECK(shrt <= lng * (1.0 + 1e-15));
  }
}

TEST_CASE("property: joint scaling of the pair leaves both step sizes unchanged") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector3d s, z;
    for (int j = 0; j < 3; ++j) {
      s(j) = rng.normal();
      z(j) = rng.normal();
    }
    if (s.dot(z) <= 0.0) continue;
    const double t = std::exp(4.0 * (rng.uniform01() - 0.5));
    CHECK(bb_long({s, z}).alpha ==
          doctest::Approx(bb_long({t * s, t * z}).alpha).epsilon(1e-13));
    CHECK(bb_short({s, z}).alpha ==
          doctest::Approx(bb_short({t * s, t * z}).alpha).epsilon(1e-13));
  }
}
