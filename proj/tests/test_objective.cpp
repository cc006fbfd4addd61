#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "decopt/objective.hpp"
#include "decopt/rng.hpp"

using namespace decopt;

namespace {

// Hand-checkable 2x2 fixture: normal equations [[2,1],[1,3]] x = (4,6),
// eliminated by hand to x = (6/5, 8/5).
LeastSquaresInstance hand_fixture() {
  LeastSquaresInstance inst;
  inst.m.push_back(Eigen::Matrix2d::Identity());
  Eigen::Matrix2d m2;
  m2 << 1, 1, 0, 1;
  inst.m.push_back(m2);
  inst.y.push_back(Eigen::Vector2d(1, 2));
  inst.y.push_back(Eigen::Vector2d(3, 1));
  inst.l_const = 3.0;
  inst.mu_const = 0.3;
  inst.precompute();
  inst.x_star = optimum(inst);
  return inst;
}

}  // namespace

TEST_CASE("average Hessian endpoints hit the targets exactly (eigen oracle)") {
  const auto inst = generate_sensing_instance(4, 3, 2, 2.0, 1.0, 0.01, 3);
  // Independent assembly of the average Hessian, eigen-decomposed here.
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (const auto& mi : inst.m) h += mi.transpose() * mi;
  h /= 4.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(2.0).epsilon(1e-9));

  const auto [mu_r, l_r] = hessian_spectrum_bounds(inst);
  CHECK(mu_r == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(l_r == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("per-agent Gram spectra stay inside [mu, L] and attain the endpoints") {
  const auto inst = generate_sensing_instance(8, 6, 5, 1.0, 0.5, 0.01, 17);
  double min_seen = 1e9, max_seen = -1e9;
  for (const auto& mi : inst.m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mi.transpose() * mi);
    CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-9);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-9);
    min_seen = std::min(min_seen, es.eigenvalues().minCoeff());
    max_seen = std::max(max_seen, es.eigenvalues().maxCoeff());
  }
  CHECK(min_seen == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(max_seen == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("the benchmark-scale instance realizes (0.5, 1.0)") {
  const auto inst = generate_sensing_instance(200, 20, 10, 1.0, 0.5, 0.01, 42);
  const auto [mu_r, l_r] = hessian_spectrum_bounds(inst);
  CHECK(mu_r == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(l_r == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("noiseless instance recovers the planted signal") {
  const auto inst = generate_sensing_instance(6, 4, 3, 1.0, 0.5, 0.0, 9);
  // x* is the planted signal iff the average gradient vanishes there and the
  // system is consistent; regenerate the signal from the same stream.
  Rng signal_rng(derive_seed(9, 1));
  Eigen::Vector3d signal;
  for (int j = 0; j < 3; ++j) signal(j) = signal_rng.normal();
  CHECK((inst.x_star - signal).norm() < 1e-9);
}

TEST_CASE("generator rejects infeasible shapes") {
  CHECK_THROWS_AS(generate_sensing_instance(4, 2, 3, 1.0, 0.5, 0.01, 1),
                  std::invalid_argument);  // m_i < p
  CHECK_THROWS_AS(generate_sensing_instance(4, 3, 2, 1.0, 2.0, 0.01, 1),
                  std::invalid_argument);  // mu > L
  CHECK_THROWS_AS(generate_sensing_instance(4, 3, 1, 1.0, 0.5, 0.01, 1),
                  std::invalid_argument);  // p == 1 with mu < L
}

TEST_CASE("local gradient basics") {
  LeastSquaresInstance inst;
  inst.m.push_back(Eigen::Matrix3d::Identity());
  inst.y.push_back(Eigen::Vector3d::Zero());
  inst.l_const = inst.mu_const = 1.0;

  SUBCASE("quadratic through the origin returns x") {
    const Eigen::Vector3d x(0.3, -1.2, 5.0);
    CHECK((inst.local_gradient(0, x) - x).norm() == 0.0);
  }

  SUBCASE("zero residual gives a zero gradient") {
    inst.y[0] = Eigen::Vector3d(1, 2, 3);
    CHECK(inst.local_gradient(0, Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
  }
}

TEST_CASE("local gradient matches central finite differences") {
  Rng rng(5);
  Eigen::MatrixXd m(3, 2);
  Eigen::Vector3d y;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 2; ++c) m(r, c) = rng.normal();
    y(r) = rng.normal();
  }
  LeastSquaresInstance inst;
  inst.m.push_back(m);
  inst.y.push_back(y);
  inst.l_const = 10.0;
  inst.mu_const = 0.01;

  const Eigen::Vector2d x(0.7, -0.4);
  const Eigen::Vector2d grad = inst.local_gradient(0, x);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d lo = x, hi = x;
    lo(j) -= h;
    hi(j) += h;
    const double fd =
        (inst.local_value(0, hi) - inst.local_value(0, lo)) / (2.0 * h);
    CHECK(grad(j) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("optimum: hand-eliminated 2x2 fixture") {
  const auto inst = hand_fixture();
  CHECK(inst.x_star(0) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(inst.x_star(1) == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("optimum: single agent identity system returns y") {
  LeastSquaresInstance inst;
  inst.m.push_back(Eigen::Matrix2d::Identity());
  inst.y.push_back(Eigen::Vector2d(4, -2));
  CHECK((optimum(inst) - Eigen::Vector2d(4, -2)).norm() < 1e-14);
}

TEST_CASE("optimum residual: averaged gradient vanishes at x*") {
  const auto inst = generate_sensing_instance(10, 6, 4, 1.5, 0.4, 0.05, 21);
  Eigen::Vector4d resid = Eigen::Vector4d::Zero();
  for (int i = 0; i < 10; ++i) resid += inst.local_gradient(i, inst.x_star);
  CHECK(resid.norm() / 10.0 <= 1e-10);
}

TEST_CASE("strong convexity and Lipschitz hold with the asserted constants") {
  const auto inst = generate_sensing_instance(5, 6, 4, 1.0, 0.5, 0.01, 33);
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector4d x, y;
    for (int j = 0; j < 4; ++j) {
      x(j) = 3.0 * rng.normal();
      y(j) = 3.0 * rng.normal();
    }
    for (int i = 0; i < inst.num_agents(); ++i) {
      const double lhs = inst.local_value(i, x);
      const double rhs = inst.local_value(i, y) +
                         inst.local_gradient(i, y).dot(x - y) +
                         0.25 * (x - y).squaredNorm();  // mu/2 = 0.25
      CHECK(lhs >= rhs - 1e-9);
      const double grad_gap =
          (inst.local_gradient(i, x) - inst.local_gradient(i, y)).norm();
      CHECK(grad_gap <= 1.0 * (x - y).norm() + 1e-9);
    }
  }
}

TEST_CASE("noiseless identity instance has unit spectrum bounds") {
  LeastSquaresInstance inst;
  inst.m.push_back(Eigen::Matrix2d::Identity());
  inst.y.push_back(Eigen::Vector2d(1, 1));
  const auto [mu_r, l_r] = hessian_spectrum_bounds(inst);
  CHECK(mu_r == doctest::Approx(1.0));
  CHECK(l_r == doctest::Approx(1.0));
}

TEST_CASE("instance JSON round trip preserves matrices and gradients") {
  const auto inst = generate_sensing_instance(4, 3, 2, 2.0, 1.0, 0.1, 8);
  const auto inst2 = instance_from_json(instance_to_json(inst));
  REQUIRE(inst2.num_agents() == inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    CHECK((inst.m[i] - inst2.m[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((inst.y[i] - inst2.y[i]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((inst.x_star - inst2.x_star).norm() == 0.0);
  const Eigen::Vector2d x(0.2, -0.9);
  CHECK((inst.local_gradient(1, x) - inst2.local_gradient(1, x)).norm() == 0.0);
}
