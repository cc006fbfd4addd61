#include "decopt/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace decopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_constants(double l_const, double mu, int n) {
  if (!(mu > 0.0) || mu > l_const)
    throw std::invalid_argument("need 0 < mu <= L");
  if (n < 1) throw std::invalid_argument("n must be positive");
}

// Real roots of x^3 + a x^2 + b x + c = 0 (Numerical Recipes formulation:
// trigonometric branch for three real roots, stable Cardano otherwise).
// Repeated roots sit exactly on the discriminant boundary, where rounding can
// land on either side; a relative tolerance keeps them on the trigonometric
// branch, which degrades gracefully there while the Cardano branch would drop
// the repeated root.
std::vector<double> cubic_real_roots(double a, double b, double c) {
  const double q = (a * a - 3.0 * b) / 9.0;
  const double r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
  const double q3 = q * q * q;
  const double disc = r * r - q3;
  const double scale = std::max({r * r, std::abs(q3), 1e-300});

  std::vector<double> roots;
  if (disc <= 1e-12 * scale) {
    if (q <= 0.0) {
      roots.push_back(-a / 3.0);  // q ~ 0 here: triple root
    } else {
      const double theta = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
      const double spread = -2.0 * std::sqrt(q);
      roots.push_back(spread * std::cos(theta / 3.0) - a / 3.0);
      roots.push_back(spread * std::cos((theta + 2.0 * M_PI) / 3.0) - a / 3.0);
      roots.push_back(spread * std::cos((theta - 2.0 * M_PI) / 3.0) - a / 3.0);
    }
  } else {
    const double big_a =
        -std::copysign(std::cbrt(std::abs(r) + std::sqrt(disc)), r);
    const double big_b = big_a == 0.0 ? 0.0 : q / big_a;
    roots.push_back(big_a + big_b - a / 3.0);
  }
  return roots;
}

// Perron root estimate by the power method on G + I, run as repeated
// squaring: (G+I)^(2^100) resolves eigenvalue gaps far below machine
// precision, so the dominant direction is exact even for clustered spectra.
// The shift separates the dominant eigenvalue from any complex pair of equal
// modulus, and for a nonnegative G the all-ones start vector cannot be
// orthogonal to the (nonnegative) left Perron vector.
double power_iteration_radius(const Eigen::Matrix3d& g) {
  const Eigen::Matrix3d shifted = g + Eigen::Matrix3d::Identity();
  Eigen::Matrix3d power = shifted;
  for (int squaring = 0; squaring < 100; ++squaring) {
    const double scale = power.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    power /= scale;
    power = (power * power).eval();
  }
  Eigen::Vector3d v = power * Eigen::Vector3d::Ones();
  const double vnorm = v.norm();
  if (vnorm == 0.0) {
    // Start vector annihilated; fall back to the largest column.
    Eigen::Index col;
    power.colwise().norm().maxCoeff(&col);
    v = power.col(col);
    if (v.norm() == 0.0)
      throw std::runtime_error(
          "power method on the 3x3 comparison matrix collapsed to zero");
  }
  v.normalize();
  return v.dot(shifted * v) - 1.0;
}

}  // namespace

Eigen::Matrix3d build_g_alpha(double delta, int inner_loops, double l_const,
                              double mu, int n, double alpha_max) {
  check_constants(l_const, mu, n);
  if (delta < 0.0 || delta >= 1.0)
    throw std::invalid_argument("delta must lie in [0, 1)");
  if (inner_loops < 1) throw std::invalid_argument("R must be >= 1");
  if (!(alpha_max > 0.0)) throw std::invalid_argument("alpha_max must be positive");

  const double d_r = std::pow(delta, inner_loops);
  const double root_n = std::sqrt(static_cast<double>(n));
  const double l2 = l_const * l_const;
  Eigen::Matrix3d g;
  g << d_r + d_r * l_const * alpha_max, d_r * alpha_max,
      d_r * l_const * root_n * alpha_max,
      2.0 * d_r * l_const + d_r * l2 * alpha_max,
      d_r + d_r * l_const * alpha_max, d_r * l2 * root_n * alpha_max,
      l_const * alpha_max / root_n, alpha_max / root_n, 1.0 - mu / l_const;
  return g;
}

double spectral_radius_3x3(const Eigen::Matrix3d& g) {
  if ((g.array() < 0.0).any())
    throw std::invalid_argument("spectral_radius_3x3 expects a nonnegative matrix");

  // Characteristic polynomial x^3 - tr x^2 + m2 x - det, with m2 the sum of
  // principal 2x2 minors.
  const double tr = g.trace();
  const double m2 = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0) +
                    g(0, 0) * g(2, 2) - g(0, 2) * g(2, 0) +
                    g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1);
  const double det = g.determinant();

  const auto roots = cubic_real_roots(-tr, m2, -det);
  // For a nonnegative matrix the spectral radius is itself an eigenvalue, so
  // it is the largest real root.
  double rho = *std::max_element(roots.begin(), roots.end());
  rho = std::max(rho, 0.0);

  // Newton polish, guarded against a flat derivative at multiple roots.
  double dp = 0.0;
  for (int it = 0; it < 3; ++it) {
    const double p = ((rho - tr) * rho + m2) * rho - det;
    dp = (3.0 * rho - 2.0 * tr) * rho + m2;
    if (std::abs(dp) < 1e-8) break;
    rho -= p / dp;
  }
  rho = std::max(rho, 0.0);

  // A root of a cubic with coefficient-level rounding is uncertain by about
  // eps * (coefficient scale) / |p'(root)|, which blows up near double roots;
  // the cross-check tolerance has to allow for that, capped so well-separated
  // spectra keep the strict 1e-12 agreement.
  const double coeff_scale =
      ((std::abs(rho) + std::abs(tr)) * rho + std::abs(m2)) * rho +
      std::abs(det) + 1.0;
  const double conditioning =
      2.22e-16 * coeff_scale / std::max(std::abs(dp), 1e-12);
  const double tolerance =
      1e-12 * std::max(1.0, rho) + std::min(conditioning, 1e-6);

  const double check = power_iteration_radius(g);
  if (std::abs(check - rho) > tolerance)
    throw std::runtime_error(
        "spectral radius routes disagree: cubic " + std::to_string(rho) +
        " vs power iteration " + std::to_string(check));
  // Near a multiple root the power route is the better-conditioned one, but
  // when both agree to machine precision keep the cubic's exact value.
  double result = conditioning > 1e-12 ? check : rho;
  if (std::abs(check - rho) <= 1e-15 * std::max(1.0, rho)) result = rho;
  return std::max(result, 0.0);
}

double delta_bound(const Eigen::Vector3d& c, double l_const, double mu, int n) {
  check_constants(l_const, mu, n);
  if ((c.array() <= 0.0).any())
    throw std::invalid_argument("c must be entrywise positive");
  const double root_n = std::sqrt(static_cast<double>(n));
  const double floor_c3 = l_const * (l_const * c(0) + c(1)) / (mu * mu * root_n);
  if (!(c(2) > floor_c3))
    throw std::invalid_argument("c3 must exceed L (L c1 + c2) / (mu^2 sqrt(n))");

  const double big_c = l_const * c(0) + c(1) + l_const * root_n * c(2);
  const double t1 = mu * c(0) / (big_c + mu * c(0));
  const double t2 =
      mu * c(1) / (l_const * big_c + 2.0 * l_const * mu * c(0) + mu * c(1));
  return std::min(t1, t2);
}

int min_inner_loops(double delta_bnd, double delta) {
  if (!(delta_bnd > 0.0) || delta_bnd >= 1.0)
    throw std::invalid_argument("Delta must lie in (0, 1)");
  if (delta < 0.0 || delta >= 1.0)
    throw std::invalid_argument("delta must lie in [0, 1)");
  if (delta == 0.0) return 1;  // delta^R = 0 < Delta for any R

  const double ratio = std::log(delta_bnd) / std::log(delta);
  const double nearest = std::round(ratio);
  int r_min;
  if (std::abs(ratio - nearest) <= 1e-12 && nearest >= 1.0) {
    r_min = static_cast<int>(nearest) + 1;  // integer branch, extra step
  } else {
    r_min = static_cast<int>(std::ceil(ratio));
  }
  r_min = std::max(r_min, 1);
  while (std::pow(delta, r_min) >= delta_bnd) ++r_min;  // strict by contract
  return r_min;
}

double alpha_hat(const Eigen::Vector3d& c, double delta, int inner_loops,
                 double l_const, double mu, int n) {
  check_constants(l_const, mu, n);
  if ((c.array() <= 0.0).any())
    throw std::invalid_argument("c must be entrywise positive");
  const double d_r = std::pow(delta, inner_loops);
  if (!(d_r < c(1) / (2.0 * l_const * c(0) + c(1))))
    throw std::domain_error(
        "positivity condition delta^R < c2 / (2 L c1 + c2) fails");

  const double root_n = std::sqrt(static_cast<double>(n));
  const double big_c = l_const * c(0) + c(1) + l_const * root_n * c(2);
  const double t1 =
      d_r > 0.0 ? (1.0 - d_r) * c(0) / (d_r * big_c) : kInf;
  const double t2 =
      d_r > 0.0
          ? ((1.0 - d_r) * c(1) - 2.0 * d_r * l_const * c(0)) /
                (d_r * l_const * big_c)
          : kInf;
  const double t3 = mu * root_n * c(2) / (l_const * (l_const * c(0) + c(1)));
  return std::min({t1, t2, t3});
}

SelectedC select_c(double l_const, double mu, int n, double delta) {
  check_constants(l_const, mu, n);
  if (delta < 0.0 || delta >= 1.0)
    throw std::invalid_argument("delta must lie in [0, 1)");

  const double root_n = std::sqrt(static_cast<double>(n));
  const auto c3_floor = [&](double c2) {
    return l_const * (l_const + c2) / (mu * mu * root_n);
  };
  const auto project = [&](double c2, double c3) {
    return std::max(c3, c3_floor(c2) * (1.0 + 1e-6));
  };
  const auto objective = [&](double c2, double c3) {
    return delta_bound({1.0, c2, project(c2, c3)}, l_const, mu, n);
  };

  double best_c2 = 1.0;
  double best_c3 = project(1.0, 0.0);
  double best = objective(best_c2, best_c3);

  // 9 log-spaced starts per coordinate; c3 starts are multiples of its floor.
  for (int i = 0; i < 9; ++i) {
    const double c2_start = std::pow(10.0, -2.0 + 4.0 * i / 8.0);
    for (int j = 0; j < 9; ++j) {
      const double c3_start =
          c3_floor(c2_start) * (1.0 + 1e-6) * std::pow(10.0, 2.0 * j / 8.0);
      double c2 = c2_start;
      double c3 = project(c2_start, c3_start);
      double value = objective(c2, c3);
      double step = 0.5;  // multiplicative step in log space
      while (step > 1e-12) {
        bool improved = false;
        for (const double factor : {std::exp(step), std::exp(-step)}) {
          if (const double v = objective(c2 * factor, c3); v > value) {
            c2 *= factor;
            value = v;
            improved = true;
          }
          if (const double v = objective(c2, c3 * factor); v > value) {
            c3 *= factor;
            value = v;
            improved = true;
          }
        }
        if (!improved) step *= 0.5;
      }
      if (value > best) {
        best = value;
        best_c2 = c2;
        best_c3 = project(c2, c3);
      }
    }
  }

  SelectedC out;
  out.c = {1.0, best_c2, project(best_c2, best_c3)};
  out.delta_bnd = best;
  out.r_min = min_inner_loops(best, delta);
  return out;
}

Certificate certify(const ProblemConstants& pc, double delta, int inner_loops,
                    double alpha_max) {
  Certificate cert;
  cert.l_const = pc.l_const;
  cert.mu = pc.mu;
  cert.n = pc.n;
  cert.delta = delta;
  cert.inner_loops = inner_loops;
  cert.alpha_max = alpha_max;

  const SelectedC sel = select_c(pc.l_const, pc.mu, pc.n, delta);
  cert.c = sel.c;
  cert.big_c = pc.l_const * sel.c(0) + sel.c(1) +
               pc.l_const * std::sqrt(static_cast<double>(pc.n)) * sel.c(2);
  cert.delta_bnd = sel.delta_bnd;
  cert.r_min = sel.r_min;

  try {
    cert.alpha_hat =
        alpha_hat(sel.c, delta, inner_loops, pc.l_const, pc.mu, pc.n);
  } catch (const std::domain_error&) {
    cert.alpha_hat.reset();
  }

  cert.g_alpha =
      build_g_alpha(delta, inner_loops, pc.l_const, pc.mu, pc.n, alpha_max);
  cert.rho = spectral_radius_3x3(cert.g_alpha);
  cert.admissible = cert.rho < 1.0;
  cert.witness_ok = ((cert.g_alpha * cert.c).array() < cert.c.array()).all();
  cert.alpha_max_within_hat =
      cert.alpha_hat.has_value() && alpha_max <= *cert.alpha_hat;
  cert.mean_step_bound_strict =
      2.0 / pc.l_const - pc.mu / (pc.l_const * pc.l_const);
  cert.mean_step_bound_weak = 2.0 / pc.l_const;
  return cert;
}

std::string certificate_to_json(const Certificate& cert) {
  nlohmann::json j;
  j["schema"] = "decopt.certificate.v1";
  j["L"] = cert.l_const;
  j["mu"] = cert.mu;
  j["n"] = cert.n;
  j["delta"] = cert.delta;
  j["R"] = cert.inner_loops;
  j["alpha_max"] = cert.alpha_max;
  j["c"] = {cert.c(0), cert.c(1), cert.c(2)};
  j["C"] = cert.big_c;
  j["Delta"] = cert.delta_bnd;
  j["R_min"] = cert.r_min;
  if (cert.alpha_hat.has_value())
    j["alpha_hat"] = *cert.alpha_hat;
  else
    j["alpha_hat"] = nullptr;
  auto& g = j["G_alpha"] = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    g.push_back({cert.g_alpha(r, 0), cert.g_alpha(r, 1), cert.g_alpha(r, 2)});
  j["rho"] = cert.rho;
  j["admissible"] = cert.admissible;
  j["witness_ok"] = cert.witness_ok;
  j["alpha_max_within_hat"] = cert.alpha_max_within_hat;
  j["mean_step_bound_strict"] = cert.mean_step_bound_strict;
  j["mean_step_bound_weak"] = cert.mean_step_bound_weak;
  return j.dump(2);
}

double mean_step_contraction(double mean_alpha, double l_const, double mu) {
  return std::max(std::abs(1.0 - mu * mean_alpha),
                  std::abs(1.0 - l_const * mean_alpha));
}

}  // namespace decopt
