#include "decopt/weights.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace decopt {

namespace {

// Largest |eigenvalue| of W - (1/n)11^T, no range checks.
double deflated_spectral_norm(const Eigen::MatrixXd& w) {
  const auto n = w.rows();
  Eigen::MatrixXd deflated =
      w - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  // The inputs we care about are symmetric; symmetrize so rounding noise in a
  // caller-supplied matrix cannot push the solver off the self-adjoint path.
  deflated = 0.5 * (deflated + deflated.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(deflated,
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

WeightMatrix metropolis_weights(const Graph& g) {
  if (!is_connected(g)) throw std::invalid_argument("graph must be connected");
  const int n = g.n;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges) {
    const double wij = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
    w(i, j) = wij;
    w(j, i) = wij;  // mirrored, so W = W^T holds exactly
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j : g.adjacency[i]) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  WeightMatrix wm;
  wm.w = std::move(w);
  wm.delta = spectral_gap(wm.w);
  return wm;
}

double spectral_gap(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols()) throw std::invalid_argument("W must be square");
  const double delta = deflated_spectral_norm(w);
  if (delta >= 1.0 - 1e-12)
    throw std::domain_error(
        "spectral gap >= 1: weight matrix does not mix (disconnected graph "
        "or invalid W)");
  return delta;
}

WeightChecklist validate_weights(const Eigen::MatrixXd& w, const Graph& g,
                                 double tol) {
  WeightChecklist c;
  const int n = static_cast<int>(w.rows());
  if (n != g.n || w.cols() != n) return c;  // shape mismatch: everything fails

  c.max_row_error = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  c.max_col_error = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  c.max_asymmetry = (w - w.transpose()).cwiseAbs().maxCoeff();
  c.rows_stochastic = c.max_row_error <= tol;
  c.cols_stochastic = c.max_col_error <= tol;
  c.symmetric = c.max_asymmetry <= tol;

  c.pattern_ok = true;
  for (int i = 0; i < n && c.pattern_ok; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && w(i, j) != 0.0 && !g.has_edge(i, j)) {
        c.pattern_ok = false;
        break;
      }
    }
  }

  c.delta = deflated_spectral_norm(w);
  c.delta_ok = c.delta < 1.0 - 1e-12;
  return c;
}

std::string weights_to_json(const WeightMatrix& wm) {
  nlohmann::json j;
  j["schema"] = "decopt.weights.v1";
  const auto n = wm.w.rows();
  j["n"] = n;
  auto& entries = j["w"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) entries.push_back(wm.w(i, k));
  j["delta"] = wm.delta;
  return j.dump(2);
}

WeightMatrix weights_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("schema") != "decopt.weights.v1")
    throw std::runtime_error("unexpected weights schema");
  const auto n = j.at("n").get<Eigen::Index>();
  const auto& entries = j.at("w");
  if (static_cast<Eigen::Index>(entries.size()) != n * n)
    throw std::runtime_error("weights entry count does not match n*n");
  WeightMatrix wm;
  wm.w.resize(n, n);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) wm.w(i, k) = entries[pos++];
  wm.delta = j.at("delta").get<double>();
  return wm;
}

}  // namespace decopt
