// Doubly stochastic mixing matrices for consensus averaging, and the spectral
// gap delta = ||W - (1/n)11^T||_2 that governs how fast they mix.

#pragma once

#include <string>

#include <Eigen/Dense>

#include "decopt/graph.hpp"

namespace decopt {

struct WeightMatrix {
  Eigen::MatrixXd w;
  double delta = 0.0;  // spectral norm of the deflated matrix, in [0, 1)
};

// Metropolis constant edge weights: w_ij = 1 / (1 + max(deg_i, deg_j)) for
// every edge, w_ii = 1 - sum of the off-diagonal row. Symmetric and doubly
// stochastic by construction.
WeightMatrix metropolis_weights(const Graph& g);

// ||W - (1/n)11^T||_2 for a symmetric doubly stochastic W. Throws
// std::domain_error when the result is >= 1 - 1e-12, which signals a
// disconnected graph or an invalid matrix.
double spectral_gap(const Eigen::MatrixXd& w);

struct WeightChecklist {
  bool rows_stochastic = false;
  bool cols_stochastic = false;
  bool symmetric = false;
  bool pattern_ok = false;   // nonzeros only on edges and the diagonal
  bool delta_ok = false;     // delta < 1 - 1e-12
  double max_row_error = 0.0;
  double max_col_error = 0.0;
  double max_asymmetry = 0.0;
  double delta = 0.0;

  bool all_ok() const {
    return rows_stochastic && cols_stochastic && symmetric && pattern_ok &&
           delta_ok;
  }
};

// Pure diagnostic; never throws on a bad matrix, just reports.
WeightChecklist validate_weights(const Eigen::MatrixXd& w, const Graph& g,
                                 double tol = 1e-12);

// JSON fixture schema "decopt.weights.v1": dense row-major entries + delta.
std::string weights_to_json(const WeightMatrix& wm);
WeightMatrix weights_from_json(const std::string& text);

}  // namespace decopt
