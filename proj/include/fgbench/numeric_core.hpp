#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace fgbench {

/// Incremental ridge-regression statistics.
///
/// Holds V = reg*I + sum x x^T together with a rank-1 maintained inverse and
/// lower Cholesky factor, plus the response vector sum r x. Every
/// `refresh_period` updates the inverse and factor are rebuilt from V to stop
/// drift from accumulating.
struct DesignState {
  Eigen::Index dim = 0;
  double reg = 0.0;
  Eigen::MatrixXd V;
  Eigen::MatrixXd Vinv;
  Eigen::MatrixXd cholL;
  Eigen::VectorXd bvec;
  std::size_t count = 0;
  std::size_t refresh_period = 1000;
  std::size_t updates_since_refresh = 0;
};

DesignState design_init(Eigen::Index dim, double reg, std::size_t refresh_period = 1000);

/// Absorbs one observation (x, r). O(d^2) except on refresh rounds.
void design_update(DesignState& state, const Eigen::VectorXd& x, double r);

/// Rebuilds Vinv and cholL from V by a fresh factorization.
void design_refresh(DesignState& state);

/// theta_hat = Vinv * bvec.
Eigen::VectorXd ridge_estimate(const DesignState& state);

/// theta_hat via two triangular solves against cholL.
Eigen::VectorXd ridge_estimate_solve(const DesignState& state);

/// w = L^{-T} v, so standard-normal v maps to covariance V^{-1}.
Eigen::VectorXd whiten(const DesignState& state, const Eigen::VectorXd& v);

/// sqrt(x^T Vinv x). Throws NumericDegeneracyError if the radicand is below -1e-12.
double ucb_width(const DesignState& state, const Eigen::VectorXd& x);

/// In-place rank-1 update of a lower Cholesky factor: L L^T + x x^T.
void cholesky_rank1_update(Eigen::MatrixXd& L, Eigen::VectorXd x);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
/// `guess` is used as the starting vector when non-empty and is overwritten
/// with the final iterate so successive calls can warm start.
double max_eigenvalue_psd(const Eigen::MatrixXd& A, Eigen::VectorXd& guess, int iterations = 30);

}  // namespace fgbench
