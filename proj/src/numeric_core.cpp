#include "fgbench/numeric_core.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "fgbench/errors.hpp"

namespace fgbench {

namespace {

void require_dim(const DesignState& state, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != state.dim) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(state.dim) + ", got " + std::to_string(v.size()));
  }
}

}  // namespace

DesignState design_init(Eigen::Index dim, double reg, std::size_t refresh_period) {
  if (dim < 1) throw std::invalid_argument("design_init: dim must be >= 1");
  if (!(reg > 0.0) || !std::isfinite(reg)) {
    throw std::invalid_argument("design_init: reg must be positive and finite");
  }
  DesignState s;
  s.dim = dim;
  s.reg = reg;
  s.V = reg * Eigen::MatrixXd::Identity(dim, dim);
  s.Vinv = (1.0 / reg) * Eigen::MatrixXd::Identity(dim, dim);
  s.cholL = std::sqrt(reg) * Eigen::MatrixXd::Identity(dim, dim);
  s.bvec = Eigen::VectorXd::Zero(dim);
  s.refresh_period = refresh_period;
  return s;
}

void cholesky_rank1_update(Eigen::MatrixXd& L, Eigen::VectorXd x) {
  const Eigen::Index n = L.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lkk = L(k, k);
    const double r = std::hypot(lkk, x[k]);
    const double c = r / lkk;
    const double s = x[k] / lkk;
    L(k, k) = r;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      L(i, k) = (L(i, k) + s * x[i]) / c;
      x[i] = c * x[i] - s * L(i, k);
    }
  }
}

void design_update(DesignState& state, const Eigen::VectorXd& x, double r) {
  require_dim(state, x, "design_update");
  if (!x.allFinite() || !std::isfinite(r)) {
    throw std::invalid_argument("design_update: non-finite observation");
  }
  state.V.noalias() += x * x.transpose();
  state.bvec.noalias() += r * x;

  const Eigen::VectorXd u = state.Vinv * x;
  const double denom = 1.0 + x.dot(u);
  state.Vinv.noalias() -= (u * u.transpose()) / denom;
  cholesky_rank1_update(state.cholL, x);

  ++state.count;
  if (state.refresh_period > 0 && ++state.updates_since_refresh >= state.refresh_period) {
    design_refresh(state);
  }
}

void design_refresh(DesignState& state) {
  Eigen::LLT<Eigen::MatrixXd> llt(state.V);
  if (llt.info() != Eigen::Success) {
    throw NumericDegeneracyError("design_refresh: V is not positive definite");
  }
  state.cholL = llt.matrixL();
  state.Vinv = llt.solve(Eigen::MatrixXd::Identity(state.dim, state.dim));
  state.Vinv = 0.5 * (state.Vinv + state.Vinv.transpose()).eval();
  state.updates_since_refresh = 0;
}

Eigen::VectorXd ridge_estimate(const DesignState& state) { return state.Vinv * state.bvec; }

Eigen::VectorXd ridge_estimate_solve(const DesignState& state) {
  const auto L = state.cholL.triangularView<Eigen::Lower>();
  Eigen::VectorXd y = L.solve(state.bvec);
  return L.transpose().solve(y);
}

Eigen::VectorXd whiten(const DesignState& state, const Eigen::VectorXd& v) {
  require_dim(state, v, "whiten");
  return state.cholL.triangularView<Eigen::Lower>().transpose().solve(v);
}

double ucb_width(const DesignState& state, const Eigen::VectorXd& x) {
  require_dim(state, x, "ucb_width");
  double q = x.dot(state.Vinv * x);
  if (q < -1e-12) {
    throw NumericDegeneracyError("ucb_width: negative quadratic form " + std::to_string(q));
  }
  if (q < 0.0) q = 0.0;
  return std::sqrt(q);
}

double max_eigenvalue_psd(const Eigen::MatrixXd& A, Eigen::VectorXd& guess, int iterations) {
  const Eigen::Index n = A.rows();
  if (n == 0) return 0.0;
  if (guess.size() != n || guess.norm() == 0.0) guess = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd v = guess.normalized();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = A * v;
    const double norm = w.norm();
    if (norm == 0.0) {
      lambda = 0.0;
      break;
    }
    lambda = v.dot(w);
    v = w / norm;
  }
  guess = v;
  // Rayleigh quotients approach the top eigenvalue from below.
  return std::max(lambda, (A * v).norm());
}

}  // namespace fgbench
