#include "fgbench/samplers.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "fgbench/errors.hpp"

namespace fgbench {

void SamplerConfig::validate() const {
  if (!(step >= 0.0) || !std::isfinite(step)) throw std::invalid_argument("sampler: step must be >= 0");
  if (kind == SamplerKind::kHMC && leapfrog < 1) {
    throw std::invalid_argument("sampler: HMC needs leapfrog >= 1");
  }
  if (kind == SamplerKind::kULMC && !(damping > 0.0)) {
    throw std::invalid_argument("sampler: ULMC needs damping > 0");
  }
  if (svrg && svrg->batch < 1) throw std::invalid_argument("sampler: SVRG batch must be >= 1");
}

SamplerState SamplerState::init(Eigen::VectorXd theta, SamplerKind kind) {
  SamplerState s;
  if (kind == SamplerKind::kULMC) s.velocity = Eigen::VectorXd::Zero(theta.size());
  s.theta = std::move(theta);
  return s;
}

namespace {

void check_finite(const Eigen::VectorXd& v, const Eigen::VectorXd& theta, const char* what) {
  if (!v.allFinite()) throw DivergenceError(std::string("non-finite ") + what, theta);
}

const DesignState& require_precond(const Target& target) {
  if (target.precond == nullptr) {
    throw SamplerStateError("preconditioned kernel requires a design state");
  }
  return *target.precond;
}

// Refreshes the SVRG snapshot when due. Called once at the start of a kernel step.
void prepare_svrg(SamplerState& state, const Target& target, const SamplerConfig& cfg) {
  if (!cfg.svrg) return;
  const std::size_t period = cfg.svrg->snapshot_period;
  if (!state.snapshot || (period > 0 && state.steps_since_snapshot >= period)) {
    svrg_refresh(state, target);
  }
  ++state.steps_since_snapshot;
}

Eigen::VectorXd drift_grad(const SamplerState& state, const Eigen::VectorXd& theta,
                           const Target& target, const SamplerConfig& cfg, Rng& rng) {
  Eigen::VectorXd g = cfg.svrg ? svrg_grad(state, theta, target, cfg, rng) : target.gradient(theta);
  check_finite(g, theta, "gradient");
  return g;
}

// Preconditioned direction P g, P = Vinv or I.
Eigen::VectorXd apply_precond(const Eigen::VectorXd& g, const Target& target, const SamplerConfig& cfg) {
  if (!cfg.precondition) return g;
  return require_precond(target).Vinv * g;
}

Eigen::VectorXd shape_noise(const Eigen::VectorXd& eps, const Target& target, const SamplerConfig& cfg) {
  if (!cfg.precondition) return eps;
  return whiten(require_precond(target), eps);
}

double log_proposal_with_grad(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                              const Eigen::VectorXd& grad_from, const Target& target,
                              const SamplerConfig& cfg) {
  const double h = cfg.step;
  const auto d = static_cast<double>(to.size());
  const Eigen::VectorXd u = to - from + h * apply_precond(grad_from, target, cfg);
  double quad = 0.0;
  double half_logdet_v = 0.0;
  if (cfg.precondition) {
    const auto& ds = require_precond(target);
    quad = u.dot(ds.V * u);
    half_logdet_v = ds.cholL.diagonal().array().log().sum();
  } else {
    quad = u.squaredNorm();
  }
  return -quad / (4.0 * h) - 0.5 * d * std::log(4.0 * std::numbers::pi * h) + half_logdet_v;
}

double log_accept_with_grads(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                             const Eigen::VectorXd& grad_from, const Eigen::VectorXd& grad_to,
                             double u_from, double u_to, const Target& target,
                             const SamplerConfig& cfg) {
  double log_ratio = u_from - u_to;
  if (cfg.mala_filter == MalaFilter::kFull) {
    log_ratio += log_proposal_with_grad(from, to, grad_to, target, cfg) -
                 log_proposal_with_grad(to, from, grad_from, target, cfg);
  }
  if (std::isnan(log_ratio)) return -std::numeric_limits<double>::infinity();
  return std::min(0.0, log_ratio);
}

}  // namespace

// ------------------------------------------------------------------ LMC

SamplerState lmc_step_with_noise(SamplerState state, const Target& target, const SamplerConfig& cfg,
                                 const Eigen::VectorXd& eps, Rng& rng) {
  if (cfg.step == 0.0) return state;
  prepare_svrg(state, target, cfg);
  const Eigen::VectorXd g = drift_grad(state, state.theta, target, cfg, rng);
  Eigen::VectorXd next = state.theta - cfg.step * apply_precond(g, target, cfg) +
                         std::sqrt(2.0 * cfg.step) * shape_noise(eps, target, cfg);
  check_finite(next, state.theta, "position");
  state.theta = std::move(next);
  return state;
}

SamplerState lmc_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng) {
  if (cfg.step == 0.0) return state;
  if (cfg.svrg) {
    // Batch indices are drawn before the noise so the draw order is fixed.
    prepare_svrg(state, target, cfg);
    const Eigen::VectorXd g = drift_grad(state, state.theta, target, cfg, rng);
    const Eigen::VectorXd eps = standard_normal(rng, state.theta.size());
    Eigen::VectorXd next = state.theta - cfg.step * apply_precond(g, target, cfg) +
                           std::sqrt(2.0 * cfg.step) * shape_noise(eps, target, cfg);
    check_finite(next, state.theta, "position");
    state.theta = std::move(next);
    return state;
  }
  const Eigen::VectorXd eps = standard_normal(rng, state.theta.size());
  return lmc_step_with_noise(std::move(state), target, cfg, eps, rng);
}

// ----------------------------------------------------------------- MALA

double mala_log_proposal(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                         const Target& target, const SamplerConfig& cfg) {
  return log_proposal_with_grad(to, from, target.gradient(from), target, cfg);
}

double mala_log_accept(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                       const Target& target, const SamplerConfig& cfg) {
  return log_accept_with_grads(from, to, target.gradient(from), target.gradient(to),
                               target.potential(from), target.potential(to), target, cfg);
}

double mala_transition_log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                                   const Target& target, const SamplerConfig& cfg) {
  return mala_log_proposal(to, from, target, cfg) + mala_log_accept(from, to, target, cfg);
}

SamplerState mala_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng) {
  ++state.proposed;
  if (cfg.step == 0.0) {
    ++state.accepted;
    return state;
  }
  prepare_svrg(state, target, cfg);
  const Eigen::VectorXd& theta = state.theta;
  const Eigen::VectorXd g = drift_grad(state, theta, target, cfg, rng);
  const Eigen::VectorXd eps = standard_normal(rng, theta.size());
  Eigen::VectorXd prop = theta - cfg.step * apply_precond(g, target, cfg) +
                         std::sqrt(2.0 * cfg.step) * shape_noise(eps, target, cfg);
  check_finite(prop, theta, "proposal");

  const double u_from = target.potential(theta);
  const double u_to = target.potential(prop);
  Eigen::VectorXd g_to;
  if (cfg.mala_filter == MalaFilter::kFull) g_to = drift_grad(state, prop, target, cfg, rng);
  const double log_alpha =
      log_accept_with_grads(theta, prop, g, g_to, u_from, u_to, target, cfg);
  if (std::log(uniform01(rng)) < log_alpha) {
    state.theta = std::move(prop);
    ++state.accepted;
  }
  return state;
}

// ------------------------------------------------------------------ HMC

std::pair<Eigen::VectorXd, Eigen::VectorXd> leapfrog(Eigen::VectorXd theta, Eigen::VectorXd p,
                                                     const GradFn& grad, double eps, int steps,
                                                     const Eigen::MatrixXd* inv_mass) {
  if (!(eps > 0.0) || steps < 1) throw std::invalid_argument("leapfrog: need eps > 0 and L >= 1");
  auto gradient = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd g = grad(th);
    check_finite(g, th, "gradient in leapfrog");
    return g;
  };
  p -= 0.5 * eps * gradient(theta);
  for (int l = 1; l <= steps; ++l) {
    if (inv_mass) {
      theta += eps * (*inv_mass * p);
    } else {
      theta += eps * p;
    }
    check_finite(theta, theta, "position in leapfrog");
    if (l < steps) p -= eps * gradient(theta);
  }
  p -= 0.5 * eps * gradient(theta);
  check_finite(p, theta, "momentum in leapfrog");
  return {std::move(theta), std::move(p)};
}

SamplerState hmc_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng) {
  ++state.proposed;
  if (cfg.step == 0.0) {
    ++state.accepted;
    return state;
  }
  prepare_svrg(state, target, cfg);
  const Eigen::Index d = state.theta.size();
  const Eigen::MatrixXd* inv_mass = nullptr;
  Eigen::VectorXd p = standard_normal(rng, d);
  if (cfg.precondition) {
    const auto& ds = require_precond(target);
    p = ds.cholL * p;
    inv_mass = &ds.Vinv;
  }
  auto kinetic = [&](const Eigen::VectorXd& mom) {
    return inv_mass ? 0.5 * mom.dot(*inv_mass * mom) : 0.5 * mom.squaredNorm();
  };
  const GradFn grad = [&](const Eigen::VectorXd& th) {
    return cfg.svrg ? svrg_grad(state, th, target, cfg, rng) : target.gradient(th);
  };
  const double h_old = target.potential(state.theta) + kinetic(p);
  auto [theta_new, p_new] = leapfrog(state.theta, p, grad, cfg.step, cfg.leapfrog, inv_mass);
  const double h_new = target.potential(theta_new) + kinetic(p_new);
  const double delta_h = h_new - h_old;
  if (std::isfinite(delta_h) && std::log(uniform01(rng)) < -delta_h) {
    state.theta = std::move(theta_new);
    ++state.accepted;
  }
  return state;
}

// ----------------------------------------------------------------- ULMC

SamplerState ulmc_step_with_noise(SamplerState state, const Target& target, const SamplerConfig& cfg,
                                  const Eigen::VectorXd& xi, Rng& rng) {
  if (!state.velocity) throw SamplerStateError("ULMC step without a velocity");
  if (cfg.step == 0.0) return state;
  prepare_svrg(state, target, cfg);
  const double h = cfg.step;
  const double gamma = cfg.damping;
  const Eigen::VectorXd g = drift_grad(state, state.theta, target, cfg, rng);
  Eigen::VectorXd v = (1.0 - gamma * h) * *state.velocity - h * apply_precond(g, target, cfg) +
                      std::sqrt(2.0 * gamma * h) * shape_noise(xi, target, cfg);
  Eigen::VectorXd next = state.theta + h * v;
  check_finite(next, state.theta, "position");
  state.theta = std::move(next);
  state.velocity = std::move(v);
  return state;
}

SamplerState ulmc_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng) {
  if (!state.velocity) throw SamplerStateError("ULMC step without a velocity");
  if (cfg.step == 0.0) return state;
  if (cfg.svrg) {
    prepare_svrg(state, target, cfg);
    const double h = cfg.step;
    const Eigen::VectorXd g = drift_grad(state, state.theta, target, cfg, rng);
    const Eigen::VectorXd xi = standard_normal(rng, state.theta.size());
    Eigen::VectorXd v = (1.0 - cfg.damping * h) * *state.velocity - h * apply_precond(g, target, cfg) +
                        std::sqrt(2.0 * cfg.damping * h) * shape_noise(xi, target, cfg);
    Eigen::VectorXd next = state.theta + h * v;
    check_finite(next, state.theta, "position");
    state.theta = std::move(next);
    state.velocity = std::move(v);
    return state;
  }
  const Eigen::VectorXd xi = standard_normal(rng, state.theta.size());
  return ulmc_step_with_noise(std::move(state), target, cfg, xi, rng);
}

// ----------------------------------------------------------------- SVRG

void svrg_refresh(SamplerState& state, const Target& target) {
  state.snapshot = state.theta;
  state.snapshot_grad = target.gradient(state.theta);
  check_finite(*state.snapshot_grad, state.theta, "snapshot gradient");
  state.steps_since_snapshot = 0;
}

Eigen::VectorXd svrg_grad(const SamplerState& state, const Eigen::VectorXd& theta,
                          const Target& target, const SamplerConfig& cfg, Rng& rng) {
  if (!state.snapshot || !state.snapshot_grad) throw SamplerStateError("SVRG gradient without a snapshot");
  if (!target.term_gradient || !target.prior_gradient) {
    throw SamplerStateError("SVRG needs per-term and prior gradients");
  }
  const Eigen::VectorXd& anchor = *state.snapshot;
  Eigen::VectorXd g = *state.snapshot_grad + target.prior_gradient(theta) - target.prior_gradient(anchor);
  const std::size_t n = target.num_terms;
  if (n == 0) return g;
  const std::size_t batch = cfg.svrg ? cfg.svrg->batch : n;
  if (batch >= n) {
    for (std::size_t i = 0; i < n; ++i) {
      g += target.term_gradient(i, theta) - target.term_gradient(i, anchor);
    }
    return g;
  }
  Eigen::VectorXd corr = Eigen::VectorXd::Zero(theta.size());
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t i = uniform_index(rng, n);
    corr += target.term_gradient(i, theta) - target.term_gradient(i, anchor);
  }
  g += (static_cast<double>(n) / static_cast<double>(batch)) * corr;
  return g;
}

// ---------------------------------------------------------------- chain

SamplerState run_chain(SamplerState state, std::size_t steps, const Target& target,
                       const SamplerConfig& cfg, Rng& rng) {
  if (cfg.svrg && cfg.svrg->snapshot_period == 0) {
    state.snapshot.reset();
    state.snapshot_grad.reset();
  }
  for (std::size_t k = 0; k < steps; ++k) {
    try {
      switch (cfg.kind) {
        case SamplerKind::kLMC:
          state = lmc_step(std::move(state), target, cfg, rng);
          break;
        case SamplerKind::kMALA:
          state = mala_step(std::move(state), target, cfg, rng);
          break;
        case SamplerKind::kHMC:
          state = hmc_step(std::move(state), target, cfg, rng);
          break;
        case SamplerKind::kULMC:
          state = ulmc_step(std::move(state), target, cfg, rng);
          break;
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " at inner step " + std::to_string(k), e.theta(), k);
    }
  }
  return state;
}

}  // namespace fgbench
