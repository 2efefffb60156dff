#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "fgbench/numeric_core.hpp"
#include "fgbench/rng.hpp"

namespace fgbench {

enum class SamplerKind { kLMC, kMALA, kHMC, kULMC };

enum class MalaFilter {
  kFull,    // Metropolis-Hastings with the Langevin proposal density ratio
  kSimple,  // Metropolis filter on the potential only
};

struct SvrgConfig {
  std::size_t batch = 64;
  std::size_t snapshot_period = 0;  // 0: one snapshot per run_chain call
};

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kLMC;
  double step = 0.01;
  std::size_t inner_steps = 50;
  std::size_t inner_steps_stale = 10;
  int leapfrog = 10;
  double damping = 1.0;
  bool precondition = false;
  std::optional<SvrgConfig> svrg;
  MalaFilter mala_filter = MalaFilter::kFull;

  void validate() const;
};

struct SamplerState {
  Eigen::VectorXd theta;
  std::optional<Eigen::VectorXd> velocity;
  std::optional<Eigen::VectorXd> snapshot;
  std::optional<Eigen::VectorXd> snapshot_grad;
  std::size_t steps_since_snapshot = 0;
  std::size_t proposed = 0;
  std::size_t accepted = 0;

  static SamplerState init(Eigen::VectorXd theta, SamplerKind kind);
  double acceptance_rate() const {
    return proposed == 0 ? 1.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

/// Potential U (already including the inverse temperature) and its gradient.
///
/// SVRG additionally needs the gradient split into per-term data gradients
/// plus a prior gradient, with gradient == sum of terms + prior. When
/// `precond` is set, preconditioned kernels use its Vinv / Cholesky factor.
struct Target {
  std::function<double(const Eigen::VectorXd&)> potential;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::size_t num_terms = 0;
  std::function<Eigen::VectorXd(std::size_t, const Eigen::VectorXd&)> term_gradient;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> prior_gradient;
  const DesignState* precond = nullptr;
};

using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// ------------------------------------------------------------------ LMC

SamplerState lmc_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng);

/// LMC with caller-supplied standard-normal noise `eps`.
SamplerState lmc_step_with_noise(SamplerState state, const Target& target, const SamplerConfig& cfg,
                                 const Eigen::VectorXd& eps, Rng& rng);

// ----------------------------------------------------------------- MALA

SamplerState mala_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng);

/// log q(to | from) of the (possibly preconditioned) Langevin proposal,
/// normalizing constant included. Uses the exact target gradient.
double mala_log_proposal(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                         const Target& target, const SamplerConfig& cfg);

/// log of the acceptance probability for the move from -> to (always <= 0).
double mala_log_accept(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                       const Target& target, const SamplerConfig& cfg);

/// log density of the continuous part of the MALA kernel, from != to.
double mala_transition_log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                                   const Target& target, const SamplerConfig& cfg);

// ------------------------------------------------------------------ HMC

/// Half kick, L drift steps with full kicks in between, final half kick.
/// `inv_mass` defaults to the identity.
std::pair<Eigen::VectorXd, Eigen::VectorXd> leapfrog(Eigen::VectorXd theta, Eigen::VectorXd p,
                                                     const GradFn& grad, double eps, int steps,
                                                     const Eigen::MatrixXd* inv_mass = nullptr);

SamplerState hmc_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng);

// ----------------------------------------------------------------- ULMC

SamplerState ulmc_step(SamplerState state, const Target& target, const SamplerConfig& cfg, Rng& rng);

/// ULMC with caller-supplied standard-normal noise `xi`.
SamplerState ulmc_step_with_noise(SamplerState state, const Target& target, const SamplerConfig& cfg,
                                  const Eigen::VectorXd& xi, Rng& rng);

// ----------------------------------------------------------------- SVRG

/// Sets the snapshot to the current position and stores the full gradient there.
void svrg_refresh(SamplerState& state, const Target& target);

/// Variance-reduced gradient estimate at theta. Throws SamplerStateError
/// when no snapshot is present.
Eigen::VectorXd svrg_grad(const SamplerState& state, const Eigen::VectorXd& theta,
                          const Target& target, const SamplerConfig& cfg, Rng& rng);

// ---------------------------------------------------------------- chain

/// Applies the configured kernel `steps` times. A DivergenceError is rethrown
/// with the failing inner step index.
SamplerState run_chain(SamplerState state, std::size_t steps, const Target& target,
                       const SamplerConfig& cfg, Rng& rng);

}  // namespace fgbench
