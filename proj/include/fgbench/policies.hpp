#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "fgbench/environments.hpp"
#include "fgbench/likelihoods.hpp"
#include "fgbench/numeric_core.hpp"
#include "fgbench/rng.hpp"
#include "fgbench/samplers.hpp"

namespace fgbench {

enum class PolicyKind { kUniform, kEpsGreedy, kLinUCB, kLinTS, kMcmcTS };

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kUniform;
  double eps = 0.01;
  bool eps_decay = false;  // eps / t instead of constant eps
  double alpha = 0.1;
  double ts_scale = 1.0;
  double reg = 1.0;
  LikelihoodSpec likelihood;
  SamplerConfig sampler;
  bool auto_step = true;           // derive sampler.step from the target curvature each round
  std::optional<double> step_scale;  // kernel default when unset
  std::string name;                // overrides the derived display name

  void validate() const;
};

/// e.g. "LinUCB", "MALATS", "PFGLMCTS", "SFGSVRGHMCTS".
std::string policy_display_name(const PolicyConfig& cfg);

/// Default step_scale for auto step sizes: 0.01 (LMC, MALA), 0.2 (HMC), 0.1 (ULMC).
double default_step_scale(SamplerKind kind);

struct PolicyState {
  std::optional<DesignState> design;
  std::optional<History> history;
  std::optional<SamplerState> chain;
  std::size_t rounds_seen = 0;
  bool new_data = false;
  Eigen::VectorXd power_guess;  // warm start for the curvature estimate
  std::size_t last_inner_steps = 0;
  double last_step = 0.0;
};

PolicyState policy_init(const PolicyConfig& cfg, Eigen::Index dim);

/// Lowest-index argmax.
std::size_t argmax_index(const Eigen::VectorXd& scores);

std::size_t uniform_select(const ArmSet& armset, Rng& rng);
std::size_t eps_greedy_select(const PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg,
                              Rng& rng);
std::size_t linucb_select(const PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg);
std::size_t lints_select(const PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg,
                         Rng& rng);

/// Sampler target for beta_t * L_t over `hist`. `precond` may be null.
Target make_posterior_target(const LikelihoodSpec& spec, const History& hist, std::size_t t,
                             const DesignState* precond);

/// Step size for round t: scale / lambda (LMC, MALA) or scale / sqrt(lambda)
/// (HMC, ULMC), lambda an upper bound on the (preconditioned) Hessian of
/// beta_t * L_t. Updates state.power_guess.
double auto_step_size(PolicyState& state, const PolicyConfig& cfg, std::size_t t);

struct McmcRound {
  std::size_t arm = 0;
  SamplerState chain;
};

/// Advances the carried chain K_t steps (K after new data, K' otherwise) and
/// plays the greedy arm under the final position. `state` is left untouched
/// apart from the curvature warm start; the caller stores the returned chain.
McmcRound mcmc_ts_round(PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg, Rng& rng,
                        std::size_t t);

void policy_update(PolicyState& state, const PolicyConfig& cfg, const ArmSet& armset,
                   std::size_t chosen, double reward);

/// Anything the harness can run: pick an arm, then learn from the reward.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual std::size_t select(const ArmSet& armset, std::size_t t) = 0;
  virtual void update(const ArmSet& armset, std::size_t chosen, double reward) = 0;
};

/// Agent wrapping one PolicyConfig with its own seeded policy and sampler streams.
class Policy final : public Agent {
 public:
  Policy(PolicyConfig cfg, Eigen::Index dim, std::size_t horizon, std::uint64_t seed);

  std::string name() const override { return policy_display_name(cfg_); }
  std::size_t select(const ArmSet& armset, std::size_t t) override;
  void update(const ArmSet& armset, std::size_t chosen, double reward) override;

  const PolicyState& state() const { return state_; }
  const PolicyConfig& config() const { return cfg_; }

 private:
  PolicyConfig cfg_;
  PolicyState state_;
  Rng policy_rng_;
  Rng sampler_rng_;
};

}  // namespace fgbench
