#include "fgbench/policies.hpp"

#include <cmath>
#include <stdexcept>

#include "fgbench/errors.hpp"

namespace fgbench {

void PolicyConfig::validate() const {
  if (!(reg > 0.0)) throw std::invalid_argument("policy: reg must be positive");
  switch (kind) {
    case PolicyKind::kUniform:
      break;
    case PolicyKind::kEpsGreedy:
      if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("policy: eps must lie in [0, 1]");
      break;
    case PolicyKind::kLinUCB:
      if (!(alpha >= 0.0)) throw std::invalid_argument("policy: alpha must be >= 0");
      break;
    case PolicyKind::kLinTS:
      if (!(ts_scale >= 0.0)) throw std::invalid_argument("policy: ts_scale must be >= 0");
      break;
    case PolicyKind::kMcmcTS:
      likelihood.validate();
      sampler.validate();
      if (step_scale && !(*step_scale > 0.0)) throw std::invalid_argument("policy: step_scale must be positive");
      break;
  }
}

std::string policy_display_name(const PolicyConfig& cfg) {
  if (!cfg.name.empty()) return cfg.name;
  switch (cfg.kind) {
    case PolicyKind::kUniform:
      return "Uniform";
    case PolicyKind::kEpsGreedy:
      return "EpsGreedy";
    case PolicyKind::kLinUCB:
      return "LinUCB";
    case PolicyKind::kLinTS:
      return "LinTS";
    case PolicyKind::kMcmcTS:
      break;
  }
  std::string out;
  if (cfg.sampler.precondition) out += "P";
  if (cfg.sampler.kind == SamplerKind::kULMC) out += "U";
  if (cfg.likelihood.kind == LikelihoodKind::kFG) out += "FG";
  if (cfg.likelihood.kind == LikelihoodKind::kSFG) out += "SFG";
  if (cfg.sampler.svrg) out += "SVRG";
  switch (cfg.sampler.kind) {
    case SamplerKind::kLMC:
    case SamplerKind::kULMC:
      out += "LMC";
      break;
    case SamplerKind::kMALA:
      out += "MALA";
      break;
    case SamplerKind::kHMC:
      out += "HMC";
      break;
  }
  return out + "TS";
}

double default_step_scale(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kHMC:
      return 0.2;
    case SamplerKind::kULMC:
      return 0.1;
    default:
      return 0.01;
  }
}

PolicyState policy_init(const PolicyConfig& cfg, Eigen::Index dim) {
  cfg.validate();
  if (dim < 1) throw std::invalid_argument("policy: feature dimension must be >= 1");
  PolicyState s;
  const bool linear = cfg.kind == PolicyKind::kEpsGreedy || cfg.kind == PolicyKind::kLinUCB ||
                      cfg.kind == PolicyKind::kLinTS;
  if (linear) s.design = design_init(dim, cfg.reg);
  if (cfg.kind == PolicyKind::kMcmcTS) {
    s.history.emplace(dim, cfg.likelihood.kind == LikelihoodKind::kSFG);
    s.chain = SamplerState::init(Eigen::VectorXd::Zero(dim), cfg.sampler.kind);
    if (cfg.sampler.precondition) s.design = design_init(dim, cfg.reg);
  }
  return s;
}

std::size_t argmax_index(const Eigen::VectorXd& scores) {
  if (scores.size() == 0) throw std::invalid_argument("argmax over an empty arm set");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

namespace {

void check_armset(const ArmSet& armset, Eigen::Index dim) {
  if (armset.size() == 0) throw std::invalid_argument("empty arm set");
  if (armset.dim() != dim) {
    throw std::invalid_argument("arm dimension " + std::to_string(armset.dim()) +
                                " != policy dimension " + std::to_string(dim));
  }
}

const DesignState& require_design(const PolicyState& state) {
  if (!state.design) throw std::logic_error("policy state has no design matrix");
  return *state.design;
}

}  // namespace

std::size_t uniform_select(const ArmSet& armset, Rng& rng) {
  if (armset.size() == 0) throw std::invalid_argument("empty arm set");
  return uniform_index(rng, armset.size());
}

std::size_t eps_greedy_select(const PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg,
                              Rng& rng) {
  const auto& ds = require_design(state);
  check_armset(armset, ds.dim);
  double eps = cfg.eps;
  if (cfg.eps_decay) eps /= static_cast<double>(state.rounds_seen + 1);
  if (eps > 0.0 && uniform01(rng) < eps) return uniform_select(armset, rng);
  return argmax_index(armset.arms * ridge_estimate(ds));
}

std::size_t linucb_select(const PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg) {
  const auto& ds = require_design(state);
  check_armset(armset, ds.dim);
  Eigen::VectorXd scores = armset.arms * ridge_estimate(ds);
  if (cfg.alpha != 0.0) {
    for (std::size_t i = 0; i < armset.size(); ++i) {
      scores[static_cast<Eigen::Index>(i)] += cfg.alpha * ucb_width(ds, armset.arm(i));
    }
  }
  return argmax_index(scores);
}

std::size_t lints_select(const PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg,
                         Rng& rng) {
  const auto& ds = require_design(state);
  check_armset(armset, ds.dim);
  const Eigen::VectorXd eps = standard_normal(rng, ds.dim);
  const Eigen::VectorXd theta = ridge_estimate(ds) + std::sqrt(cfg.ts_scale) * whiten(ds, eps);
  return argmax_index(armset.arms * theta);
}

Target make_posterior_target(const LikelihoodSpec& spec, const History& hist, std::size_t t,
                             const DesignState* precond) {
  Target target;
  target.potential = [&spec, &hist, t](const Eigen::VectorXd& th) { return loss_eval(spec, th, hist, t); };
  target.gradient = [&spec, &hist, t](const Eigen::VectorXd& th) { return loss_grad(spec, th, hist, t); };
  target.num_terms = hist.size();
  const double beta = beta_at(spec.beta, t);
  target.term_gradient = [&spec, &hist, beta](std::size_t i, const Eigen::VectorXd& th) {
    return Eigen::VectorXd(beta * entry_grad(spec, th, hist[i]));
  };
  target.prior_gradient = [&spec, beta](const Eigen::VectorXd& th) {
    return Eigen::VectorXd(beta * prior_grad(spec, th));
  };
  target.precond = precond;
  return target;
}

double auto_step_size(PolicyState& state, const PolicyConfig& cfg, std::size_t t) {
  const auto& spec = cfg.likelihood;
  const double beta = beta_at(spec.beta, t);
  double lambda = 0.0;
  if (cfg.sampler.precondition) {
    lambda = beta * std::max(2.0 * spec.eta, spec.prior_precision() / cfg.reg);
  } else {
    double top = 0.0;
    if (state.history && !state.history->empty()) {
      top = max_eigenvalue_psd(state.history->gram(), state.power_guess);
    }
    lambda = beta * (2.0 * spec.eta * top + spec.prior_precision());
  }
  if (!(lambda > 0.0)) {
    throw NumericDegeneracyError("automatic step size: target has no curvature; set sampler.step");
  }
  const double scale = cfg.step_scale.value_or(default_step_scale(cfg.sampler.kind));
  const bool second_order =
      cfg.sampler.kind == SamplerKind::kHMC || cfg.sampler.kind == SamplerKind::kULMC;
  return second_order ? scale / std::sqrt(lambda) : scale / lambda;
}

McmcRound mcmc_ts_round(PolicyState& state, const ArmSet& armset, const PolicyConfig& cfg, Rng& rng,
                        std::size_t t) {
  if (!state.history || !state.chain) throw std::logic_error("McmcTS state not initialized");
  check_armset(armset, state.history->dim());
  SamplerConfig sc = cfg.sampler;
  if (cfg.auto_step) sc.step = auto_step_size(state, cfg, t);
  const std::size_t steps = state.new_data ? sc.inner_steps : sc.inner_steps_stale;
  state.last_inner_steps = steps;
  state.last_step = sc.step;
  const DesignState* precond = sc.precondition ? &require_design(state) : nullptr;
  const Target target = make_posterior_target(cfg.likelihood, *state.history, t, precond);
  McmcRound out;
  out.chain = run_chain(*state.chain, steps, target, sc, rng);
  out.arm = argmax_index(armset.arms * out.chain.theta);
  return out;
}

void policy_update(PolicyState& state, const PolicyConfig& cfg, const ArmSet& armset,
                   std::size_t chosen, double reward) {
  if (chosen >= armset.size()) throw std::invalid_argument("policy_update: arm out of range");
  if (state.design) {
    if (armset.dim() != state.design->dim) {
      throw std::invalid_argument("policy_update: feature dimension mismatch");
    }
    design_update(*state.design, armset.arm(chosen), reward);
  }
  if (cfg.kind == PolicyKind::kMcmcTS) {
    state.history->append(armset, chosen, reward);
    state.new_data = true;
  }
  ++state.rounds_seen;
}

// ------------------------------------------------------------------ agent

Policy::Policy(PolicyConfig cfg, Eigen::Index dim, std::size_t horizon, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      policy_rng_(make_stream(seed, Stream::kPolicy)),
      sampler_rng_(make_stream(seed, Stream::kSampler)) {
  cfg_.likelihood.beta.dim = static_cast<int>(dim);
  cfg_.likelihood.beta.horizon = std::max<std::size_t>(horizon, 1);
  state_ = policy_init(cfg_, dim);
}

std::size_t Policy::select(const ArmSet& armset, std::size_t t) {
  switch (cfg_.kind) {
    case PolicyKind::kUniform:
      return uniform_select(armset, policy_rng_);
    case PolicyKind::kEpsGreedy:
      return eps_greedy_select(state_, armset, cfg_, policy_rng_);
    case PolicyKind::kLinUCB:
      return linucb_select(state_, armset, cfg_);
    case PolicyKind::kLinTS:
      return lints_select(state_, armset, cfg_, policy_rng_);
    case PolicyKind::kMcmcTS: {
      McmcRound r = mcmc_ts_round(state_, armset, cfg_, sampler_rng_, t);
      state_.chain = std::move(r.chain);
      state_.new_data = false;
      return r.arm;
    }
  }
  return 0;
}

void Policy::update(const ArmSet& armset, std::size_t chosen, double reward) {
  policy_update(state_, cfg_, armset, chosen, reward);
}

}  // namespace fgbench
