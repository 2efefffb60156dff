#include "fgbench/likelihoods.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgbench {

double beta_at(const BetaSchedule& sched, std::size_t t) {
  if (t < 1 || t > sched.horizon) {
    throw std::invalid_argument("beta_at: round " + std::to_string(t) + " outside [1, " +
                                std::to_string(sched.horizon) + "]");
  }
  if (sched.kind == BetaKind::kConstant) return sched.beta0;
  const double horizon = static_cast<double>(std::max<std::size_t>(sched.horizon, 2));
  const double inv = static_cast<double>(sched.dim) * std::log(horizon) *
                     std::log(static_cast<double>(t) + 1.0) /
                     (sched.beta0 * std::log(horizon + 1.0));
  return 1.0 / inv;
}

void LikelihoodSpec::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("likelihood: eta must be positive");
  if (!(lambda_fg >= 0.0)) throw std::invalid_argument("likelihood: lambda_fg must be >= 0");
  if (!(prior_sd > 0.0)) throw std::invalid_argument("likelihood: prior_sd must be positive");
  if (!(smooth > 0.0)) throw std::invalid_argument("likelihood: smooth must be positive");
  if (!(beta.beta0 > 0.0) || beta.dim < 1 || beta.horizon < 1) {
    throw std::invalid_argument("likelihood: invalid beta schedule");
  }
}

double LikelihoodSpec::prior_precision() const {
  if (std::isinf(prior_sd)) return 0.0;
  return 1.0 / (prior_sd * prior_sd);
}

// ------------------------------------------------------------------ history

History::History(Eigen::Index dim, bool keep_arm_sets)
    : dim_(dim),
      keep_arm_sets_(keep_arm_sets),
      gram_(Eigen::MatrixXd::Zero(dim, dim)),
      response_(Eigen::VectorXd::Zero(dim)),
      feature_sum_(Eigen::VectorXd::Zero(dim)) {}

void History::append(const ArmSet& armset, std::size_t chosen, double reward) {
  if (chosen >= armset.size()) throw std::invalid_argument("History::append: arm out of range");
  if (armset.dim() != dim_) {
    throw std::invalid_argument("History::append: feature dimension " +
                                std::to_string(armset.dim()) + " != " + std::to_string(dim_));
  }
  HistoryEntry e;
  e.x = armset.arm(chosen);
  e.chosen = chosen;
  e.reward = reward;
  if (keep_arm_sets_) e.arms = armset.arms;
  absorb(std::move(e));
}

void History::absorb(HistoryEntry e) {
  gram_.noalias() += e.x * e.x.transpose();
  response_.noalias() += e.reward * e.x;
  feature_sum_ += e.x;
  reward_sq_ += e.reward * e.reward;
  max_norm_ = std::max(max_norm_, e.x.norm());
  entries_.push_back(std::move(e));
}

History concat(const History& a, const History& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("concat: dimension mismatch");
  History out(a.dim(), a.keeps_arm_sets() && b.keeps_arm_sets());
  for (const auto& e : a.entries()) out.absorb(e);
  for (const auto& e : b.entries()) out.absorb(e);
  return out;
}

// ------------------------------------------------------------------ losses

double softplus_smooth(double u, double s) {
  return std::max(u, 0.0) + std::log1p(std::exp(-s * std::abs(u))) / s;
}

namespace {

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

const Eigen::MatrixXd& require_arms(const HistoryEntry& e) {
  if (e.arms.size() == 0) {
    throw std::logic_error("smoothed feel-good loss needs arm sets; history was built without them");
  }
  return e.arms;
}

// Lowest-index argmax of arms * theta.
Eigen::Index best_arm(const Eigen::MatrixXd& arms, const Eigen::VectorXd& theta, double& value) {
  const Eigen::VectorXd scores = arms * theta;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  value = scores[best];
  return best;
}

// Sum over entries of the (unscaled) bonus term: -lambda * sum min(b, x^T theta)
// for FG, -lambda * sum (b - Phi_s(b - f*)) for SFG.
double bonus_value(const LikelihoodSpec& spec, const Eigen::VectorXd& theta, const History& hist) {
  if (spec.kind == LikelihoodKind::kFG) {
    if (hist.max_feature_norm() * theta.norm() < spec.cap) {
      return -spec.lambda_fg * hist.feature_sum().dot(theta);
    }
    double sum = 0.0;
    for (const auto& e : hist.entries()) sum += std::min(spec.cap, e.x.dot(theta));
    return -spec.lambda_fg * sum;
  }
  double sum = 0.0;
  for (const auto& e : hist.entries()) {
    double fstar = 0.0;
    best_arm(require_arms(e), theta, fstar);
    sum += spec.cap - softplus_smooth(spec.cap - fstar, spec.smooth);
  }
  return -spec.lambda_fg * sum;
}

void add_bonus_grad(const LikelihoodSpec& spec, const Eigen::VectorXd& theta, const History& hist,
                    Eigen::VectorXd& grad) {
  if (spec.kind == LikelihoodKind::kFG) {
    if (hist.max_feature_norm() * theta.norm() < spec.cap) {
      grad.noalias() -= spec.lambda_fg * hist.feature_sum();
      return;
    }
    for (const auto& e : hist.entries()) {
      if (e.x.dot(theta) <= spec.cap) grad.noalias() -= spec.lambda_fg * e.x;
    }
    return;
  }
  for (const auto& e : hist.entries()) {
    const auto& arms = require_arms(e);
    double fstar = 0.0;
    const Eigen::Index a = best_arm(arms, theta, fstar);
    const double w = spec.lambda_fg * sigmoid(spec.smooth * (spec.cap - fstar));
    grad.noalias() -= w * arms.row(a).transpose();
  }
}

void check_dim(const Eigen::VectorXd& theta, const History& hist) {
  if (theta.size() != hist.dim()) {
    throw std::invalid_argument("loss: parameter length " + std::to_string(theta.size()) +
                                " != history dimension " + std::to_string(hist.dim()));
  }
}

}  // namespace

double prior_loss(const LikelihoodSpec& spec, const Eigen::VectorXd& theta) {
  return 0.5 * spec.prior_precision() * theta.squaredNorm();
}

Eigen::VectorXd prior_grad(const LikelihoodSpec& spec, const Eigen::VectorXd& theta) {
  return spec.prior_precision() * theta;
}

double entry_loss(const LikelihoodSpec& spec, const Eigen::VectorXd& theta, const HistoryEntry& e) {
  const double fit = e.x.dot(theta);
  double loss = spec.eta * (fit - e.reward) * (fit - e.reward);
  if (!spec.has_bonus()) return loss;
  if (spec.kind == LikelihoodKind::kFG) return loss - spec.lambda_fg * std::min(spec.cap, fit);
  double fstar = 0.0;
  best_arm(require_arms(e), theta, fstar);
  return loss - spec.lambda_fg * (spec.cap - softplus_smooth(spec.cap - fstar, spec.smooth));
}

Eigen::VectorXd entry_grad(const LikelihoodSpec& spec, const Eigen::VectorXd& theta,
                           const HistoryEntry& e) {
  const double fit = e.x.dot(theta);
  Eigen::VectorXd g = (2.0 * spec.eta * (fit - e.reward)) * e.x;
  if (!spec.has_bonus()) return g;
  if (spec.kind == LikelihoodKind::kFG) {
    if (fit <= spec.cap) g.noalias() -= spec.lambda_fg * e.x;
    return g;
  }
  const auto& arms = require_arms(e);
  double fstar = 0.0;
  const Eigen::Index a = best_arm(arms, theta, fstar);
  g.noalias() -= spec.lambda_fg * sigmoid(spec.smooth * (spec.cap - fstar)) * arms.row(a).transpose();
  return g;
}

double loss_eval(const LikelihoodSpec& spec, const Eigen::VectorXd& theta, const History& hist,
                 std::size_t t) {
  check_dim(theta, hist);
  const double beta = beta_at(spec.beta, t);
  double total = prior_loss(spec, theta);
  if (!hist.empty()) {
    const double quad = theta.dot(hist.gram() * theta) - 2.0 * hist.response().dot(theta) +
                        hist.reward_sq();
    total += spec.eta * quad;
    if (spec.has_bonus()) total += bonus_value(spec, theta, hist);
  }
  return beta * total;
}

Eigen::VectorXd loss_grad(const LikelihoodSpec& spec, const Eigen::VectorXd& theta,
                          const History& hist, std::size_t t) {
  check_dim(theta, hist);
  const double beta = beta_at(spec.beta, t);
  Eigen::VectorXd grad = prior_grad(spec, theta);
  if (!hist.empty()) {
    grad.noalias() += (2.0 * spec.eta) * (hist.gram() * theta - hist.response());
    if (spec.has_bonus()) add_bonus_grad(spec, theta, hist, grad);
  }
  return beta * grad;
}

}  // namespace fgbench
