#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "fgbench/environments.hpp"

namespace fgbench {

enum class LikelihoodKind { kTS, kFG, kSFG };

enum class BetaKind {
  kConstant,  // beta_t = beta0
  kDLogT,     // 1/beta_t grows like d log t, reaching d log T / beta0 at t = T
};

struct BetaSchedule {
  BetaKind kind = BetaKind::kConstant;
  double beta0 = 1.0;
  int dim = 1;
  std::size_t horizon = 1;
};

/// Inverse temperature at round t (1-based, t <= horizon).
double beta_at(const BetaSchedule& sched, std::size_t t);

/// TS / feel-good / smoothed feel-good objective over a linear reward model.
///
/// The feel-good weight is `lambda_fg`; the ridge weight of the linear
/// baselines lives in DesignState::reg and never appears here. The Gaussian
/// prior contributes |theta|^2 / (2 prior_sd^2); prior_sd = +inf disables it.
struct LikelihoodSpec {
  LikelihoodKind kind = LikelihoodKind::kTS;
  double eta = 1.0;
  double lambda_fg = 0.0;
  double cap = 1000.0;
  double smooth = 10.0;
  double prior_sd = 1.0;
  BetaSchedule beta;

  void validate() const;
  double prior_precision() const;
  bool has_bonus() const { return kind != LikelihoodKind::kTS && lambda_fg != 0.0; }
};

struct HistoryEntry {
  Eigen::MatrixXd arms;  // empty when the history does not keep arm sets
  Eigen::VectorXd x;
  std::size_t chosen = 0;
  double reward = 0.0;
};

/// Observed (arm set, chosen arm, reward) triples in round order, plus the
/// running sums the quadratic part of every loss needs.
class History {
 public:
  explicit History(Eigen::Index dim, bool keep_arm_sets = true);

  void append(const ArmSet& armset, std::size_t chosen, double reward);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Eigen::Index dim() const { return dim_; }
  bool keeps_arm_sets() const { return keep_arm_sets_; }
  const HistoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<HistoryEntry>& entries() const { return entries_; }

  const Eigen::MatrixXd& gram() const { return gram_; }          // sum x x^T
  const Eigen::VectorXd& response() const { return response_; }  // sum r x
  const Eigen::VectorXd& feature_sum() const { return feature_sum_; }
  double reward_sq() const { return reward_sq_; }
  double max_feature_norm() const { return max_norm_; }

 private:
  void absorb(HistoryEntry entry);

  Eigen::Index dim_;
  bool keep_arm_sets_;
  std::vector<HistoryEntry> entries_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd response_;
  Eigen::VectorXd feature_sum_;
  double reward_sq_ = 0.0;
  double max_norm_ = 0.0;

  friend History concat(const History& a, const History& b);
};

History concat(const History& a, const History& b);

/// log(1 + exp(s u)) / s without overflow.
double softplus_smooth(double u, double s);

/// Unscaled data term of one history entry (no prior, no beta).
double entry_loss(const LikelihoodSpec& spec, const Eigen::VectorXd& theta, const HistoryEntry& e);
Eigen::VectorXd entry_grad(const LikelihoodSpec& spec, const Eigen::VectorXd& theta,
                           const HistoryEntry& e);

/// beta_t * (sum of entry losses + prior).
double loss_eval(const LikelihoodSpec& spec, const Eigen::VectorXd& theta, const History& hist,
                 std::size_t t);

/// Gradient of loss_eval.
Eigen::VectorXd loss_grad(const LikelihoodSpec& spec, const Eigen::VectorXd& theta,
                          const History& hist, std::size_t t);

/// Unscaled prior term and its gradient.
double prior_loss(const LikelihoodSpec& spec, const Eigen::VectorXd& theta);
Eigen::VectorXd prior_grad(const LikelihoodSpec& spec, const Eigen::VectorXd& theta);

}  // namespace fgbench
