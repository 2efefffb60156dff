#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fgbench/rng.hpp"

namespace fgbench {

// Arm indices are 0-based throughout the library: wheel arm a1 is index 0.

/// One round's decision set. Row i of `arms` is arm i's feature vector.
struct ArmSet {
  Eigen::MatrixXd arms;
  std::size_t round = 0;
  Eigen::VectorXd context;  // raw context the arms were built from
  std::int64_t row = -1;    // dataset row, -1 for synthetic environments

  std::size_t size() const { return static_cast<std::size_t>(arms.rows()); }
  Eigen::Index dim() const { return arms.cols(); }
  Eigen::VectorXd arm(std::size_t i) const { return arms.row(static_cast<Eigen::Index>(i)).transpose(); }
};

/// Zero vector of length len(c)*K with block `arm` equal to c.
Eigen::VectorXd block_feature_map(const Eigen::VectorXd& c, std::size_t arm, std::size_t num_arms);

/// K x (len(c)*K) matrix whose row i is block_feature_map(c, i, K).
Eigen::MatrixXd block_arm_matrix(const Eigen::VectorXd& c, std::size_t num_arms);

class Environment {
 public:
  explicit Environment(std::size_t horizon) : horizon_(horizon) {}
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index feature_dim() const = 0;
  virtual std::size_t num_arms() const = 0;

  /// Next round's arms; std::nullopt once the horizon is exhausted.
  std::optional<ArmSet> observe(Rng& rng);

  /// Stochastic reward for pulling `chosen`.
  double reward(const ArmSet& armset, std::size_t chosen, Rng& rng);

  /// Expected reward of `chosen` given the round's arm set.
  virtual double mean_reward(const ArmSet& armset, std::size_t chosen) const = 0;

  /// Best expected reward among the arms.
  virtual double optimal_mean(const ArmSet& armset) const;

  std::size_t horizon() const { return horizon_; }
  std::size_t rounds_consumed() const { return consumed_; }

 protected:
  virtual ArmSet draw_arms(Rng& rng) = 0;
  virtual double draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) = 0;
  void check_arm(const ArmSet& armset, std::size_t chosen) const;

 private:
  std::size_t horizon_;
  std::size_t consumed_ = 0;
};

// ---------------------------------------------------------------- linear

enum class ThetaStarMode {
  kUnitNorm,  // N(0, I) scaled to unit norm
  kPrior,     // N(0, prior_sd^2 I)
};

struct LinearEnvConfig {
  int context_dim = 4;
  int num_arms = 5;
  double noise_sd = 0.5;
  double prior_sd = 0.01;
  ThetaStarMode theta_mode = ThetaStarMode::kUnitNorm;
  std::optional<Eigen::VectorXd> theta_star;

  int param_dim() const { return context_dim * num_arms; }
};

class LinearEnv final : public Environment {
 public:
  LinearEnv(LinearEnvConfig cfg, std::size_t horizon, Rng& setup_rng);

  std::string name() const override;
  Eigen::Index feature_dim() const override { return cfg_.param_dim(); }
  std::size_t num_arms() const override { return static_cast<std::size_t>(cfg_.num_arms); }
  double mean_reward(const ArmSet& armset, std::size_t chosen) const override;
  double optimal_mean(const ArmSet& armset) const override;

  const Eigen::VectorXd& theta_star() const { return theta_star_; }
  const LinearEnvConfig& config() const { return cfg_; }

 protected:
  ArmSet draw_arms(Rng& rng) override;
  double draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) override;

 private:
  LinearEnvConfig cfg_;
  Eigen::VectorXd theta_star_;
};

// -------------------------------------------------------------- logistic

struct LogisticEnvConfig {
  int dim = 20;
  int num_arms = 50;
  std::optional<Eigen::VectorXd> theta_star;  // normalized to unit norm when supplied
};

double logistic(double u);

class LogisticEnv final : public Environment {
 public:
  LogisticEnv(LogisticEnvConfig cfg, std::size_t horizon, Rng& setup_rng);

  std::string name() const override;
  Eigen::Index feature_dim() const override { return cfg_.dim; }
  std::size_t num_arms() const override { return static_cast<std::size_t>(cfg_.num_arms); }
  double mean_reward(const ArmSet& armset, std::size_t chosen) const override;
  double optimal_mean(const ArmSet& armset) const override;

  const Eigen::VectorXd& theta_star() const { return theta_star_; }

 protected:
  ArmSet draw_arms(Rng& rng) override;
  double draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) override;

 private:
  LogisticEnvConfig cfg_;
  Eigen::VectorXd theta_star_;
};

// ----------------------------------------------------------------- wheel

struct WheelEnvConfig {
  double delta = 0.5;
  double mu1 = 1.2;
  double mu2 = 1.0;
  double mu3 = 50.0;
  double noise_sd = 0.01;
};

/// Optimal arm for wheel context X: 0 inside the disk of radius delta
/// (boundary included), else 1..4 for quadrants (+,+), (+,-), (-,-), (-,+).
/// A zero coordinate counts as positive.
std::size_t wheel_optimal_action(const Eigen::Vector2d& x, double delta);

/// Samples X uniformly on the unit disk.
Eigen::Vector2d sample_unit_disk(Rng& rng);

class WheelEnv final : public Environment {
 public:
  static constexpr std::size_t kArms = 5;

  WheelEnv(WheelEnvConfig cfg, std::size_t horizon);

  std::string name() const override;
  Eigen::Index feature_dim() const override { return 2 * kArms; }
  std::size_t num_arms() const override { return kArms; }
  double mean_reward(const ArmSet& armset, std::size_t chosen) const override;
  double optimal_mean(const ArmSet& armset) const override;

  const WheelEnvConfig& config() const { return cfg_; }

 protected:
  ArmSet draw_arms(Rng& rng) override;
  double draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) override;

 private:
  WheelEnvConfig cfg_;
};

// --------------------------------------------------------------- dataset

enum class ColumnRole { kNumeric, kCategorical, kLabel, kArmReward, kIgnore };

enum class RewardScheme {
  kOneHot,    // 1 for the label arm, 0 otherwise
  kMushroom,  // arm 0 = eat, arm 1 = abstain; +5 safe, +5/-35 poisonous
};

struct DatasetSchema {
  std::vector<ColumnRole> columns;
  bool header = false;
  char delimiter = ',';
  RewardScheme scheme = RewardScheme::kOneHot;
  std::string poisonous_label = "p";
};

/// Parses "num,cat*3,label" style descriptors (`*n` repeats a role).
std::vector<ColumnRole> parse_column_roles(const std::string& spec);

struct DatasetTable {
  Eigen::MatrixXd features;       // rows x d, categorical columns one-hot encoded
  Eigen::MatrixXd mean_rewards;   // rows x N expected reward per arm
  std::vector<std::uint8_t> poisonous;  // mushroom scheme only
  std::vector<std::string> arm_labels;
  RewardScheme scheme = RewardScheme::kOneHot;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  Eigen::Index feature_dim() const { return features.cols(); }
  std::size_t num_arms() const { return static_cast<std::size_t>(mean_rewards.cols()); }
};

DatasetTable load_dataset(const std::string& path, const DatasetSchema& schema);
DatasetTable parse_dataset(std::istream& in, const DatasetSchema& schema);

class DatasetEnv final : public Environment {
 public:
  /// horizon 0 means one pass over the rows.
  DatasetEnv(std::shared_ptr<const DatasetTable> table, std::uint64_t seed, std::size_t horizon,
             std::string name = "dataset");

  std::string name() const override { return name_; }
  Eigen::Index feature_dim() const override {
    return table_->feature_dim() * static_cast<Eigen::Index>(table_->num_arms());
  }
  std::size_t num_arms() const override { return table_->num_arms(); }
  double mean_reward(const ArmSet& armset, std::size_t chosen) const override;
  double optimal_mean(const ArmSet& armset) const override;

  const std::vector<std::size_t>& order() const { return order_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t passes() const { return passes_; }
  const DatasetTable& table() const { return *table_; }

 protected:
  ArmSet draw_arms(Rng& rng) override;
  double draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) override;

 private:
  void reshuffle();

  std::shared_ptr<const DatasetTable> table_;
  std::string name_;
  Rng shuffle_rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t passes_ = 0;
};

DatasetEnv load_dataset_env(const std::string& path, const DatasetSchema& schema,
                            std::uint64_t seed, std::size_t horizon = 0);

// --------------------------------------------------------------- factory

struct DatasetEnvConfig {
  std::string path;
  std::string name = "dataset";
  DatasetSchema schema;
};

using EnvConfig = std::variant<LinearEnvConfig, LogisticEnvConfig, WheelEnvConfig, DatasetEnvConfig>;

std::string env_name(const EnvConfig& cfg);

/// Builds seeded environments from one config. Dataset files are parsed once
/// at construction and shared read-only between the environments it makes.
class EnvironmentFactory {
 public:
  explicit EnvironmentFactory(EnvConfig cfg);

  std::unique_ptr<Environment> make(std::size_t horizon, std::uint64_t seed) const;
  const EnvConfig& config() const { return cfg_; }

 private:
  EnvConfig cfg_;
  std::shared_ptr<const DatasetTable> table_;
};

}  // namespace fgbench
