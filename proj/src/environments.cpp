#include "fgbench/environments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fgbench {

Eigen::VectorXd block_feature_map(const Eigen::VectorXd& c, std::size_t arm, std::size_t num_arms) {
  if (num_arms == 0 || arm >= num_arms) {
    throw std::invalid_argument("block_feature_map: arm " + std::to_string(arm) +
                                " out of range for " + std::to_string(num_arms) + " arms");
  }
  const Eigen::Index m = c.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m * static_cast<Eigen::Index>(num_arms));
  out.segment(static_cast<Eigen::Index>(arm) * m, m) = c;
  return out;
}

Eigen::MatrixXd block_arm_matrix(const Eigen::VectorXd& c, std::size_t num_arms) {
  const Eigen::Index m = c.size();
  const auto k = static_cast<Eigen::Index>(num_arms);
  Eigen::MatrixXd arms = Eigen::MatrixXd::Zero(k, m * k);
  for (Eigen::Index i = 0; i < k; ++i) arms.block(i, i * m, 1, m) = c.transpose();
  return arms;
}

// ------------------------------------------------------------- base class

std::optional<ArmSet> Environment::observe(Rng& rng) {
  if (consumed_ >= horizon_) return std::nullopt;
  ArmSet set = draw_arms(rng);
  set.round = ++consumed_;
  return set;
}

double Environment::reward(const ArmSet& armset, std::size_t chosen, Rng& rng) {
  check_arm(armset, chosen);
  return draw_reward(armset, chosen, rng);
}

double Environment::optimal_mean(const ArmSet& armset) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < armset.size(); ++i) best = std::max(best, mean_reward(armset, i));
  return best;
}

void Environment::check_arm(const ArmSet& armset, std::size_t chosen) const {
  if (chosen >= armset.size()) {
    throw std::invalid_argument("arm index " + std::to_string(chosen) + " out of range for " +
                                std::to_string(armset.size()) + " arms");
  }
}

// ----------------------------------------------------------------- linear

LinearEnv::LinearEnv(LinearEnvConfig cfg, std::size_t horizon, Rng& setup_rng)
    : Environment(horizon), cfg_(std::move(cfg)) {
  if (cfg_.context_dim < 1 || cfg_.num_arms < 1) {
    throw std::invalid_argument("LinearEnv: context_dim and num_arms must be positive");
  }
  if (!(cfg_.noise_sd >= 0.0)) throw std::invalid_argument("LinearEnv: noise_sd must be >= 0");
  if (cfg_.theta_star) {
    if (cfg_.theta_star->size() != cfg_.param_dim()) {
      throw std::invalid_argument("LinearEnv: theta_star length must equal context_dim * num_arms");
    }
    theta_star_ = *cfg_.theta_star;
  } else if (cfg_.theta_mode == ThetaStarMode::kPrior) {
    theta_star_ = cfg_.prior_sd * standard_normal(setup_rng, cfg_.param_dim());
  } else {
    theta_star_ = standard_normal(setup_rng, cfg_.param_dim());
    theta_star_ /= theta_star_.norm();
  }
}

std::string LinearEnv::name() const { return "linear-" + std::to_string(cfg_.param_dim()) + "d"; }

ArmSet LinearEnv::draw_arms(Rng& rng) {
  ArmSet set;
  set.context = standard_normal(rng, cfg_.context_dim);
  set.arms = block_arm_matrix(set.context, num_arms());
  return set;
}

double LinearEnv::mean_reward(const ArmSet& armset, std::size_t chosen) const {
  check_arm(armset, chosen);
  return armset.arms.row(static_cast<Eigen::Index>(chosen)).dot(theta_star_);
}

double LinearEnv::optimal_mean(const ArmSet& armset) const {
  return (armset.arms * theta_star_).maxCoeff();
}

double LinearEnv::draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  return mean_reward(armset, chosen) + cfg_.noise_sd * noise(rng);
}

// --------------------------------------------------------------- logistic

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

LogisticEnv::LogisticEnv(LogisticEnvConfig cfg, std::size_t horizon, Rng& setup_rng)
    : Environment(horizon), cfg_(std::move(cfg)) {
  if (cfg_.dim < 1 || cfg_.num_arms < 1) {
    throw std::invalid_argument("LogisticEnv: dim and num_arms must be positive");
  }
  if (cfg_.theta_star) {
    if (cfg_.theta_star->size() != cfg_.dim) {
      throw std::invalid_argument("LogisticEnv: theta_star length must equal dim");
    }
    theta_star_ = *cfg_.theta_star;
  } else {
    theta_star_ = standard_normal(setup_rng, cfg_.dim);
  }
  const double norm = theta_star_.norm();
  if (norm > 0.0) theta_star_ /= norm;
}

std::string LogisticEnv::name() const { return "logistic-" + std::to_string(cfg_.dim) + "d"; }

ArmSet LogisticEnv::draw_arms(Rng& rng) {
  ArmSet set;
  set.arms.resize(cfg_.num_arms, cfg_.dim);
  for (int a = 0; a < cfg_.num_arms; ++a) {
    Eigen::VectorXd x = standard_normal(rng, cfg_.dim);
    set.arms.row(a) = (x / x.norm()).transpose();
  }
  return set;
}

double LogisticEnv::mean_reward(const ArmSet& armset, std::size_t chosen) const {
  check_arm(armset, chosen);
  return logistic(armset.arms.row(static_cast<Eigen::Index>(chosen)).dot(theta_star_));
}

double LogisticEnv::optimal_mean(const ArmSet& armset) const {
  return logistic((armset.arms * theta_star_).maxCoeff());
}

double LogisticEnv::draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) {
  return uniform01(rng) < mean_reward(armset, chosen) ? 1.0 : 0.0;
}

// ------------------------------------------------------------------ wheel

std::size_t wheel_optimal_action(const Eigen::Vector2d& x, double delta) {
  if (x.norm() <= delta) return 0;
  const bool east = x[0] >= 0.0;
  const bool north = x[1] >= 0.0;
  if (east && north) return 1;
  if (east) return 2;
  if (!north) return 3;
  return 4;
}

Eigen::Vector2d sample_unit_disk(Rng& rng) {
  const double r = std::sqrt(uniform01(rng));
  const double angle = 2.0 * std::numbers::pi * uniform01(rng);
  return {r * std::cos(angle), r * std::sin(angle)};
}

WheelEnv::WheelEnv(WheelEnvConfig cfg, std::size_t horizon)
    : Environment(horizon), cfg_(cfg) {
  if (!(cfg_.delta > 0.0 && cfg_.delta < 1.0)) {
    throw std::invalid_argument("WheelEnv: delta must lie in (0, 1)");
  }
  if (!(cfg_.mu2 < cfg_.mu1 && cfg_.mu1 < cfg_.mu3)) {
    throw std::invalid_argument("WheelEnv: requires mu2 < mu1 < mu3");
  }
}

std::string WheelEnv::name() const {
  std::ostringstream os;
  os << "wheel-d" << cfg_.delta;
  return os.str();
}

ArmSet WheelEnv::draw_arms(Rng& rng) {
  ArmSet set;
  set.context = sample_unit_disk(rng);
  set.arms = block_arm_matrix(set.context, kArms);
  return set;
}

double WheelEnv::mean_reward(const ArmSet& armset, std::size_t chosen) const {
  check_arm(armset, chosen);
  if (chosen == 0) return cfg_.mu1;
  const Eigen::Vector2d x = armset.context.head<2>();
  if (x.norm() > cfg_.delta && wheel_optimal_action(x, cfg_.delta) == chosen) return cfg_.mu3;
  return cfg_.mu2;
}

double WheelEnv::optimal_mean(const ArmSet& armset) const {
  return armset.context.head<2>().norm() <= cfg_.delta ? cfg_.mu1 : cfg_.mu3;
}

double WheelEnv::draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  return mean_reward(armset, chosen) + cfg_.noise_sd * noise(rng);
}

// ---------------------------------------------------------------- factory

std::string env_name(const EnvConfig& cfg) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LinearEnvConfig>) {
          return "linear-" + std::to_string(c.param_dim()) + "d";
        } else if constexpr (std::is_same_v<T, LogisticEnvConfig>) {
          return "logistic-" + std::to_string(c.dim) + "d";
        } else if constexpr (std::is_same_v<T, WheelEnvConfig>) {
          std::ostringstream os;
          os << "wheel-d" << c.delta;
          return os.str();
        } else {
          return c.name;
        }
      },
      cfg);
}

EnvironmentFactory::EnvironmentFactory(EnvConfig cfg) : cfg_(std::move(cfg)) {
  if (const auto* ds = std::get_if<DatasetEnvConfig>(&cfg_)) {
    table_ = std::make_shared<const DatasetTable>(load_dataset(ds->path, ds->schema));
  }
}

std::unique_ptr<Environment> EnvironmentFactory::make(std::size_t horizon, std::uint64_t seed) const {
  Rng setup = make_stream(seed, Stream::kEnvSetup);
  return std::visit(
      [&](const auto& c) -> std::unique_ptr<Environment> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LinearEnvConfig>) {
          return std::make_unique<LinearEnv>(c, horizon, setup);
        } else if constexpr (std::is_same_v<T, LogisticEnvConfig>) {
          return std::make_unique<LogisticEnv>(c, horizon, setup);
        } else if constexpr (std::is_same_v<T, WheelEnvConfig>) {
          return std::make_unique<WheelEnv>(c, horizon);
        } else {
          return std::make_unique<DatasetEnv>(table_, seed, horizon, c.name);
        }
      },
      cfg_);
}

}  // namespace fgbench
