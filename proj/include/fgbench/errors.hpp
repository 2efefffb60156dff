#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fgbench {

/// A quadratic form that should be non-negative came out clearly negative.
class NumericDegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Markov chain produced a non-finite gradient or position.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Eigen::VectorXd theta,
                  std::size_t inner_step = 0)
      : std::runtime_error(what), theta_(std::move(theta)), inner_step_(inner_step) {}

  const Eigen::VectorXd& theta() const { return theta_; }
  std::size_t inner_step() const { return inner_step_; }

 private:
  Eigen::VectorXd theta_;
  std::size_t inner_step_;
};

/// Internal sampler bookkeeping is inconsistent (e.g. SVRG without a snapshot).
class SamplerStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A dataset line failed to parse.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Column layout does not match the declared schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration file or override is malformed.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Aborted experiment run; names the policy, seed and round that failed.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& policy, std::uint64_t seed, std::size_t round,
           const std::string& cause)
      : std::runtime_error("run failed: policy=" + policy + " seed=" + std::to_string(seed) +
                           " round=" + std::to_string(round) + ": " + cause),
        policy_(policy),
        seed_(seed),
        round_(round) {}

  const std::string& policy() const { return policy_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t round() const { return round_; }

 private:
  std::string policy_;
  std::uint64_t seed_;
  std::size_t round_;
};

}  // namespace fgbench
