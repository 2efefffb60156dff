#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fgbench/environments.hpp"
#include "fgbench/policies.hpp"

namespace fgbench {

struct ExperimentConfig {
  EnvConfig env = LinearEnvConfig{};
  PolicyConfig policy;
  std::size_t horizon = 10000;
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "results";
  std::size_t record_every = 1;
  std::size_t threads = 1;

  void validate() const;
};

struct RegretTrace {
  std::vector<double> instant;  // per-round pseudo-regret, round t at index t-1
  std::vector<std::size_t> actions;
  std::string env;
  std::string policy;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  std::size_t horizon() const { return instant.size(); }
};

struct AggregateResult {
  std::string env;
  std::string policy;
  std::size_t seeds = 0;
  double mean_final = 0.0;
  double std_final = 0.0;
  double mean_simple = 0.0;  // NaN when T < 500
  double std_simple = 0.0;
  std::vector<double> mean_curve;  // per-round mean cumulative regret
  std::vector<double> std_curve;   // per-round sample std of cumulative regret
};

/// Plays `agent` against `env` until the environment's horizon is exhausted.
/// Context and reward-noise streams derive from `seed`. Any failure is
/// rethrown as RunError naming the agent, seed and round.
RegretTrace run_episode(Environment& env, Agent& agent, std::uint64_t seed);

RegretTrace run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);
RegretTrace run_experiment(const ExperimentConfig& cfg, const EnvironmentFactory& factory,
                           std::uint64_t seed);

/// One trace per seed in cfg.seeds order, using up to `threads` workers.
std::vector<RegretTrace> run_seeds(const ExperimentConfig& cfg, std::size_t threads);

/// Prefix sum of instant regret through round t (0 for t = 0).
double cumulative_regret(const RegretTrace& trace, std::size_t t);

/// Regret over the final 500 rounds, R_T - R_{T-500}.
double simple_regret(const RegretTrace& trace);

constexpr std::size_t kSimpleRegretWindow = 500;

AggregateResult aggregate(const std::vector<RegretTrace>& traces);

struct OutputFiles {
  std::vector<std::filesystem::path> traces;
  std::filesystem::path summary;
  std::filesystem::path plot;
};

/// Writes per-seed trace CSVs, the summary CSV and the plot CSV into cfg.out_dir.
OutputFiles write_results(const AggregateResult& result, const std::vector<RegretTrace>& traces,
                          const ExperimentConfig& cfg);

/// "<env>__<policy>__<hash>", the stem shared by all files of one experiment.
std::string result_stem(const ExperimentConfig& cfg);

/// Reads a trace CSV written with record_every = 1 back into a trace.
RegretTrace read_trace_csv(const std::filesystem::path& path);

struct SummaryRow {
  std::string env;
  std::string policy;
  std::size_t seeds = 0;
  double mean_final = 0.0;
  double std_final = 0.0;
  double mean_simple = 0.0;
  double std_simple = 0.0;
};

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// All summary rows found in `dir`, sorted by env then policy.
std::vector<SummaryRow> collect_summaries(const std::filesystem::path& dir);

}  // namespace fgbench
