#include "fgbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "fgbench/errors.hpp"

namespace fgbench {

void ExperimentConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("experiment: horizon must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("experiment: seed list is empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("experiment: seeds must be distinct");
  }
  if (record_every < 1) throw std::invalid_argument("experiment: record_every must be >= 1");
  policy.validate();
}

RegretTrace run_episode(Environment& env, Agent& agent, std::uint64_t seed) {
  Rng context_rng = make_stream(seed, Stream::kEnvContext);
  Rng noise_rng = make_stream(seed, Stream::kEnvNoise);
  RegretTrace trace;
  trace.env = env.name();
  trace.policy = agent.name();
  trace.seed = seed;
  trace.instant.reserve(env.horizon());
  trace.actions.reserve(env.horizon());

  const auto start = std::chrono::steady_clock::now();
  std::size_t round = 0;
  try {
    while (auto armset = env.observe(context_rng)) {
      round = armset->round;
      const std::size_t arm = agent.select(*armset, round);
      const double reward = env.reward(*armset, arm, noise_rng);
      // Rounding in the two evaluations can leave a gap of -1e-17 on the optimal arm.
      const double gap = std::max(0.0, env.optimal_mean(*armset) - env.mean_reward(*armset, arm));
      trace.instant.push_back(gap);
      trace.actions.push_back(arm);
      agent.update(*armset, arm, reward);
    }
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(agent.name(), seed, round, e.what());
  }
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

RegretTrace run_experiment(const ExperimentConfig& cfg, const EnvironmentFactory& factory,
                           std::uint64_t seed) {
  auto env = factory.make(cfg.horizon, seed);
  Policy policy(cfg.policy, env->feature_dim(), cfg.horizon, seed);
  return run_episode(*env, policy, seed);
}

RegretTrace run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const EnvironmentFactory factory(cfg.env);
  return run_experiment(cfg, factory, seed);
}

std::vector<RegretTrace> run_seeds(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  const EnvironmentFactory factory(cfg.env);
  const std::size_t n = cfg.seeds.size();
  std::vector<RegretTrace> traces(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        traces[i] = run_experiment(cfg, factory, cfg.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return traces;
}

double cumulative_regret(const RegretTrace& trace, std::size_t t) {
  if (t > trace.instant.size()) {
    throw std::invalid_argument("cumulative_regret: round " + std::to_string(t) + " beyond horizon " +
                                std::to_string(trace.instant.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < t; ++i) sum += trace.instant[i];
  return sum;
}

double simple_regret(const RegretTrace& trace) {
  const std::size_t T = trace.instant.size();
  if (T < kSimpleRegretWindow) {
    throw std::invalid_argument("simple_regret: horizon " + std::to_string(T) + " is below " +
                                std::to_string(kSimpleRegretWindow));
  }
  double prefix = 0.0;
  for (std::size_t i = 0; i < T - kSimpleRegretWindow; ++i) prefix += trace.instant[i];
  double total = prefix;
  for (std::size_t i = T - kSimpleRegretWindow; i < T; ++i) total += trace.instant[i];
  return total - prefix;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) {
    sd = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

AggregateResult aggregate(const std::vector<RegretTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
  const std::size_t T = traces.front().horizon();
  for (const auto& tr : traces) {
    if (tr.horizon() != T) throw std::invalid_argument("aggregate: traces have unequal lengths");
  }
  AggregateResult out;
  out.env = traces.front().env;
  out.policy = traces.front().policy;
  out.seeds = traces.size();

  std::vector<double> running(traces.size(), 0.0);
  std::vector<double> finals(traces.size());
  out.mean_curve.resize(T);
  out.std_curve.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < traces.size(); ++k) running[k] += traces[k].instant[t];
    mean_std(running, out.mean_curve[t], out.std_curve[t]);
  }
  for (std::size_t k = 0; k < traces.size(); ++k) finals[k] = cumulative_regret(traces[k], T);
  mean_std(finals, out.mean_final, out.std_final);

  if (T >= kSimpleRegretWindow) {
    std::vector<double> simple(traces.size());
    for (std::size_t k = 0; k < traces.size(); ++k) simple[k] = simple_regret(traces[k]);
    mean_std(simple, out.mean_simple, out.std_simple);
  } else {
    out.mean_simple = out.std_simple = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace fgbench
