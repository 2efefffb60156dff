#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fgbench/config.hpp"
#include "fgbench/errors.hpp"
#include "fgbench/harness.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string seeds;
  std::string out;
  std::string policy;
  std::string env;
  std::vector<std::string> sets;
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "INI experiment file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seeds", o.seeds, "seed list, e.g. 0,1,2 or 0-9");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--policy", o.policy, "policy display name, e.g. LinUCB, MALATS, FGLMCTS");
  cmd->add_option("--env", o.env, "environment name, e.g. linear-20d, wheel-d0.5");
  cmd->add_option("--set", o.sets, "extra override section.key=value (repeatable)");
  cmd->add_option("--threads", o.threads, "worker threads for the seed fan-out");
}

fgbench::ConfigTree load_tree(const CommonOptions& o) {
  auto tree = fgbench::read_config_tree(o.config);
  if (!o.policy.empty()) fgbench::set_policy_by_name(tree, o.policy);
  if (!o.env.empty()) fgbench::set_env_by_name(tree, o.env);
  if (!o.seeds.empty()) fgbench::set_param(tree, "run.seeds", o.seeds);
  if (!o.out.empty()) fgbench::set_param(tree, "run.out_dir", o.out);
  if (o.threads > 0) fgbench::set_param(tree, "run.threads", std::to_string(o.threads));
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fgbench::ConfigError("--set expects key=value, got '" + kv + "'");
    fgbench::set_param(tree, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return tree;
}

void print_row(const std::string& env, const std::string& policy, std::size_t seeds, double mf,
               double sf, double ms, double ss) {
  std::printf("%-16s %-18s %5zu %12.1f ± %-10.1f %10.1f ± %.1f\n", env.c_str(), policy.c_str(), seeds, mf,
              sf, ms, ss);
}

void print_header() {
  std::printf("%-16s %-18s %5s %25s %23s\n", "env", "policy", "seeds", "final regret", "simple regret");
}

fgbench::AggregateResult run_one(const fgbench::ExperimentConfig& cfg) {
  const auto traces = fgbench::run_seeds(cfg, cfg.threads);
  const auto result = fgbench::aggregate(traces);
  const auto files = fgbench::write_results(result, traces, cfg);
  std::cerr << "wrote " << files.summary.string() << '\n';
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fgbench: contextual bandit benchmarks for Thompson sampling with MCMC posteriors"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "run one experiment over its seed list");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "run an experiment once per value of one parameter");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", param, "parameter, section.key or a unique bare key")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  std::string report_dir;
  auto* report = app.add_subcommand("report", "print every summary found in a results directory");
  report->add_option("--dir", report_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = fgbench::build_config(load_tree(run_opts));
      const auto r = run_one(cfg);
      print_header();
      print_row(r.env, r.policy, r.seeds, r.mean_final, r.std_final, r.mean_simple, r.std_simple);
    } else if (sweep->parsed()) {
      const auto base = load_tree(sweep_opts);
      print_header();
      for (const auto& v : values) {
        auto tree = base;
        fgbench::set_param(tree, param, v);
        const auto cfg = fgbench::build_config(tree);
        const auto r = run_one(cfg);
        print_row(r.env, r.policy + " " + param + "=" + v, r.seeds, r.mean_final, r.std_final,
                  r.mean_simple, r.std_simple);
      }
    } else if (report->parsed()) {
      const auto rows = fgbench::collect_summaries(report_dir);
      if (rows.empty()) {
        std::cerr << "no summary files in " << report_dir << '\n';
        return 1;
      }
      print_header();
      for (const auto& r : rows) {
        print_row(r.env, r.policy, r.seeds, r.mean_final, r.std_final, r.mean_simple, r.std_simple);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
