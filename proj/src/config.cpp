#include "fgbench/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fgbench/errors.hpp"

namespace fgbench {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"horizon", "seeds", "out_dir", "record_every", "threads"}},
      {"env",
       {"kind", "context_dim", "num_arms", "noise_sd", "theta_mode", "prior_sd", "dim", "delta", "mu1",
        "mu2", "mu3", "path", "columns", "header", "delimiter", "reward_scheme", "poisonous_label",
        "name"}},
      {"policy", {"kind", "eps", "eps_decay", "alpha", "ts_scale", "reg", "name"}},
      {"likelihood", {"kind", "eta", "lambda_fg", "cap", "smooth", "prior_sd", "beta_kind", "beta0"}},
      {"sampler",
       {"kind", "step", "step_scale", "inner_steps", "inner_steps_stale", "leapfrog", "damping",
        "precondition", "svrg", "svrg_batch", "svrg_period", "mala_filter"}},
  };
  return keys;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string where(const std::string& section, const std::string& key) { return section + "." + key; }

double to_real(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string v = lower(raw);
  if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const char* begin = raw.data();
  if (!raw.empty() && raw[0] == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, raw.data() + raw.size(), out);
  if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size()) {
    throw ConfigError(where(section, key) + ": expected a number, got '" + raw + "'");
  }
  return out;
}

std::uint64_t to_count(const std::string& section, const std::string& key, const std::string& raw) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
  if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size()) {
    throw ConfigError(where(section, key) + ": expected a non-negative integer, got '" + raw + "'");
  }
  return out;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string v = lower(raw);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(where(section, key) + ": expected a boolean, got '" + raw + "'");
}

std::vector<std::uint64_t> to_seeds(const std::string& raw) {
  std::vector<std::uint64_t> out;
  std::istringstream is(raw);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }),
              tok.end());
    if (tok.empty()) continue;
    const auto dash = tok.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = to_count("run", "seeds", tok.substr(0, dash));
      const auto hi = to_count("run", "seeds", tok.substr(dash + 1));
      if (hi < lo) throw ConfigError("run.seeds: empty range '" + tok + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(to_count("run", "seeds", tok));
    }
  }
  if (out.empty()) throw ConfigError("run.seeds: no seeds given");
  return out;
}

template <typename Enum>
Enum to_enum(const std::string& section, const std::string& key, const std::string& raw,
             const std::map<std::string, Enum>& table) {
  const auto it = table.find(lower(raw));
  if (it != table.end()) return it->second;
  std::string options;
  for (const auto& [name, _] : table) options += (options.empty() ? "" : ", ") + name;
  throw ConfigError(where(section, key) + ": unknown value '" + raw + "' (expected one of " + options + ")");
}

// Typed accessor over one section.
class Section {
 public:
  Section(const ConfigTree& tree, std::string name) : name_(std::move(name)) {
    if (auto child = tree.get_child_optional(name_)) node_ = &*child;
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (!node_) return std::nullopt;
    auto v = node_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }
  bool has(const std::string& key) const { return raw(key).has_value(); }

  void real(const std::string& key, double& out) const {
    if (auto v = raw(key)) out = to_real(name_, key, *v);
  }
  template <typename Int>
  void count(const std::string& key, Int& out) const {
    if (auto v = raw(key)) out = static_cast<Int>(to_count(name_, key, *v));
  }
  void boolean(const std::string& key, bool& out) const {
    if (auto v = raw(key)) out = to_bool(name_, key, *v);
  }
  void text(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }
  template <typename Enum>
  void choice(const std::string& key, Enum& out, const std::map<std::string, Enum>& table) const {
    if (auto v = raw(key)) out = to_enum(name_, key, *v, table);
  }

 private:
  std::string name_;
  const ConfigTree* node_ = nullptr;
};

void check_keys(const ConfigTree& tree) {
  const auto& keys = known_keys();
  for (const auto& [section, node] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) {
      if (node.empty()) throw ConfigError("key '" + section + "' must live inside a section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, _] : node) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + where(section, key) + "'");
    }
  }
}

const std::map<std::string, PolicyKind> kPolicyKinds = {
    {"uniform", PolicyKind::kUniform},      {"eps-greedy", PolicyKind::kEpsGreedy},
    {"epsgreedy", PolicyKind::kEpsGreedy},  {"linucb", PolicyKind::kLinUCB},
    {"lints", PolicyKind::kLinTS},          {"mcmc-ts", PolicyKind::kMcmcTS},
    {"mcmcts", PolicyKind::kMcmcTS}};
const std::map<std::string, LikelihoodKind> kLikelihoodKinds = {
    {"ts", LikelihoodKind::kTS}, {"fg", LikelihoodKind::kFG}, {"sfg", LikelihoodKind::kSFG}};
const std::map<std::string, BetaKind> kBetaKinds = {
    {"constant", BetaKind::kConstant}, {"dlogt", BetaKind::kDLogT}, {"d-log-t", BetaKind::kDLogT}};
const std::map<std::string, SamplerKind> kSamplerKinds = {{"lmc", SamplerKind::kLMC},
                                                          {"mala", SamplerKind::kMALA},
                                                          {"hmc", SamplerKind::kHMC},
                                                          {"ulmc", SamplerKind::kULMC}};
const std::map<std::string, MalaFilter> kMalaFilters = {{"full", MalaFilter::kFull},
                                                        {"simple", MalaFilter::kSimple}};
const std::map<std::string, ThetaStarMode> kThetaModes = {{"unit", ThetaStarMode::kUnitNorm},
                                                          {"prior", ThetaStarMode::kPrior}};
const std::map<std::string, RewardScheme> kRewardSchemes = {{"onehot", RewardScheme::kOneHot},
                                                            {"mushroom", RewardScheme::kMushroom}};

EnvConfig build_env(const Section& s) {
  std::string kind = "linear";
  s.text("kind", kind);
  kind = lower(kind);
  if (kind == "linear") {
    LinearEnvConfig c;
    s.count("context_dim", c.context_dim);
    s.count("num_arms", c.num_arms);
    s.real("noise_sd", c.noise_sd);
    s.real("prior_sd", c.prior_sd);
    s.choice("theta_mode", c.theta_mode, kThetaModes);
    return c;
  }
  if (kind == "logistic") {
    LogisticEnvConfig c;
    s.count("dim", c.dim);
    s.count("num_arms", c.num_arms);
    return c;
  }
  if (kind == "wheel") {
    WheelEnvConfig c;
    s.real("delta", c.delta);
    s.real("mu1", c.mu1);
    s.real("mu2", c.mu2);
    s.real("mu3", c.mu3);
    s.real("noise_sd", c.noise_sd);
    return c;
  }
  if (kind == "dataset") {
    DatasetEnvConfig c;
    s.text("path", c.path);
    s.text("name", c.name);
    if (c.path.empty()) throw ConfigError("env.path is required for a dataset environment");
    std::string columns;
    s.text("columns", columns);
    if (columns.empty()) throw ConfigError("env.columns is required for a dataset environment");
    try {
      c.schema.columns = parse_column_roles(columns);
    } catch (const SchemaError& e) {
      throw ConfigError(std::string("env.columns: ") + e.what());
    }
    s.boolean("header", c.schema.header);
    std::string delim;
    s.text("delimiter", delim);
    if (!delim.empty()) {
      if (delim.size() == 3 && (delim.front() == '"' || delim.front() == '\'') && delim.back() == delim.front()) {
        delim = delim.substr(1, 1);
      }
      if (delim == "tab" || delim == "\\t") delim = "\t";
      if (delim == "space") delim = " ";
      if (delim.size() != 1) throw ConfigError("env.delimiter must be one character");
      c.schema.delimiter = delim[0];
    }
    s.choice("reward_scheme", c.schema.scheme, kRewardSchemes);
    s.text("poisonous_label", c.schema.poisonous_label);
    return c;
  }
  throw ConfigError("env.kind: unknown environment '" + kind + "' (expected linear, logistic, wheel, dataset)");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ConfigTree parse_config_tree(std::istream& in) {
  ConfigTree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return tree;
}

ConfigTree read_config_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config_tree(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExperimentConfig build_config(const ConfigTree& tree) {
  check_keys(tree);
  ExperimentConfig cfg;

  const Section run(tree, "run");
  run.count("horizon", cfg.horizon);
  if (auto seeds = run.raw("seeds")) cfg.seeds = to_seeds(*seeds);
  run.text("out_dir", cfg.out_dir);
  run.count("record_every", cfg.record_every);
  run.count("threads", cfg.threads);

  cfg.env = build_env(Section(tree, "env"));

  auto& p = cfg.policy;
  const Section pol(tree, "policy");
  pol.choice("kind", p.kind, kPolicyKinds);
  pol.real("eps", p.eps);
  pol.boolean("eps_decay", p.eps_decay);
  pol.real("alpha", p.alpha);
  pol.real("ts_scale", p.ts_scale);
  pol.real("reg", p.reg);
  pol.text("name", p.name);

  auto& lk = p.likelihood;
  const Section lik(tree, "likelihood");
  lik.choice("kind", lk.kind, kLikelihoodKinds);
  lik.real("eta", lk.eta);
  lik.real("lambda_fg", lk.lambda_fg);
  lik.real("cap", lk.cap);
  lik.real("smooth", lk.smooth);
  lik.real("prior_sd", lk.prior_sd);
  lik.choice("beta_kind", lk.beta.kind, kBetaKinds);
  lik.real("beta0", lk.beta.beta0);

  auto& sc = p.sampler;
  const Section smp(tree, "sampler");
  smp.choice("kind", sc.kind, kSamplerKinds);
  if (smp.has("step")) {
    smp.real("step", sc.step);
    p.auto_step = false;
  }
  if (smp.has("step_scale")) {
    double scale = 0.0;
    smp.real("step_scale", scale);
    p.step_scale = scale;
  }
  smp.count("inner_steps", sc.inner_steps);
  smp.count("inner_steps_stale", sc.inner_steps_stale);
  smp.count("leapfrog", sc.leapfrog);
  smp.real("damping", sc.damping);
  smp.boolean("precondition", sc.precondition);
  bool svrg = smp.has("svrg_batch") || smp.has("svrg_period");
  smp.boolean("svrg", svrg);
  if (svrg) {
    SvrgConfig sv;
    smp.count("svrg_batch", sv.batch);
    smp.count("svrg_period", sv.snapshot_period);
    sc.svrg = sv;
  }
  smp.choice("mala_filter", sc.mala_filter, kMalaFilters);

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const ConfigTree tree = read_config_tree(path);
  try {
    return build_config(tree);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void set_param(ConfigTree& tree, const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    const std::string section = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    const auto it = keys.find(section);
    if (it == keys.end() || !it->second.count(name)) throw ConfigError("unknown parameter '" + key + "'");
    tree.put(ConfigTree::path_type(section + "/" + name, '/'), value);
    return;
  }
  std::vector<std::string> owners;
  for (const auto& [section, names] : keys) {
    if (names.count(key)) owners.push_back(section);
  }
  if (owners.empty()) throw ConfigError("unknown parameter '" + key + "'");
  if (owners.size() > 1) {
    std::string list;
    for (const auto& o : owners) list += (list.empty() ? "" : ", ") + o + "." + key;
    throw ConfigError("parameter '" + key + "' is ambiguous; use one of " + list);
  }
  tree.put(ConfigTree::path_type(owners.front() + "/" + key, '/'), value);
}

void set_policy_by_name(ConfigTree& tree, const std::string& name) {
  static const std::map<std::string, std::string> baselines = {
      {"uniform", "uniform"}, {"epsgreedy", "eps-greedy"}, {"linucb", "linucb"}, {"lints", "lints"}};
  if (const auto it = baselines.find(lower(name)); it != baselines.end()) {
    set_param(tree, "policy.kind", it->second);
    return;
  }
  static const std::regex pattern("^(P)?(U)?(SFG|FG)?(SVRG)?(LMC|MALA|HMC)TS$");
  std::smatch m;
  if (!std::regex_match(name, m, pattern) || (m[2].matched && m[5].str() != "LMC")) {
    throw ConfigError("unrecognized policy name '" + name + "'");
  }
  set_param(tree, "policy.kind", "mcmc-ts");
  set_param(tree, "sampler.precondition", m[1].matched ? "true" : "false");
  set_param(tree, "likelihood.kind", m[3].matched ? lower(m[3].str()) : "ts");
  set_param(tree, "sampler.svrg", m[4].matched ? "true" : "false");
  set_param(tree, "sampler.kind", m[2].matched ? "ulmc" : lower(m[5].str()));
}

void set_env_by_name(ConfigTree& tree, const std::string& name) {
  static const std::regex linear("^linear-([0-9]+)d$");
  static const std::regex logistic("^logistic-([0-9]+)d$");
  static const std::regex wheel("^wheel-d([0-9.]+)$");
  std::smatch m;
  if (std::regex_match(name, m, linear)) {
    const auto d = to_count("env", "name", m[1].str());
    std::uint64_t arms = 5;
    if (auto a = tree.get_optional<std::string>(ConfigTree::path_type("env/num_arms", '/'))) {
      arms = to_count("env", "num_arms", *a);
    }
    if (arms == 0 || d % arms != 0) {
      throw ConfigError("environment '" + name + "': dimension not divisible by num_arms=" +
                        std::to_string(arms));
    }
    set_param(tree, "env.kind", "linear");
    set_param(tree, "env.num_arms", std::to_string(arms));
    set_param(tree, "env.context_dim", std::to_string(d / arms));
  } else if (std::regex_match(name, m, logistic)) {
    set_param(tree, "env.kind", "logistic");
    set_param(tree, "env.dim", m[1].str());
  } else if (std::regex_match(name, m, wheel)) {
    set_param(tree, "env.kind", "wheel");
    set_param(tree, "env.delta", m[1].str());
  } else {
    throw ConfigError("unrecognized environment name '" + name + "'");
  }
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "run.horizon=" << cfg.horizon << "\nrun.seeds=";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) os << (i ? "," : "") << cfg.seeds[i];
  os << "\nrun.record_every=" << cfg.record_every << '\n';

  std::visit(
      [&os](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LinearEnvConfig>) {
          os << "env.kind=linear\nenv.context_dim=" << c.context_dim << "\nenv.num_arms=" << c.num_arms
             << "\nenv.noise_sd=" << fmt(c.noise_sd) << "\nenv.prior_sd=" << fmt(c.prior_sd)
             << "\nenv.theta_mode=" << (c.theta_mode == ThetaStarMode::kPrior ? "prior" : "unit") << '\n';
        } else if constexpr (std::is_same_v<T, LogisticEnvConfig>) {
          os << "env.kind=logistic\nenv.dim=" << c.dim << "\nenv.num_arms=" << c.num_arms << '\n';
        } else if constexpr (std::is_same_v<T, WheelEnvConfig>) {
          os << "env.kind=wheel\nenv.delta=" << fmt(c.delta) << "\nenv.mu1=" << fmt(c.mu1)
             << "\nenv.mu2=" << fmt(c.mu2) << "\nenv.mu3=" << fmt(c.mu3)
             << "\nenv.noise_sd=" << fmt(c.noise_sd) << '\n';
        } else {
          os << "env.kind=dataset\nenv.path=" << c.path << "\nenv.name=" << c.name << "\nenv.columns=";
          for (auto r : c.schema.columns) os << static_cast<int>(r);
          os << "\nenv.header=" << c.schema.header << "\nenv.delimiter=" << static_cast<int>(c.schema.delimiter)
             << "\nenv.reward_scheme=" << static_cast<int>(c.schema.scheme)
             << "\nenv.poisonous_label=" << c.schema.poisonous_label << '\n';
        }
      },
      cfg.env);

  const auto& p = cfg.policy;
  os << "policy.kind=" << static_cast<int>(p.kind) << "\npolicy.name=" << p.name << "\npolicy.reg=" << fmt(p.reg)
     << '\n';
  switch (p.kind) {
    case PolicyKind::kUniform:
      break;
    case PolicyKind::kEpsGreedy:
      os << "policy.eps=" << fmt(p.eps) << "\npolicy.eps_decay=" << p.eps_decay << '\n';
      break;
    case PolicyKind::kLinUCB:
      os << "policy.alpha=" << fmt(p.alpha) << '\n';
      break;
    case PolicyKind::kLinTS:
      os << "policy.ts_scale=" << fmt(p.ts_scale) << '\n';
      break;
    case PolicyKind::kMcmcTS: {
      const auto& lk = p.likelihood;
      os << "likelihood.kind=" << static_cast<int>(lk.kind) << "\nlikelihood.eta=" << fmt(lk.eta)
         << "\nlikelihood.lambda_fg=" << fmt(lk.lambda_fg) << "\nlikelihood.cap=" << fmt(lk.cap)
         << "\nlikelihood.smooth=" << fmt(lk.smooth) << "\nlikelihood.prior_sd=" << fmt(lk.prior_sd)
         << "\nlikelihood.beta_kind=" << static_cast<int>(lk.beta.kind)
         << "\nlikelihood.beta0=" << fmt(lk.beta.beta0) << '\n';
      const auto& sc = p.sampler;
      os << "sampler.kind=" << static_cast<int>(sc.kind) << "\nsampler.auto_step=" << p.auto_step;
      if (p.auto_step) {
        os << "\nsampler.step_scale=" << fmt(p.step_scale.value_or(default_step_scale(sc.kind)));
      } else {
        os << "\nsampler.step=" << fmt(sc.step);
      }
      os << "\nsampler.inner_steps=" << sc.inner_steps << "\nsampler.inner_steps_stale=" << sc.inner_steps_stale
         << "\nsampler.leapfrog=" << sc.leapfrog << "\nsampler.damping=" << fmt(sc.damping)
         << "\nsampler.precondition=" << sc.precondition
         << "\nsampler.mala_filter=" << static_cast<int>(sc.mala_filter) << '\n';
      if (sc.svrg) {
        os << "sampler.svrg_batch=" << sc.svrg->batch << "\nsampler.svrg_period=" << sc.svrg->snapshot_period
           << '\n';
      }
      break;
    }
  }
  return os.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a64(canonical_config(cfg)); }

}  // namespace fgbench
