// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fgbench/environments.hpp"
#include "fgbench/harness.hpp"
#include "fgbench/likelihoods.hpp"
#include "fgbench/numeric_core.hpp"
#include "fgbench/policies.hpp"
#include "fgbench/samplers.hpp"

using namespace fgbench;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Target quadratic(const MatrixXd& a) {
  Target t;
  t.potential = [a](const VectorXd& th) { return 0.5 * th.dot(a * th); };
  t.gradient = [a](const VectorXd& th) -> VectorXd { return a * th; };
  return t;
}

SamplerConfig sampler(SamplerKind kind, double step) {
  SamplerConfig c;
  c.kind = kind;
  c.step = step;
  return c;
}

ArmSet armset_from(const MatrixXd& arms) {
  ArmSet s;
  s.arms = arms;
  return s;
}

MatrixXd gaussian_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  return MatrixXd::NullaryExpr(r, c, [&] { return standard_normal(rng, 1)[0]; });
}

// Linear-20d McmcTS setup: squared loss, prior variance 0.5, beta0 = 1000 on the d log t schedule.
PolicyConfig mcmc_policy(SamplerKind kind, LikelihoodKind lik = LikelihoodKind::kTS, double lambda = 0.0) {
  PolicyConfig p;
  p.kind = PolicyKind::kMcmcTS;
  p.likelihood.kind = lik;
  p.likelihood.lambda_fg = lambda;
  p.likelihood.eta = 1.0;
  p.likelihood.prior_sd = std::sqrt(0.5);
  p.likelihood.beta.kind = BetaKind::kDLogT;
  p.likelihood.beta.beta0 = 1000.0;
  p.sampler.kind = kind;
  p.sampler.inner_steps = 50;
  p.sampler.inner_steps_stale = 10;
  return p;
}

ExperimentConfig linear20(PolicyConfig policy, std::size_t horizon, std::size_t seeds) {
  ExperimentConfig cfg;
  cfg.env = LinearEnvConfig{};
  cfg.policy = std::move(policy);
  cfg.horizon = horizon;
  cfg.seeds.clear();
  for (std::size_t s = 0; s < seeds; ++s) cfg.seeds.push_back(s);
  return cfg;
}

AggregateResult run_all(const ExperimentConfig& cfg) { return aggregate(run_seeds(cfg, 1)); }

// ---------------------------------------------------------------- criteria

Outcome c1_lambda_zero() {
  Outcome o;
  const auto ts = linear20(mcmc_policy(SamplerKind::kLMC), 2000, 1);
  const auto fg = linear20(mcmc_policy(SamplerKind::kLMC, LikelihoodKind::kFG, 0.0), 2000, 1);
  const auto a = run_experiment(ts, 0);
  const auto b = run_experiment(fg, 0);
  o.require(a.actions == b.actions, "actions identical over 2000 rounds");
  o.require(a.instant == b.instant, "regret traces identical");
  return o;
}

Outcome c2_mala_exact() {
  Outcome o;
  Rng rng(2);
  const auto t = quadratic(MatrixXd::Identity(1, 1));
  const auto cfg = sampler(SamplerKind::kMALA, 0.1);
  auto s = run_chain(SamplerState::init(VectorXd::Zero(1), SamplerKind::kMALA), 2000, t, cfg, rng);
  const std::size_t n = 200000;
  std::vector<double> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s = run_chain(std::move(s), 1, t, cfg, rng);
    xs.push_back(s.theta[0]);
  }
  double mean = 0.0, var = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n - 1;
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(xs[i]);
    ks = std::max({ks, (i + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  o.require(std::abs(mean) <= 0.02, fmt("|mean|=%.4f<=0.02", std::abs(mean)));
  o.require(var >= 0.95 && var <= 1.05, fmt("var=%.4f in [0.95,1.05]", var));
  o.require(ks <= 0.01, fmt("KS=%.4f<=0.01", ks));
  return o;
}

Outcome c3_lmc_bias() {
  Outcome o;
  const auto t = quadratic(MatrixXd::Identity(1, 1));
  std::vector<double> bias;
  for (double h : {0.02, 0.01}) {
    // Plain empirical variance, plus a control-variate estimate driven by the
    // same noise through an exact N(0,1) AR(1) chain with the same contraction.
    Rng rng(h == 0.02 ? 31 : 32);
    const auto cfg = sampler(SamplerKind::kLMC, h);
    const double rho = 1.0 - h;
    const double exact_scale = std::sqrt(1.0 - rho * rho);
    auto s = SamplerState::init(VectorXd::Zero(1), SamplerKind::kLMC);
    double y = 0.0;
    const std::size_t burn = 20000, n = 10000000;
    double sx = 0, sxx = 0, sy = 0, syy = 0;
    VectorXd eps(1);
    for (std::size_t k = 0; k < burn + n; ++k) {
      eps[0] = standard_normal(rng, 1)[0];
      s = lmc_step_with_noise(std::move(s), t, cfg, eps, rng);
      y = rho * y + exact_scale * eps[0];
      if (k < burn) continue;
      const double x = s.theta[0];
      sx += x;
      sxx += x * x;
      sy += y;
      syy += y * y;
    }
    const double var_x = (sxx - sx * sx / n) / (n - 1);
    const double var_y = (syy - sy * sy / n) / (n - 1);
    const double oracle = 2 * h / (1 - rho * rho);
    o.require(std::abs(var_x - oracle) <= 0.02 * oracle,
              fmt("h=%.2f var=%.5f vs AR(1) %.5f", h, var_x, oracle));
    bias.push_back(std::abs((var_x - (var_y - 1.0)) - 1.0));
  }
  const double ratio = bias[1] / bias[0];
  o.require(ratio >= 0.375 && ratio <= 0.625, fmt("bias ratio=%.4f (0.5 +-25%%)", ratio));
  return o;
}

Outcome c4_leapfrog() {
  Outcome o;
  const GradFn grad = [](const VectorXd& th) -> VectorXd {
    return Eigen::Vector2d(std::pow(th[0], 3) + th[1], th[0] + 2 * th[1]);
  };
  const VectorXd th = Eigen::Vector2d(0.4, -0.3), p = Eigen::Vector2d(0.9, 0.1);
  const auto [th2, p2] = leapfrog(th, p, grad, 0.05, 20);
  const auto [th3, p3] = leapfrog(th2, -p2, grad, 0.05, 20);
  const double rev = std::max((th3 - th).norm(), (p3 + p).norm());
  o.require(rev <= 1e-10, fmt("reversibility %.2e", rev));

  const VectorXd z = Eigen::Vector4d(0.7, -0.2, 0.3, 0.5);
  MatrixXd jac(4, 4);
  const double e = 1e-5;
  for (int k = 0; k < 4; ++k) {
    VectorXd up = z, dn = z;
    up[k] += e;
    dn[k] -= e;
    const auto [a1, b1] = leapfrog(up.head(2), up.tail(2), grad, 0.1, 1);
    const auto [a2, b2] = leapfrog(dn.head(2), dn.tail(2), grad, 0.1, 1);
    jac.col(k) << (a1 - a2) / (2 * e), (b1 - b2) / (2 * e);
  }
  const double det_err = std::abs(jac.determinant() - 1.0);
  o.require(det_err <= 1e-6, fmt("|det-1|=%.2e", det_err));

  const GradFn harmonic = [](const VectorXd& q) -> VectorXd { return q; };
  const VectorXd q0 = VectorXd::Constant(1, 1.0), m0 = VectorXd::Constant(1, 0.3);
  std::vector<double> lx, ly;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto [q, m] = leapfrog(q0, m0, harmonic, eps, static_cast<int>(std::lround(1.0 / eps)));
    const double err = 0.5 * std::abs(q.squaredNorm() + m.squaredNorm() - q0.squaredNorm() - m0.squaredNorm());
    lx.push_back(std::log(eps));
    ly.push_back(std::log(err));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  o.require(std::abs(slope - 2.0) <= 0.2, fmt("energy slope=%.3f", slope));
  return o;
}

Outcome c5_preconditioned() {
  Outcome o;
  Rng rng(5);
  const Eigen::Index d = 20;
  auto design = design_init(d, 1.0);
  for (int i = 0; i < 200; ++i) design_update(design, standard_normal(rng, d), 0.0);
  const double beta = 1000.0, h = 0.02 / beta;
  auto t = quadratic(beta * design.V);
  t.precond = &design;
  auto cfg = sampler(SamplerKind::kLMC, h);
  cfg.precondition = true;
  auto s = run_chain(SamplerState::init(VectorXd::Zero(d), SamplerKind::kLMC), 5000, t, cfg, rng);
  MatrixXd cov = MatrixXd::Zero(d, d);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    s = run_chain(std::move(s), 1, t, cfg, rng);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(s.theta);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= n;
  const MatrixXd target = design.Vinv / beta;
  const double rel = (cov - target).norm() / target.norm();
  o.require(rel <= 0.1, fmt("Frobenius-relative error %.4f vs beta^-1 V^-1", rel));
  return o;
}

Outcome c6_smoothing() {
  Outcome o;
  Rng rng(6);
  const double cap = 1.0;
  for (double s : {10.0, 1000.0}) {
    double lo = 0.0, hi = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const MatrixXd arms = gaussian_matrix(rng, 5, 3);
      const VectorXd theta = standard_normal(rng, 3);
      const double fstar = (arms * theta).maxCoeff();
      const double gap = std::min(cap, fstar) - (cap - softplus_smooth(cap - fstar, s));
      lo = std::min(lo, gap);
      hi = std::max(hi, gap);
    }
    const double bound = s == 10.0 ? 0.06932 : 7e-4;
    o.require(lo >= -1e-15 && hi <= bound, fmt("s=%g gap in [%.2e, %.5f]", s, lo, hi));
  }
  return o;
}

Outcome c7_gradients() {
  Outcome o;
  Rng rng(7);
  int checked = 0;
  double worst = 0.0;
  while (checked < 50) {
    LikelihoodSpec spec;
    spec.kind = static_cast<LikelihoodKind>(checked % 3);
    spec.lambda_fg = 0.7;
    spec.cap = checked % 2 == 0 ? 1000.0 : 0.3;
    spec.smooth = 5.0;
    spec.prior_sd = 1.5;
    History h(4, true);
    for (int i = 0; i < 12; ++i) h.append(armset_from(0.5 * gaussian_matrix(rng, 4, 4)), i % 4, standard_normal(rng, 1)[0]);
    const VectorXd theta = standard_normal(rng, 4);
    bool kink = false;
    for (const auto& e : h.entries()) {
      kink |= std::abs(e.x.dot(theta) - spec.cap) <= 1e-3;
      VectorXd sc = e.arms * theta;
      std::sort(sc.data(), sc.data() + sc.size());
      kink |= sc[sc.size() - 1] - sc[sc.size() - 2] <= 1e-3;
    }
    if (kink) continue;
    const VectorXd g = loss_grad(spec, theta, h, 1);
    VectorXd fd(4);
    for (int k = 0; k < 4; ++k) {
      VectorXd up = theta, dn = theta;
      up[k] += 1e-5;
      dn[k] -= 1e-5;
      fd[k] = (loss_eval(spec, up, h, 1) - loss_eval(spec, dn, h, 1)) / 2e-5;
    }
    worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()));
    ++checked;
  }
  o.require(worst <= 1e-5, fmt("max relative error %.2e over 50 instances", worst));
  return o;
}

Outcome c8_design_maintenance() {
  Outcome o;
  Rng rng(8);
  auto s = design_init(20, 1.0);
  MatrixXd v = MatrixXd::Identity(20, 20);
  for (int i = 0; i < 200; ++i) {
    const VectorXd x = standard_normal(rng, 20);
    design_update(s, x, standard_normal(rng, 1)[0]);
    v += x * x.transpose();
  }
  const double inv_err = (s.Vinv - v.fullPivLu().inverse()).cwiseAbs().maxCoeff();
  const double path_err = (ridge_estimate(s) - ridge_estimate_solve(s)).cwiseAbs().maxCoeff();
  o.require(inv_err <= 1e-8, fmt("inverse error %.2e", inv_err));
  o.require(path_err <= 1e-10, fmt("ridge paths differ by %.2e", path_err));
  return o;
}

double uniform_gap_oracle(const ExperimentConfig& cfg, std::size_t draws) {
  const EnvironmentFactory factory(cfg.env);
  double total = 0.0;
  for (auto seed : cfg.seeds) {
    auto env = factory.make(1, seed);
    const VectorXd theta = dynamic_cast<LinearEnv&>(*env).theta_star();
    const MatrixXd blocks = Eigen::Map<const MatrixXd>(theta.data(), 4, 5);
    Rng rng(900 + seed);
    double gap = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const VectorXd means = blocks.transpose() * standard_normal(rng, 4);
      gap += means.maxCoeff() - means.mean();
    }
    total += gap / static_cast<double>(draws);
  }
  return total / static_cast<double>(cfg.seeds.size()) * static_cast<double>(cfg.horizon);
}

Outcome c9_desk_scale() {
  Outcome o;
  const std::size_t T = 2000, seeds = 10;
  PolicyConfig uniform;
  const auto ucfg = linear20(uniform, T, seeds);
  const auto u = run_all(ucfg);
  const double oracle = uniform_gap_oracle(ucfg, 1000000);
  o.require(std::abs(u.mean_final - oracle) <= 0.1 * oracle,
            fmt("Uniform %.1f vs oracle %.1f", u.mean_final, oracle));
  PolicyConfig ucb;
  ucb.kind = PolicyKind::kLinUCB;
  PolicyConfig ts;
  ts.kind = PolicyKind::kLinTS;
  for (const auto& p : {ucb, ts, mcmc_policy(SamplerKind::kLMC), mcmc_policy(SamplerKind::kMALA)}) {
    const auto r = run_all(linear20(p, T, seeds));
    const double share = r.mean_final / u.mean_final;
    o.require(share < 0.05, policy_display_name(p) + fmt(" %.1f (%.1f%% of Uniform)", r.mean_final, 100 * share));
  }
  return o;
}

Outcome c10_reference_scale() {
  Outcome o;
  const std::size_t T = 10000, seeds = 10;
  const auto mala = run_all(linear20(mcmc_policy(SamplerKind::kMALA), T, seeds));
  o.require(mala.mean_final >= 20 && mala.mean_final <= 250,
            fmt("MALATS %.1f +- %.1f in [20,250]", mala.mean_final, mala.std_final));
  const auto lmc = run_all(linear20(mcmc_policy(SamplerKind::kLMC), T, seeds));
  o.require(lmc.mean_final >= 20 && lmc.mean_final <= 300,
            fmt("LMCTS %.1f +- %.1f in [20,300]", lmc.mean_final, lmc.std_final));
  std::vector<double> fg;
  for (double lambda : {0.01, 0.1, 1.0}) {
    fg.push_back(run_all(linear20(mcmc_policy(SamplerKind::kLMC, LikelihoodKind::kFG, lambda), T, seeds)).mean_final);
  }
  o.require(fg[1] <= 3 * lmc.mean_final, fmt("FGLMCTS(0.1) %.1f <= 3 x LMCTS", fg[1]));
  o.require(fg[2] > fg[0], fmt("FGLMCTS(1.0) %.1f > FGLMCTS(0.01) %.1f", fg[2], fg[0]));
  return o;
}

Outcome c11_thompson_frequencies() {
  Outcome o;
  // Frozen posterior: beta = 1, eta = 1/2, unit prior, so precision = gram + I.
  PolicyConfig cfg;
  cfg.kind = PolicyKind::kMcmcTS;
  cfg.likelihood.eta = 0.5;
  cfg.likelihood.prior_sd = 1.0;
  cfg.likelihood.beta.horizon = 10000;
  cfg.sampler.kind = SamplerKind::kMALA;
  cfg.sampler.inner_steps = 500;
  cfg.sampler.inner_steps_stale = 500;
  cfg.auto_step = false;
  cfg.sampler.step = 0.3;
  auto state = policy_init(cfg, 2);
  state.history->append(armset_from(Eigen::RowVector2d(1, 0)), 0, 0.3);
  state.history->append(armset_from(Eigen::RowVector2d(0, 1)), 0, 0.1);
  state.history->append(armset_from(Eigen::RowVector2d(1, 1)), 0, 0.5);
  state.new_data = false;

  const MatrixXd precision = state.history->gram() + MatrixXd::Identity(2, 2);
  const VectorXd mean = precision.ldlt().solve(state.history->response());
  const MatrixXd cov = precision.inverse();
  const MatrixXd arms = MatrixXd::Identity(2, 2);
  const VectorXd diff = Eigen::Vector2d(1, -1);
  const double p = normal_cdf(diff.dot(mean) / std::sqrt(diff.dot(cov * diff)));

  Rng rng(11);
  const int n = 10000;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    auto r = mcmc_ts_round(state, armset_from(arms), cfg, rng, 1);
    state.chain = std::move(r.chain);
    first += r.arm == 0 ? 1 : 0;
  }
  const double freq = first / static_cast<double>(n);
  const double sigma = std::sqrt(p * (1 - p) / n);
  o.require(std::abs(freq - p) <= 3 * sigma, fmt("MCMC freq %.4f vs exact %.4f (3 sigma %.4f)", freq, p, 3 * sigma));
  return o;
}

Outcome c12_wheel() {
  Outcome o;
  for (double delta : {0.5, 0.99}) {
    WheelEnvConfig wc;
    wc.delta = delta;
    const std::size_t n = 100000;
    WheelEnv env(wc, n);
    Rng rng(12);
    std::size_t hits = 0;
    bool means_ok = true;
    while (auto set = env.observe(rng)) {
      const bool outer = set->context.norm() > delta;
      hits += outer ? 1 : 0;
      means_ok = means_ok && env.optimal_mean(*set) == (outer ? 50.0 : 1.2);
    }
    const double rate = hits / static_cast<double>(n);
    const double p = 1 - delta * delta;
    const double se = std::sqrt(p * (1 - p) / n);
    o.require(std::abs(rate - p) <= 3 * se, fmt("delta=%.2f hit rate %.5f vs %.5f", delta, rate, p));
    o.require(means_ok, fmt("delta=%.2f optimal means exactly {1.2, 50}", delta));
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "lambda=0 reduction", 30, c1_lambda_zero},
      {2, "MALA exactness", 10, c2_mala_exact},
      {3, "LMC bias law", 10, c3_lmc_bias},
      {4, "leapfrog integrator", 5, c4_leapfrog},
      {5, "preconditioned stationarity", 30, c5_preconditioned},
      {6, "SFG smoothing bound", 1, c6_smoothing},
      {7, "gradient correctness", 5, c7_gradients},
      {8, "design maintenance", 1, c8_design_maintenance},
      {9, "desk-scale regret ordering", 300, c9_desk_scale},
      {10, "reference-scale spot checks", 1800, c10_reference_scale},
      {11, "Thompson frequency oracle", 120, c11_thompson_frequencies},
      {12, "wheel statistics", 10, c12_wheel},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(secs < c.limit_seconds, fmt("runtime %.1fs < %.0fs", secs, c.limit_seconds));
    if (!out.pass) ++failures;
    std::printf("%s C%d %s: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
