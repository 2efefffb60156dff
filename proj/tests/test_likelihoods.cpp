#include <doctest.h>

#include <cmath>
#include <limits>

#include "fgbench/likelihoods.hpp"
#include "fgbench/rng.hpp"

using namespace fgbench;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ArmSet make_armset(const MatrixXd& arms) {
  ArmSet s;
  s.arms = arms;
  return s;
}

MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  return MatrixXd::NullaryExpr(rows, cols, [&] { return scale * standard_normal(rng, 1)[0]; });
}

History random_history(Rng& rng, Eigen::Index d, std::size_t n, std::size_t arms = 4) {
  History h(d, true);
  for (std::size_t i = 0; i < n; ++i) {
    const auto set = make_armset(random_matrix(rng, static_cast<Eigen::Index>(arms), d, 0.5));
    h.append(set, i % arms, standard_normal(rng, 1)[0]);
  }
  return h;
}

// Independent per-entry oracle, written directly from the loss definitions.
double oracle_loss(const LikelihoodSpec& spec, const VectorXd& theta, const History& h, double beta) {
  double total = 0.0;
  for (const auto& e : h.entries()) {
    const double f = e.x.dot(theta);
    double l = spec.eta * (f - e.reward) * (f - e.reward);
    if (spec.kind == LikelihoodKind::kFG) l -= spec.lambda_fg * std::min(spec.cap, f);
    if (spec.kind == LikelihoodKind::kSFG) {
      const double fstar = (e.arms * theta).maxCoeff();
      const double u = spec.cap - fstar;
      const double phi = u > 0 ? u + std::log(1.0 + std::exp(-spec.smooth * u)) / spec.smooth
                               : std::log(1.0 + std::exp(spec.smooth * u)) / spec.smooth;
      l -= spec.lambda_fg * (spec.cap - phi);
    }
    total += l;
  }
  if (std::isfinite(spec.prior_sd)) total += theta.squaredNorm() / (2.0 * spec.prior_sd * spec.prior_sd);
  return beta * total;
}

VectorXd finite_diff(const LikelihoodSpec& spec, const VectorXd& theta, const History& h, double eps) {
  VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    VectorXd up = theta, dn = theta;
    up[i] += eps;
    dn[i] -= eps;
    g[i] = (loss_eval(spec, up, h, 1) - loss_eval(spec, dn, h, 1)) / (2 * eps);
  }
  return g;
}

}  // namespace

TEST_CASE("softplus_smooth") {
  CHECK(softplus_smooth(0.0, 10.0) == doctest::Approx(std::log(2.0) / 10).epsilon(1e-14));
  CHECK(softplus_smooth(0.0, 1.0) == doctest::Approx(0.6931471805599453).epsilon(1e-14));
  CHECK(std::abs(softplus_smooth(5.0, 10.0) - 5.0) <= 2e-22);
  CHECK(std::isfinite(softplus_smooth(1e6, 10.0)));
  CHECK(softplus_smooth(-1e6, 10.0) == 0.0);
  for (double u = -3; u <= 3; u += 0.25) {
    CHECK(softplus_smooth(u, 2.0) == doctest::Approx(std::log1p(std::exp(2.0 * u)) / 2.0).epsilon(1e-13));
  }
}

TEST_CASE("loss_eval examples") {
  LikelihoodSpec spec;
  spec.prior_sd = kInf;
  History empty(2);
  CHECK(loss_eval(spec, VectorXd::Zero(2), empty, 1) == 0.0);

  spec.kind = LikelihoodKind::kFG;
  spec.lambda_fg = 0.5;
  History one(2);
  one.append(make_armset(MatrixXd::Identity(2, 2)), 0, 1.0);
  CHECK(loss_eval(spec, Eigen::Vector2d(1, 0), one, 1) == doctest::Approx(-0.5));

  LikelihoodSpec prior_only;
  prior_only.prior_sd = 2.0;
  CHECK(loss_eval(prior_only, Eigen::Vector2d(2, 0), empty, 1) == doctest::Approx(0.5));
}

TEST_CASE("loss_grad examples") {
  Rng rng(2);
  LikelihoodSpec spec;
  spec.prior_sd = 0.7;
  spec.eta = 1.3;
  spec.beta.beta0 = 3.0;
  spec.beta.horizon = 10;
  History h(3);
  const MatrixXd arms = random_matrix(rng, 2, 3);
  h.append(make_armset(arms), 1, 0.4);
  const VectorXd theta = standard_normal(rng, 3);
  const VectorXd x = arms.row(1).transpose();
  const VectorXd expected = 3.0 * (2 * 1.3 * (x.dot(theta) - 0.4) * x + theta / 0.49);
  CHECK((loss_grad(spec, theta, h, 5) - expected).norm() <= 1e-12 * expected.norm());

  History empty(3);
  CHECK(loss_grad(spec, VectorXd::Zero(3), empty, 1).isZero());
}

TEST_CASE("fast path matches the per-entry oracle") {
  Rng rng(7);
  for (int rep = 0; rep < 60; ++rep) {
    LikelihoodSpec spec;
    spec.kind = static_cast<LikelihoodKind>(rep % 3);
    spec.eta = 0.5 + rep * 0.01;
    spec.lambda_fg = (rep % 3 == 0) ? 0.0 : 0.3;
    spec.cap = (rep % 2 == 0) ? 1000.0 : 0.2;  // small cap forces the per-entry path
    spec.prior_sd = (rep % 5 == 0) ? kInf : 0.8;
    spec.beta.beta0 = 7.0;
    spec.beta.horizon = 100;
    const auto h = random_history(rng, 5, 30);
    const VectorXd theta = standard_normal(rng, 5);
    const double want = oracle_loss(spec, theta, h, 7.0);
    CHECK(loss_eval(spec, theta, h, 50) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("gradients agree with central finite differences") {
  Rng rng(31);
  int checked = 0;
  double worst = 0.0;
  while (checked < 50) {
    LikelihoodSpec spec;
    spec.kind = static_cast<LikelihoodKind>(checked % 3);
    spec.lambda_fg = 0.7;
    spec.cap = (checked % 2 == 0) ? 1000.0 : 0.3;
    spec.smooth = 5.0;
    spec.prior_sd = 1.5;
    const auto h = random_history(rng, 4, 12);
    const VectorXd theta = standard_normal(rng, 4);
    bool near_kink = false;
    for (const auto& e : h.entries()) {
      near_kink |= std::abs(e.x.dot(theta) - spec.cap) <= 1e-3;
      const VectorXd s = e.arms * theta;
      std::vector<double> v(s.data(), s.data() + s.size());
      std::sort(v.rbegin(), v.rend());
      near_kink |= v[0] - v[1] <= 1e-3;
    }
    if (near_kink) continue;
    const VectorXd g = loss_grad(spec, theta, h, 1);
    const VectorXd fd = finite_diff(spec, theta, h, 1e-5);
    worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()));
    ++checked;
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("feel-good subgradient takes the active branch at the cap") {
  LikelihoodSpec spec;
  spec.kind = LikelihoodKind::kFG;
  spec.lambda_fg = 1.0;
  spec.cap = 1.0;
  spec.prior_sd = kInf;
  History h(1);
  MatrixXd arm(1, 1);
  arm << 1.0;
  h.append(make_armset(arm), 0, 1.0);
  CHECK(loss_grad(spec, VectorXd::Constant(1, 1.0), h, 1)[0] == -1.0);
  CHECK(loss_grad(spec, VectorXd::Constant(1, 1.5), h, 1)[0] == doctest::Approx(1.0));
}

TEST_CASE("lambda zero feel-good is bit-identical to TS") {
  Rng rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    LikelihoodSpec ts;
    ts.prior_sd = 0.9;
    ts.beta.beta0 = 1000;
    ts.beta.kind = BetaKind::kDLogT;
    ts.beta.dim = 6;
    ts.beta.horizon = 40;
    LikelihoodSpec fg = ts;
    fg.kind = LikelihoodKind::kFG;
    fg.lambda_fg = 0.0;
    LikelihoodSpec sfg = fg;
    sfg.kind = LikelihoodKind::kSFG;
    const auto h = random_history(rng, 6, 1 + rep % 20);
    const VectorXd theta = standard_normal(rng, 6);
    const std::size_t t = 1 + rep % 40;
    CHECK(loss_eval(fg, theta, h, t) == loss_eval(ts, theta, h, t));
    CHECK(loss_grad(fg, theta, h, t) == loss_grad(ts, theta, h, t));
    CHECK(loss_eval(sfg, theta, h, t) == loss_eval(ts, theta, h, t));
  }
}

TEST_CASE("smoothed bonus stays within log2/s of the hard bonus") {
  Rng rng(44);
  const double cap = 1.0;
  for (double s : {10.0, 1000.0}) {
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const MatrixXd arms = random_matrix(rng, 5, 3);
      const VectorXd theta = standard_normal(rng, 3);
      const double fstar = (arms * theta).maxCoeff();
      const double gap = std::min(cap, fstar) - (cap - softplus_smooth(cap - fstar, s));
      CHECK(gap >= -1e-15);
      worst = std::max(worst, gap);
    }
    CHECK(worst <= std::log(2.0) / s + 1e-15);
  }
}

TEST_CASE("smoothed bonus is non-decreasing in s") {
  for (double f = -2.0; f <= 3.0; f += 0.1) {
    double prev = -kInf;
    for (double s : {0.5, 1.0, 2.0, 10.0, 100.0}) {
      const double bonus = 1.0 - softplus_smooth(1.0 - f, s);
      CHECK(bonus >= prev - 1e-15);
      prev = bonus;
    }
  }
}

TEST_CASE("loss is additive over concatenated histories") {
  Rng rng(5);
  for (auto kind : {LikelihoodKind::kTS, LikelihoodKind::kFG, LikelihoodKind::kSFG}) {
    LikelihoodSpec spec;
    spec.kind = kind;
    spec.lambda_fg = 0.4;
    spec.prior_sd = 0.6;
    const auto h1 = random_history(rng, 3, 9);
    const auto h2 = random_history(rng, 3, 14);
    const auto h = concat(h1, h2);
    CHECK(h.size() == 23);
    const VectorXd theta = standard_normal(rng, 3);
    const double prior = prior_loss(spec, theta);
    const double lhs = loss_eval(spec, theta, h, 1) - prior;
    const double rhs = (loss_eval(spec, theta, h1, 1) - prior) + (loss_eval(spec, theta, h2, 1) - prior);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("history bookkeeping") {
  Rng rng(9);
  History h(2, false);
  const MatrixXd arms = random_matrix(rng, 3, 2);
  h.append(make_armset(arms), 2, 1.5);
  CHECK(h[0].x == VectorXd(arms.row(2).transpose()));
  CHECK(h[0].arms.size() == 0);
  CHECK(h.gram().isApprox(h[0].x * h[0].x.transpose()));
  CHECK(h.reward_sq() == 2.25);
  CHECK_THROWS_AS(h.append(make_armset(arms), 3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(h.append(make_armset(random_matrix(rng, 3, 4)), 0, 0.0), std::invalid_argument);

  LikelihoodSpec sfg;
  sfg.kind = LikelihoodKind::kSFG;
  sfg.lambda_fg = 1.0;
  CHECK_THROWS_AS(loss_eval(sfg, VectorXd::Zero(2), h, 1), std::logic_error);
}

TEST_CASE("beta schedules") {
  BetaSchedule c{BetaKind::kConstant, 1000.0, 20, 10000};
  CHECK(beta_at(c, 1) == 1000.0);
  CHECK(beta_at(c, 10000) == 1000.0);
  BetaSchedule one{BetaKind::kConstant, 1.0, 20, 10};
  CHECK(beta_at(one, 7) == 1.0);

  BetaSchedule d{BetaKind::kDLogT, 1000.0, 20, 10000};
  CHECK(1.0 / beta_at(d, 10000) == doctest::Approx(20 * std::log(1e4) / 1000).epsilon(1e-13));
  double prev = kInf;
  for (std::size_t t = 1; t <= 10000; t += 37) {
    const double b = beta_at(d, t);
    CHECK(b > 0.0);
    CHECK(b <= prev);
    prev = b;
  }
  CHECK_THROWS_AS(beta_at(d, 0), std::invalid_argument);
  CHECK_THROWS_AS(beta_at(d, 10001), std::invalid_argument);
  BetaSchedule t1{BetaKind::kDLogT, 5.0, 3, 1};
  CHECK(beta_at(t1, 1) > 0.0);
}

TEST_CASE("spec validation") {
  LikelihoodSpec s;
  s.eta = 0.0;
  CHECK_THROWS(s.validate());
  LikelihoodSpec neg;
  neg.lambda_fg = -1.0;
  CHECK_THROWS(neg.validate());
  LikelihoodSpec sm;
  sm.smooth = 0.0;
  CHECK_THROWS(sm.validate());
  LikelihoodSpec inf;
  inf.prior_sd = kInf;
  CHECK(inf.prior_precision() == 0.0);
  CHECK_NOTHROW(inf.validate());
}
