#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mchjm/estimation.hpp"
#include "mchjm/fixture.hpp"
#include "mchjm/io.hpp"
#include "oracles.hpp"

using namespace mchjm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Synthetic {
  CurveSystem sys;
  ModelParams truth;
  MatrixXd y;
};

Synthetic synthetic(int length, std::uint64_t seed, FixtureTruth ft = {}) {
  CurveSystem sys = make_system(RunConfig::defaults());
  ModelParams truth = ft.params(sys, 2);
  const MatrixXd states = simulate_states(sys, truth, fixture_initial_state(sys), length + 1, seed);
  MatrixXd y = compute_y_series(sys, states);
  return {std::move(sys), std::move(truth), std::move(y)};
}

// Small single-curve system for closed-form checks.
CurveSystem small_system() { return CurveSystem("OIS", BucketGrid({0.5, 1.0, 3.0}), {}); }

}  // namespace

TEST_CASE("residuals") {
  const Synthetic s = synthetic(200, 1);
  const EstimationWindow w(s.sys, s.y);
  const MatrixXd eta = residuals(w, s.truth);
  const VectorXd mu = drift_from_params(s.sys, s.truth);
  const double dt = s.sys.dt();
  for (Index k : {0, 57, 199}) {
    for (Index i = 0; i < 22; ++i) {
      CHECK(eta(k, i) == doctest::Approx((s.y(k, i) - mu(i) * dt) / (s.truth.omega(i) * std::sqrt(dt))).epsilon(1e-13));
    }
  }
  // y equal to the drift increment has zero residuals.
  const MatrixXd exact = (mu * dt).transpose().replicate(5, 1);
  CHECK(residuals(EstimationWindow(s.sys, exact), s.truth).cwiseAbs().maxCoeff() < 1e-9);

  ModelParams bad = s.truth;
  bad.omega(3) = 0.0;
  CHECK_THROWS_AS(residuals(w, bad), std::domain_error);
}

TEST_CASE("residual correlation approaches Gamma") {
  const Synthetic s = synthetic(3000, 2);
  const MatrixXd eta = residuals(EstimationWindow(s.sys, s.y), s.truth);
  const MatrixXd c = sample_correlation(eta);
  CHECK((c - s.truth.gamma).cwiseAbs().maxCoeff() < 3.0 / std::sqrt(3000.0));
}

TEST_CASE("window validation") {
  const CurveSystem sys = small_system();
  CHECK_THROWS_AS(EstimationWindow(sys, MatrixXd::Zero(1, 3)), std::invalid_argument);
  CHECK_THROWS_AS(EstimationWindow(sys, MatrixXd::Zero(5, 4)), std::invalid_argument);
  MatrixXd nan = MatrixXd::Zero(5, 3);
  nan(2, 1) = std::nan("");
  CHECK_THROWS_AS(EstimationWindow(sys, nan), std::invalid_argument);
}

TEST_CASE("likelihood closed form") {
  const CurveSystem sys = small_system();
  const RiskPremiumBlocks blocks(sys, 0);
  const ModelParams p = make_params(VectorXd::Ones(3), MatrixXd::Identity(3, 3), blocks, VectorXd::Zero(1));
  const VectorXd mu = drift_from_params(sys, p);
  // The window needs two rows; each contributes ln(2 pi)/2 per component.
  const MatrixXd y = (mu * sys.dt()).transpose().replicate(2, 1);
  const EstimationWindow w(sys, y);
  const double want = 2 * 3 * 0.5 * std::log(2 * std::numbers::pi);
  CHECK(neg_log_likelihood(w, p) == doctest::Approx(want).epsilon(1e-14));
  CHECK(neg_log_likelihood_fast(w, p) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("likelihood decomposes into univariate terms when Gamma = I") {
  const Synthetic s = synthetic(156, 3);
  const EstimationWindow w(s.sys, s.y);
  const ModelParams p = make_params(s.truth.omega, MatrixXd::Identity(22, 22), s.truth.blocks, s.truth.lambda_blocks);
  const VectorXd mu = drift_from_params(s.sys, p);
  const double dt = s.sys.dt();
  double sum = 0.0;
  for (Index i = 0; i < 22; ++i) {
    const double sd = p.omega(i);
    for (Index k = 0; k < s.y.rows(); ++k) {
      const double z = (s.y(k, i) / std::sqrt(dt) - mu(i) * std::sqrt(dt)) / sd;
      sum += 0.5 * std::log(2 * std::numbers::pi) + std::log(sd) + 0.5 * z * z;
    }
  }
  CHECK(std::abs(neg_log_likelihood(w, p) - sum) < 1e-10 * std::abs(sum));
}

TEST_CASE("fast likelihood agrees with the direct sum") {
  std::mt19937_64 rng(21);
  const Synthetic s = synthetic(156, 4);
  const EstimationWindow w(s.sys, s.y);
  for (int draw = 0; draw < 5; ++draw) {
    std::uniform_real_distribution<double> u(0.004, 0.012);
    std::normal_distribution<double> n;
    VectorXd omega(22);
    for (auto& x : omega) x = u(rng);
    const ModelParams p = make_params(omega, oracle::random_correlation(rng, 22), s.truth.blocks,
                                      (VectorXd(3) << n(rng), n(rng), n(rng)).finished());
    const double a = neg_log_likelihood(w, p);
    CHECK(std::abs(neg_log_likelihood_fast(w, p) - a) < 1e-10 * std::abs(a));
  }
}

TEST_CASE("lambda gradient matches finite differences") {
  const Synthetic s = synthetic(156, 5);
  const EstimationWindow w(s.sys, s.y);
  const ModelParams& p = s.truth;
  // d eta / d lambda_b = sqrt(dt) R B e_b, so dL/dlambda_b = sqrt(dt) sum_k eta_k' Gamma^-1 R B e_b.
  const MatrixXd eta = residuals(w, p);
  const MatrixXd rb = p.chol * p.blocks.indicator();
  const MatrixXd ginv = p.gamma.inverse();
  const VectorXd grad = std::sqrt(s.sys.dt()) * (eta * ginv * rb).colwise().sum().transpose();
  for (Index b = 0; b < 3; ++b) {
    const double h = 1e-5;
    ModelParams up = p, dn = p;
    up.lambda_blocks(b) += h;
    dn.lambda_blocks(b) -= h;
    const double fd = (neg_log_likelihood(w, up) - neg_log_likelihood(w, dn)) / (2 * h);
    CHECK(std::abs(fd - grad(b)) < 1e-6 * std::max(1.0, std::abs(grad(b))));
  }
}

TEST_CASE("omitting ln dt does not move the minimum") {
  // The omitted constant is L D ln(dt) / 2; shifting it leaves differences intact.
  const Synthetic s = synthetic(156, 6);
  const EstimationWindow w(s.sys, s.y);
  ModelParams q = s.truth;
  q.lambda_blocks(0) += 0.3;
  const double d1 = neg_log_likelihood(w, q) - neg_log_likelihood(w, s.truth);
  const double shift = 0.5 * 156 * 22 * std::log(s.sys.dt());
  const double d2 = (neg_log_likelihood(w, q) + shift) - (neg_log_likelihood(w, s.truth) + shift);
  CHECK(d1 == doctest::Approx(d2).epsilon(1e-9));
}

TEST_CASE("fit starts from Pearson estimates and descends") {
  const Synthetic s = synthetic(156, 7);
  const EstimationWindow w(s.sys, s.y);
  const RiskPremiumBlocks blocks(s.sys, 2);
  FitOptions opt;
  opt.record_trace = true;
  const EstimationResult r = fit(w, blocks, opt);
  CHECK(r.converged);
  REQUIRE(r.theta_path.size() == static_cast<std::size_t>(r.n_iters) + 1);

  const VectorXd& t0 = r.theta_path.front();
  CHECK(t0.head(3).isZero());
  const MatrixXd c = s.y.rowwise() - s.y.colwise().mean();
  for (Index i = 0; i < 22; ++i) {
    const double sd = std::sqrt(c.col(i).squaredNorm() / 155.0 / s.sys.dt());
    CHECK(t0(3 + i) == doctest::Approx(sd).epsilon(1e-12));
  }
  const ModelParams init = initial_params(w, blocks);
  CHECK((init.gamma - sample_correlation(s.y)).cwiseAbs().maxCoeff() < 1e-12);

  // Within a sweep Gamma is fixed and no accepted sub-step raises the objective.
  const std::size_t per_sweep = 3 + 22;
  REQUIRE(r.trace.size() == per_sweep * static_cast<std::size_t>(r.n_iters));
  for (std::size_t sweep = 0; sweep < static_cast<std::size_t>(r.n_iters); ++sweep) {
    for (std::size_t j = 1; j < per_sweep; ++j) {
      CHECK(r.trace[sweep * per_sweep + j] <= r.trace[sweep * per_sweep + j - 1]);
    }
  }

  // Converged: the last two iterates satisfy the relative-change rule.
  const VectorXd& a = r.theta_path[r.theta_path.size() - 2];
  const VectorXd& b = r.theta_path.back();
  for (Index i = 0; i < a.size(); ++i) {
    const double ch = std::abs(a(i)) < 1e-12 ? std::abs(b(i) - a(i)) : std::abs(b(i) - a(i)) / std::abs(a(i));
    CHECK(ch < opt.tol);
  }

  // Residual correlation at the fit reproduces Gamma to the tolerance level.
  const MatrixXd eta = residuals(w, r.params);
  MatrixXd q = eta.transpose() * eta / static_cast<double>(eta.rows());
  const VectorXd inv = q.diagonal().cwiseSqrt().cwiseInverse();
  q = inv.asDiagonal() * q * inv.asDiagonal();
  CHECK((q - r.params.gamma).cwiseAbs().maxCoeff() < 1e-3);

  CHECK(r.neg_log_lik == doctest::Approx(neg_log_likelihood(w, r.params)));
  CHECK(r.neg_log_lik < neg_log_likelihood(w, init));
}

TEST_CASE("looser tolerance needs fewer sweeps") {
  const Synthetic s = synthetic(156, 8);
  const EstimationWindow w(s.sys, s.y);
  const RiskPremiumBlocks blocks(s.sys, 2);
  FitOptions loose, tight;
  loose.tol = 1e-2;
  tight.tol = 1e-6;
  const EstimationResult a = fit(w, blocks, loose);
  const EstimationResult b = fit(w, blocks, FitOptions{});
  const EstimationResult c = fit(w, blocks, tight);
  CHECK(a.n_iters < b.n_iters);
  CHECK(b.n_iters < c.n_iters);
  FitOptions capped;
  capped.max_iters = 1;
  const EstimationResult d = fit(w, blocks, capped);
  CHECK_FALSE(d.converged);
  CHECK(d.n_iters == 1);
}

TEST_CASE("fit and theta naming") {
  const Synthetic s = synthetic(156, 9);
  const EstimationWindow w(s.sys, s.y);
  const EstimationResult r = fit(w, RiskPremiumBlocks(s.sys, 2));
  const auto names = r.theta_names(s.sys);
  REQUIRE(names.size() == 25);
  CHECK(names[0] == "lambda_s");
  CHECK(names[2] == "lambda_EUR3M");
  CHECK(names[3] == "omega_EONIA:1m");
  CHECK(names[24] == "omega_EUR3M:30y");
  // Volatility estimates land near the truth on a three-year window.
  for (Index i = 0; i < 22; ++i) CHECK(std::abs(r.params.omega(i) / s.truth.omega(i) - 1.0) < 0.25);
}

TEST_CASE("null risk premia are not significant") {
  FixtureTruth zero;
  zero.lambda_s = zero.lambda_l = zero.lambda_tenor = 0.0;
  const Synthetic s = synthetic(156, 10, zero);
  const EstimationWindow w(s.sys, s.y);
  const EstimationResult r = fit(w, RiskPremiumBlocks(s.sys, 2));
  BootstrapOptions bo;
  bo.n_boot = 60;
  bo.seed = 3;
  bo.threads = 1;
  const EstimationResult b = bootstrap_errors(w, r, bo);
  REQUIRE(b.bootstrap);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(r.params.lambda_blocks(i)) < 3.0 * b.bootstrap->std_errors(i));
}

TEST_CASE("bootstrap plumbing") {
  const Synthetic s = synthetic(156, 11);
  const EstimationWindow w(s.sys, s.y);
  const EstimationResult r = fit(w, RiskPremiumBlocks(s.sys, 2));
  BootstrapOptions bo;
  bo.n_boot = 2;
  bo.seed = 5;
  bo.threads = 1;
  const EstimationResult b = bootstrap_errors(w, r, bo);
  REQUIRE(b.bootstrap);
  CHECK(b.bootstrap->n_boot == 2);
  CHECK(b.bootstrap->replicas.rows() == 2);
  CHECK(b.bootstrap->std_errors.allFinite());
  CHECK((b.bootstrap->std_errors.array() > 0.0).all());
  CHECK(b.theta() == r.theta());

  // Replica streams depend on the seed only, not on the thread count.
  bo.n_boot = 6;
  const EstimationResult one = bootstrap_errors(w, r, bo);
  bo.threads = 3;
  const EstimationResult three = bootstrap_errors(w, r, bo);
  CHECK(one.bootstrap->replicas == three.bootstrap->replicas);
  bo.seed = 6;
  const EstimationResult other = bootstrap_errors(w, r, bo);
  CHECK(other.bootstrap->replicas != one.bootstrap->replicas);
  bo.n_boot = 0;
  CHECK_THROWS_AS(bootstrap_errors(w, r, bo), std::invalid_argument);
}

TEST_CASE("bootstrap of a window with identical rows has zero spread") {
  const CurveSystem sys = small_system();
  const MatrixXd y = (VectorXd(3) << 1e-4, 2e-4, -1e-4).finished().transpose().replicate(20, 1);
  const EstimationWindow w(sys, y);
  const EstimationResult r = fit(w, RiskPremiumBlocks(sys, 0));
  BootstrapOptions bo;
  bo.n_boot = 8;
  bo.threads = 1;
  const EstimationResult b = bootstrap_errors(w, r, bo);
  REQUIRE(b.bootstrap);
  CHECK(b.bootstrap->n_failed == 0);
  CHECK(b.bootstrap->std_errors.isZero());
  CHECK(b.bootstrap->bias.isZero());
}
