#include <cmath>
#include <random>

#include "doctest.h"
#include "mchjm/fixture.hpp"
#include "mchjm/io.hpp"
#include "mchjm/pca.hpp"
#include "mchjm/scenario.hpp"
#include "oracles.hpp"

using namespace mchjm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Small {
  CurveSystem sys{"OIS", BucketGrid({0.25, 1.0, 2.0, 5.0, 10.0}), {}};
  ModelParams params;
  VectorXd x = VectorXd::LinSpaced(5, 0.01, 0.03);
  Small() {
    std::mt19937_64 rng(31);
    VectorXd omega = (VectorXd(5) << 0.006, 0.007, 0.008, 0.009, 0.01).finished();
    params = make_params(omega, oracle::random_correlation(rng, 5), RiskPremiumBlocks(sys, 2),
                         (VectorXd(2) << 1.5, -0.3).finished());
  }
};

MatrixXd sample_cov(const MatrixXd& paths, const VectorXd& mean) {
  const MatrixXd c = paths.rowwise() - mean.transpose();
  return c.transpose() * c / static_cast<double>(paths.rows() - 1);
}

}  // namespace

TEST_CASE("names and spec validation") {
  CHECK(parse_forecast_method("gaussian-closed-form") == ForecastMethod::gaussian_closed_form);
  CHECK(to_string(ForecastMethod::bootstrap) == "bootstrap");
  CHECK(parse_drift_mode("paper-literal") == DriftMode::paper_literal);
  CHECK_THROWS_AS(parse_forecast_method("garch"), std::invalid_argument);
  ForecastSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.horizon = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.horizon = 1;
  spec.coverage = {1.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.coverage = {0.95};
  spec.n_paths = 1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("closed-form moments") {
  const Small s;
  const ScenarioModel m = ScenarioModel::from_params(s.sys, s.params);
  const MatrixXd& a = s.sys.full_transition();
  const double dt = s.sys.dt();
  const MatrixXd ss = m.volatility * m.volatility.transpose();

  const GaussianMoments one = gaussian_moments(m, s.x, 1);
  const GaussianMoments lit = gaussian_moments(m, s.x, 1, DriftMode::paper_literal);
  CHECK((one.mean - (a * s.x + m.drift * dt)).cwiseAbs().maxCoeff() < 1e-16);
  CHECK((one.cov - ss * dt).cwiseAbs().maxCoeff() < 1e-18);
  CHECK((lit.mean - one.mean).cwiseAbs().maxCoeff() < 1e-16);

  // Explicit sums for k = 12.
  VectorXd mean = VectorXd::Zero(5);
  MatrixXd cov = MatrixXd::Zero(5, 5);
  MatrixXd ah = MatrixXd::Identity(5, 5);
  for (int h = 0; h < 12; ++h) {
    mean += ah * m.drift * dt;
    cov += ah * ss * ah.transpose() * dt;
    ah = a * ah;
  }
  mean += ah * s.x;
  const GaussianMoments k12 = gaussian_moments(m, s.x, 12);
  CHECK((k12.mean - mean).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((k12.cov - cov).cwiseAbs().maxCoeff() < 1e-17);
  const GaussianMoments l12 = gaussian_moments(m, s.x, 12, DriftMode::paper_literal);
  CHECK((l12.mean - (ah * s.x + 12 * dt * m.drift)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(l12.cov == k12.cov);
  CHECK_THROWS_AS(gaussian_moments(m, s.x, 0), std::invalid_argument);
}

TEST_CASE("gaussian paths match the closed form") {
  const Small s;
  const ScenarioModel m = ScenarioModel::from_params(s.sys, s.params);
  const int n = 200000;
  const auto ens = simulate_checkpoints(m, s.x, {12, 1}, n, ForecastMethod::gaussian_mc, 17);
  REQUIRE(ens.size() == 2);
  CHECK(ens[0].horizon == 1);
  for (const Ensemble& e : ens) {
    const GaussianMoments g = gaussian_moments(m, s.x, e.horizon);
    const VectorXd mean = e.paths.colwise().mean().transpose();
    const MatrixXd cov = sample_cov(e.paths, mean);
    for (Index i = 0; i < 5; ++i) {
      CHECK(std::abs(mean(i) - g.mean(i)) < 3 * std::sqrt(g.cov(i, i) / n));
      for (Index j = 0; j <= i; ++j) {
        const double se = std::sqrt((g.cov(i, i) * g.cov(j, j) + g.cov(i, j) * g.cov(i, j)) / n);
        CHECK(std::abs(cov(i, j) - g.cov(i, j)) < 3 * se);
      }
    }
  }
}

TEST_CASE("degenerate ensembles") {
  const Small s;
  ModelParams still = s.params;
  still.omega.setZero();
  const ScenarioModel m = ScenarioModel::from_params(s.sys, still);
  const auto e = simulate_checkpoints(m, s.x, {7}, 50, ForecastMethod::gaussian_mc, 1);
  const GaussianMoments g = gaussian_moments(m, s.x, 7);
  for (Index p = 0; p < 50; ++p) CHECK((e[0].paths.row(p).transpose() - g.mean).cwiseAbs().maxCoeff() < 1e-17);

  const ScenarioModel one = ScenarioModel::from_params(s.sys, s.params, MatrixXd::Constant(1, 5, 0.4));
  const auto b = simulate_checkpoints(one, s.x, {3}, 40, ForecastMethod::bootstrap, 2);
  for (Index p = 1; p < 40; ++p) CHECK(b[0].paths.row(p) == b[0].paths.row(0));
  const ForecastEnvelope env = envelope(b[0], 0.95);
  CHECK((env.upper - env.lower).cwiseAbs().maxCoeff() < 1e-16);
  CHECK((env.mean - b[0].paths.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-16);

  const ScenarioModel none = ScenarioModel::from_params(s.sys, s.params);
  CHECK_THROWS_AS(simulate_checkpoints(none, s.x, {1}, 10, ForecastMethod::bootstrap, 1), std::invalid_argument);
}

TEST_CASE("seeds and threads") {
  const CurveSystem sys = make_system(RunConfig::defaults());
  const ModelParams p = FixtureTruth{}.params(sys, 2);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  MatrixXd pool(30, 22);
  for (Index i = 0; i < pool.size(); ++i) pool(i) = z(rng);
  const ScenarioModel m = ScenarioModel::from_params(sys, p, pool);
  const VectorXd x = fixture_initial_state(sys);
  for (ForecastMethod meth : {ForecastMethod::gaussian_mc, ForecastMethod::bootstrap}) {
    const auto a = simulate_checkpoints(m, x, {1, 5}, 1000, meth, 99, 1);
    const auto b = simulate_checkpoints(m, x, {1, 5}, 1000, meth, 99, 3);
    const auto c = simulate_checkpoints(m, x, {1, 5}, 1000, meth, 100, 1);
    CHECK(a[1].paths == b[1].paths);
    CHECK(a[1].paths != c[1].paths);
  }
  ForecastSpec spec;
  spec.horizon = 4;
  spec.n_paths = 600;
  spec.seed = 8;
  CHECK(simulate_paths(m, x, spec).paths == simulate_paths(m, x, spec).paths);
}

TEST_CASE("envelopes") {
  GaussianMoments g;
  g.mean = (VectorXd(3) << 0.01, 0.02, 0.03).finished();
  g.cov = MatrixXd::Zero(3, 3);
  g.cov.diagonal() << 1e-6, 4e-6, 9e-6;
  const ForecastEnvelope e95 = envelope(g, 0.95);
  CHECK(e95.upper(1) == doctest::Approx(0.02 + 1.959964 * 2e-3).epsilon(1e-7));
  CHECK(e95.lower(2) == doctest::Approx(0.03 - 1.959964 * 3e-3).epsilon(1e-7));
  CHECK(e95.band_upper(0) == doctest::Approx(0.012));
  CHECK(e95.sd(2) == doctest::Approx(3e-3));
  const ForecastEnvelope e99 = envelope(g, 0.99);
  CHECK(((e99.lower.array() <= e95.lower.array()) && (e95.upper.array() <= e99.upper.array())).all());
  CHECK_THROWS_AS(envelope(g, 1.0), std::invalid_argument);

  const Small s;
  const ScenarioModel m = ScenarioModel::from_params(s.sys, s.params);
  const auto ens = simulate_checkpoints(m, s.x, {12}, 4000, ForecastMethod::gaussian_mc, 5);
  double prev_width = 0.0;
  for (double p : {0.5, 0.8, 0.95, 0.99}) {
    const ForecastEnvelope e = envelope(ens[0], p);
    CHECK((e.lower.array() <= e.mean.array()).all());
    CHECK((e.mean.array() <= e.upper.array()).all());
    const double width = (e.upper - e.lower).sum();
    CHECK(width > prev_width);
    prev_width = width;
  }

  // Type-7 quantile on a known sample.
  Ensemble tiny;
  tiny.horizon = 1;
  tiny.paths = MatrixXd(5, 1);
  tiny.paths << 3, 1, 4, 1, 5;
  const ForecastEnvelope q = envelope(tiny, 0.5);
  CHECK(q.lower(0) == doctest::Approx(1.0));
  CHECK(q.upper(0) == doctest::Approx(4.0));
}

TEST_CASE("heavy-tailed residuals widen the bootstrap envelope") {
  const Small s;
  std::mt19937_64 rng(6);
  std::student_t_distribution<double> t(3.0);
  MatrixXd pool(5000, 5);
  for (Index i = 0; i < pool.size(); ++i) pool(i) = t(rng) / std::sqrt(3.0);
  const ScenarioModel m = ScenarioModel::from_params(s.sys, s.params, pool);
  const auto boot = simulate_checkpoints(m, s.x, {1}, 20000, ForecastMethod::bootstrap, 7);
  // Gaussian with the ensemble's own mean and variance.
  GaussianMoments matched;
  matched.mean = boot[0].paths.colwise().mean().transpose();
  matched.cov = sample_cov(boot[0].paths, matched.mean);
  const ForecastEnvelope eb = envelope(boot[0], 0.99);
  const ForecastEnvelope eg = envelope(matched, 0.99);
  CHECK(((eb.upper - eb.lower).array() > (eg.upper - eg.lower).array()).all());
}

TEST_CASE("yield forecasts") {
  const Small s;
  const SplineOperators& ops = s.sys.spline(0);
  GaussianMoments flat;
  flat.mean = VectorXd::Constant(5, 0.02);
  flat.cov = MatrixXd::Zero(5, 5);
  const GaussianMoments y = forecast_yields(flat, ops);
  CHECK((y.mean.array() - 0.02).abs().maxCoeff() < 1e-15);
  CHECK(y.cov.isZero());

  const ScenarioModel m = ScenarioModel::from_params(s.sys, s.params);
  const GaussianMoments g = gaussian_moments(m, s.x, 12);
  const GaussianMoments gy = forecast_yields(g, ops);
  MatrixXd smap = MatrixXd::Zero(5, 5);
  for (Index i = 0; i < 5; ++i) smap(i, i) = 1.0 / ops.grid()[static_cast<std::size_t>(i)];
  const MatrixXd want = smap * ops.integral() * g.cov * ops.integral().transpose() * smap.transpose();
  CHECK((gy.cov - want).cwiseAbs().maxCoeff() < 1e-18);

  GaussianMoments twice = g;
  twice.cov *= 2.0;
  CHECK((forecast_yields(twice, ops).cov.diagonal() - 2.0 * gy.cov.diagonal()).cwiseAbs().maxCoeff() < 1e-18);

  const int n = 200000;
  const auto e = simulate_checkpoints(m, s.x, {12}, n, ForecastMethod::gaussian_mc, 21);
  const Ensemble ey = forecast_yields(e[0], ops);
  const VectorXd mean = ey.paths.colwise().mean().transpose();
  const MatrixXd cov = sample_cov(ey.paths, mean);
  for (Index i = 0; i < 5; ++i) {
    CHECK(std::abs(mean(i) - gy.mean(i)) < 3 * std::sqrt(gy.cov(i, i) / n));
    CHECK(std::abs(cov(i, i) - gy.cov(i, i)) < 3 * std::sqrt(2.0 / n) * gy.cov(i, i));
  }
}

TEST_CASE("full-rank PCA loading reproduces the full-covariance ensemble") {
  const Small s;
  const ScenarioModel m = ScenarioModel::from_params(s.sys, s.params);
  const MatrixXd c = m.volatility * m.volatility.transpose();
  const PcaResult pca = select_components(decompose(c), 1.0);
  const ScenarioModel w = m.with_volatility(reduced_volatility(pca));
  const GaussianMoments full = gaussian_moments(m, s.x, 12);
  const GaussianMoments red = gaussian_moments(w, s.x, 12);
  CHECK((full.cov - red.cov).cwiseAbs().maxCoeff() < 1e-10 * full.cov.cwiseAbs().maxCoeff());

  const int n = 100000;
  const auto e = simulate_checkpoints(w, s.x, {12}, n, ForecastMethod::gaussian_mc, 3);
  const VectorXd mean = e[0].paths.colwise().mean().transpose();
  const MatrixXd cov = sample_cov(e[0].paths, mean);
  for (Index i = 0; i < 5; ++i) {
    CHECK(std::abs(mean(i) - full.mean(i)) < 3 * std::sqrt(full.cov(i, i) / n));
    CHECK(std::abs(cov(i, i) - full.cov(i, i)) < 3 * std::sqrt(2.0 / n) * full.cov(i, i));
  }

  const auto parts = block_moments(full, s.sys, 0);
  CHECK(parts.mean == full.mean);
}
