#include "mchjm/fixture.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mchjm {

double FixtureTruth::omega_at(double s, bool tenor_curve) {
  const double base = 0.006 + 0.003 * s / (s + 2.0);
  return tenor_curve ? 1.1 * base : base;
}

double FixtureTruth::correlation(double s1, double s2, bool same_curve) {
  const double k = 0.3 + 0.7 * std::exp(-std::abs(s1 - s2) / 8.0);
  return same_curve ? k : 0.9 * k;
}

ModelParams FixtureTruth::params(const CurveSystem& sys, Index short_buckets) const {
  const Index d = sys.dimension();
  Eigen::VectorXd omega(d);
  Eigen::VectorXd mat(d);
  std::vector<std::size_t> curve(static_cast<std::size_t>(d));
  for (std::size_t b = 0; b < sys.block_count(); ++b) {
    for (Index i = 0; i < sys.block_size(b); ++i) {
      const Index k = sys.block_offset(b) + i;
      mat(k) = sys.grid(b)[static_cast<std::size_t>(i)];
      omega(k) = omega_at(mat(k), b > 0);
      curve[static_cast<std::size_t>(k)] = b;
    }
  }
  Eigen::MatrixXd gamma(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      gamma(i, j) = i == j ? 1.0
                           : correlation(mat(i), mat(j), curve[static_cast<std::size_t>(i)] == curve[static_cast<std::size_t>(j)]);
    }
  }
  RiskPremiumBlocks blocks(sys, short_buckets);
  Eigen::VectorXd lam(static_cast<Index>(blocks.count()));
  std::size_t next = 0;
  if (blocks.count() == sys.block_count()) {
    lam(0) = lambda_s;
    next = 1;
  } else {
    lam(0) = lambda_s;
    lam(1) = lambda_l;
    next = 2;
  }
  for (; next < blocks.count(); ++next) lam(static_cast<Index>(next)) = lambda_tenor;
  return make_params(std::move(omega), gamma, std::move(blocks), std::move(lam));
}

Eigen::VectorXd fixture_initial_state(const CurveSystem& sys) {
  Eigen::VectorXd x(sys.dimension());
  for (std::size_t b = 0; b < sys.block_count(); ++b) {
    for (Index i = 0; i < sys.block_size(b); ++i) {
      const double s = sys.grid(b)[static_cast<std::size_t>(i)];
      x(sys.block_offset(b) + i) = 0.01 + 0.025 * (1.0 - std::exp(-s / 6.0)) + (b > 0 ? 0.002 : 0.0);
    }
  }
  return x;
}

Eigen::MatrixXd simulate_states(const CurveSystem& sys, const ModelParams& params, const Eigen::VectorXd& x0,
                                int n_states, std::uint64_t seed) {
  if (n_states < 1) throw std::invalid_argument("need at least one state");
  const Index d = sys.dimension();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x66u};
  std::mt19937_64 eng(seq);
  std::normal_distribution<double> normal;
  const Eigen::VectorXd mu = drift_from_params(sys, params);
  const Eigen::MatrixXd vol = params.volatility();
  Eigen::MatrixXd states(n_states, d);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd eps(d);
  states.row(0) = x.transpose();
  for (int t = 1; t < n_states; ++t) {
    for (Index j = 0; j < d; ++j) eps(j) = normal(eng);
    x = step(sys, mu, vol, x, eps);
    states.row(t) = x.transpose();
  }
  return states;
}

Fixture make_fixture(const RunConfig& cfg, int n_states, std::uint64_t seed, const FixtureTruth& truth, Date start) {
  Fixture fx;
  auto sys = std::make_shared<const CurveSystem>(make_system(cfg));
  fx.truth = truth.params(*sys, cfg.short_buckets);
  fx.states = simulate_states(*sys, fx.truth, fixture_initial_state(*sys), n_states, seed);
  const int days = std::max(1, static_cast<int>(std::lround(cfg.dt * 364.0)));
  for (int t = 0; t < n_states; ++t) fx.dates.push_back(start.plus_days(days * t));

  for (std::size_t b = 0; b < sys->block_count(); ++b) {
    const auto& cc = cfg.curves[b];
    if (!cc.source_buckets.empty() && cc.source_buckets != cc.buckets) {
      throw std::invalid_argument("fixture needs tenor curves whose spline grid equals the model grid");
    }
    const BucketGrid& grid = sys->grid(b);
    const Index off = sys->block_offset(b);
    const Index n = sys->block_size(b);
    Eigen::MatrixXd yields(n_states, n);
    for (int t = 0; t < n_states; ++t) {
      CurveSnapshot snap(fx.dates[static_cast<std::size_t>(t)], grid, fx.states.row(t).segment(off, n).transpose());
      yields.row(t) = (b == 0 ? invert_yields_to_forwards(snap, sys->spline(0))
                              : fra_to_tenor_yields(snap, sys->block_tenor(b), sys->spline(b)))
                          .values.transpose();
    }
    fx.histories.emplace_back(sys->block_name(b), sys->block_tenor(b), grid, fx.dates, std::move(yields));
  }
  fx.sys = std::move(sys);
  return fx;
}

}  // namespace mchjm
