#include "mchjm/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "mchjm/log.hpp"

namespace mchjm {
namespace {

constexpr Index kChunk = 256;

std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32), 0x73u};
  return std::mt19937_64(seq);
}

double quantile7(std::vector<double>& v, double q) {
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  double b = a;
  if (hi != lo) b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

void check_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("coverage must lie in (0, 1)");
}

}  // namespace

std::string_view to_string(ForecastMethod m) {
  switch (m) {
    case ForecastMethod::gaussian_closed_form:
      return "gaussian-closed-form";
    case ForecastMethod::gaussian_mc:
      return "gaussian-mc";
    case ForecastMethod::bootstrap:
      return "bootstrap";
  }
  return "?";
}

std::string_view to_string(DriftMode m) {
  return m == DriftMode::exact_recursion ? "exact-recursion" : "paper-literal";
}

ForecastMethod parse_forecast_method(std::string_view s) {
  if (s == "gaussian-closed-form" || s == "gaussian") return ForecastMethod::gaussian_closed_form;
  if (s == "gaussian-mc") return ForecastMethod::gaussian_mc;
  if (s == "bootstrap") return ForecastMethod::bootstrap;
  throw std::invalid_argument("unknown forecast method '" + std::string(s) + "'");
}

DriftMode parse_drift_mode(std::string_view s) {
  if (s == "exact-recursion") return DriftMode::exact_recursion;
  if (s == "paper-literal") return DriftMode::paper_literal;
  throw std::invalid_argument("unknown drift mode '" + std::string(s) + "'");
}

void ForecastSpec::validate() const {
  if (horizon < 1) throw std::invalid_argument("forecast horizon must be at least one step");
  for (double p : coverage) check_p(p);
  if (method != ForecastMethod::gaussian_closed_form && n_paths < 2) {
    throw std::invalid_argument("simulation needs at least two paths");
  }
}

ScenarioModel ScenarioModel::from_params(const CurveSystem& sys, const ModelParams& params,
                                         Eigen::MatrixXd residual_pool) {
  ScenarioModel m;
  m.sys = &sys;
  m.drift = drift_from_params(sys, params);
  m.volatility = params.volatility();
  m.omega = params.omega;
  m.residuals = std::move(residual_pool);
  if (m.residuals.size() > 0 && m.residuals.cols() != sys.dimension()) {
    throw std::invalid_argument("residual pool dimension mismatch");
  }
  return m;
}

ScenarioModel ScenarioModel::with_volatility(Eigen::MatrixXd loading) const {
  if (loading.rows() != sys->dimension()) throw std::invalid_argument("volatility loading has wrong row count");
  ScenarioModel m = *this;
  m.volatility = std::move(loading);
  return m;
}

GaussianMoments gaussian_moments(const ScenarioModel& model, const Eigen::VectorXd& state, int k, DriftMode mode) {
  if (k < 1) throw std::invalid_argument("horizon must be at least one step");
  const CurveSystem& sys = *model.sys;
  if (state.size() != sys.dimension()) throw std::invalid_argument("state dimension mismatch");
  const double dt = sys.dt();
  const Eigen::MatrixXd& a = sys.full_transition();
  const Eigen::MatrixXd q = model.volatility * model.volatility.transpose() * dt;
  const Eigen::VectorXd mdt = model.drift * dt;

  GaussianMoments out;
  Eigen::VectorXd x = state;
  Eigen::VectorXd drift_part = Eigen::VectorXd::Zero(state.size());
  out.cov = Eigen::MatrixXd::Zero(state.size(), state.size());
  for (int h = 0; h < k; ++h) {
    x = a * x;
    drift_part = a * drift_part + mdt;
    out.cov = a * out.cov * a.transpose() + q;
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  if (mode == DriftMode::exact_recursion) {
    out.mean = x + drift_part;
  } else {
    out.mean = x + mdt * static_cast<double>(k);
  }
  return out;
}

std::vector<Ensemble> simulate_checkpoints(const ScenarioModel& model, const Eigen::VectorXd& state,
                                           const std::vector<int>& horizons, int n_paths, ForecastMethod method,
                                           std::uint64_t seed, int threads) {
  const CurveSystem& sys = *model.sys;
  const Index d = sys.dimension();
  if (state.size() != d) throw std::invalid_argument("state dimension mismatch");
  if (n_paths < 1) throw std::invalid_argument("need at least one path");
  if (horizons.empty()) throw std::invalid_argument("no horizons requested");
  std::vector<int> hs = horizons;
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  if (hs.front() < 1) throw std::invalid_argument("horizon must be at least one step");
  const bool boot = method == ForecastMethod::bootstrap;
  if (method == ForecastMethod::gaussian_closed_form) {
    throw std::invalid_argument("closed form has no paths; use gaussian_moments");
  }
  if (boot && model.residuals.rows() == 0) throw std::invalid_argument("bootstrap needs a residual pool");
  if (boot && model.omega.size() != d) throw std::invalid_argument("bootstrap needs per-component volatilities");

  const double dt = sys.dt();
  const double sq = std::sqrt(dt);
  const Eigen::MatrixXd& a = sys.full_transition();
  const Eigen::VectorXd mdt = model.drift * dt;
  const Eigen::VectorXd boot_scale = boot ? Eigen::VectorXd(model.omega * sq) : Eigen::VectorXd();
  const Eigen::MatrixXd vol_dt = model.volatility * sq;
  const Index nshock = model.volatility.cols();
  const Index pool = model.residuals.rows();

  std::vector<Ensemble> out(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    out[i].horizon = hs[i];
    out[i].paths.resize(n_paths, d);
  }

  const Index nchunks = (n_paths + kChunk - 1) / kChunk;
  std::atomic<Index> next{0};
  auto worker = [&]() {
    for (Index c = next++; c < nchunks; c = next++) {
      auto eng = chunk_engine(seed, static_cast<std::uint64_t>(c));
      std::normal_distribution<double> normal;
      std::uniform_int_distribution<Index> pick(0, std::max<Index>(pool - 1, 0));
      const Index begin = c * kChunk;
      const Index n = std::min(kChunk, static_cast<Index>(n_paths) - begin);
      Eigen::MatrixXd x = state.replicate(1, n);
      Eigen::MatrixXd shock(boot ? d : nshock, n);
      std::size_t next_cp = 0;
      for (int step = 1; step <= hs.back(); ++step) {
        if (boot) {
          for (Index p = 0; p < n; ++p) shock.col(p) = model.residuals.row(pick(eng)).transpose();
          x = a * x;
          x.colwise() += mdt;
          x += boot_scale.asDiagonal() * shock;
        } else {
          for (Index p = 0; p < n; ++p) {
            for (Index j = 0; j < nshock; ++j) shock(j, p) = normal(eng);
          }
          x = a * x;
          x.colwise() += mdt;
          x.noalias() += vol_dt * shock;
        }
        if (step == hs[next_cp]) {
          out[next_cp].paths.middleRows(begin, n) = x.transpose();
          ++next_cp;
        }
      }
    }
  };

  const int nthreads = std::clamp(threads, 1, static_cast<int>(std::max<Index>(nchunks, 1)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (int t = 0; t < nthreads; ++t) workers.emplace_back(worker);
    for (auto& t : workers) t.join();
  }
  return out;
}

Ensemble simulate_paths(const ScenarioModel& model, const Eigen::VectorXd& state, const ForecastSpec& spec) {
  spec.validate();
  return simulate_checkpoints(model, state, {spec.horizon}, spec.n_paths, spec.method, spec.seed, spec.threads)
      .front();
}

ForecastEnvelope envelope(const Ensemble& ens, double p) {
  check_p(p);
  const Index n = ens.paths.rows();
  if (n < 2) throw std::invalid_argument("envelope needs at least two paths");
  if (static_cast<double>(n) < 20.0 / (1.0 - p)) {
    log_warning("only " + std::to_string(n) + " paths for a coverage-" + std::to_string(p) + " envelope");
  }
  const Index d = ens.paths.cols();
  ForecastEnvelope env;
  env.coverage = p;
  env.method = "empirical-quantile";
  env.lower.resize(d);
  env.upper.resize(d);
  env.mean = ens.paths.colwise().mean().transpose();
  env.sd.resize(d);
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Index j = 0; j < d; ++j) {
    Eigen::Map<Eigen::VectorXd>(col.data(), n) = ens.paths.col(j);
    env.sd(j) = std::sqrt((ens.paths.col(j).array() - env.mean(j)).square().sum() / static_cast<double>(n - 1));
    env.lower(j) = quantile7(col, 0.5 * (1.0 - p));
    env.upper(j) = quantile7(col, 0.5 * (1.0 + p));
  }
  env.band_lower = env.mean - 2.0 * env.sd;
  env.band_upper = env.mean + 2.0 * env.sd;
  return env;
}

ForecastEnvelope envelope(const GaussianMoments& mom, double p) {
  check_p(p);
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + p));
  ForecastEnvelope env;
  env.coverage = p;
  env.method = "gaussian";
  env.mean = mom.mean;
  env.sd = mom.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  env.lower = env.mean - z * env.sd;
  env.upper = env.mean + z * env.sd;
  env.band_lower = env.mean - 2.0 * env.sd;
  env.band_upper = env.mean + 2.0 * env.sd;
  return env;
}

GaussianMoments block_moments(const GaussianMoments& mom, const CurveSystem& sys, std::size_t block) {
  const Index off = sys.block_offset(block);
  const Index n = sys.block_size(block);
  return {mom.mean.segment(off, n), mom.cov.block(off, off, n, n)};
}

Ensemble block_paths(const Ensemble& ens, const CurveSystem& sys, std::size_t block) {
  return {ens.horizon, ens.paths.middleCols(sys.block_offset(block), sys.block_size(block))};
}

Eigen::MatrixXd yield_map(const SplineOperators& ops) {
  Eigen::VectorXd inv(static_cast<Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) inv(static_cast<Index>(i)) = 1.0 / ops.grid()[i];
  return inv.asDiagonal() * ops.integral();
}

GaussianMoments forecast_yields(const GaussianMoments& forwards, const SplineOperators& ops) {
  if (forwards.mean.size() != static_cast<Index>(ops.size())) {
    throw std::invalid_argument("forward moments do not match the spline grid");
  }
  const Eigen::MatrixXd t = yield_map(ops);
  return {t * forwards.mean, t * forwards.cov * t.transpose()};
}

Ensemble forecast_yields(const Ensemble& forwards, const SplineOperators& ops) {
  if (forwards.paths.cols() != static_cast<Index>(ops.size())) {
    throw std::invalid_argument("forward paths do not match the spline grid");
  }
  return {forwards.horizon, forwards.paths * yield_map(ops).transpose()};
}

}  // namespace mchjm
