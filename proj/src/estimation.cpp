#include "mchjm/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mchjm/log.hpp"

namespace mchjm {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Likelihood at fixed Gamma, evaluated from sum y y' and sum y.
class Objective {
 public:
  Objective(const EstimationWindow& w, const RiskPremiumBlocks& blocks, const Eigen::MatrixXd& gamma,
            const Eigen::MatrixXd& chol)
      : dt_(w.dt()), len_(static_cast<double>(w.length())), chol_(chol), ind_(blocks.indicator()) {
    syy_ = w.y.transpose() * w.y;
    ysum_ = w.y.colwise().sum().transpose();
    hg_ = w.sys->drift_integral().cwiseProduct(gamma);
    Eigen::LLT<Eigen::MatrixXd> llt(gamma);
    if (llt.info() != Eigen::Success) throw std::domain_error("correlation matrix is singular");
    logdet_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    ginv_ = llt.solve(Eigen::MatrixXd::Identity(gamma.rows(), gamma.cols()));
    g_syy_ = ginv_.cwiseProduct(syy_);
  }

  double operator()(const Eigen::VectorXd& omega, const Eigen::VectorXd& lambda_blocks) const {
    const Index d = omega.size();
    const Eigen::VectorXd mu =
        omega.cwiseProduct(hg_ * omega) - omega.cwiseProduct(chol_ * (ind_ * lambda_blocks));
    const Eigen::VectorXd a = omega.cwiseInverse();
    const Eigen::VectorXd am = a.cwiseProduct(mu) * dt_;
    const Eigen::VectorXd ay = a.cwiseProduct(ysum_);
    const Eigen::VectorXd g_am = ginv_ * am;
    const double quad = (a.dot(g_syy_ * a) - 2.0 * ay.dot(g_am) + len_ * am.dot(g_am)) / dt_;
    return 0.5 * len_ * static_cast<double>(d) * kLog2Pi + 0.5 * len_ * logdet_ +
           len_ * omega.array().log().sum() + 0.5 * quad;
  }

 private:
  double dt_;
  double len_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd ind_;
  Eigen::MatrixXd syy_;
  Eigen::VectorXd ysum_;
  Eigen::MatrixXd hg_;
  Eigen::MatrixXd ginv_;
  Eigen::MatrixXd g_syy_;
  double logdet_ = 0.0;
};

bool changed(double prev, double next, double tol) {
  const double diff = std::abs(next - prev);
  if (std::abs(prev) < 1e-12) return diff >= tol;
  return diff >= tol * std::abs(prev);
}

Eigen::MatrixXd normalized_moments(const Eigen::MatrixXd& eta) {
  const Index d = eta.cols();
  Eigen::MatrixXd q = eta.transpose() * eta / static_cast<double>(eta.rows());
  Eigen::VectorXd scale(d);
  for (Index i = 0; i < d; ++i) scale(i) = q(i, i) > 0.0 ? 1.0 / std::sqrt(q(i, i)) : 0.0;
  Eigen::MatrixXd rho = scale.asDiagonal() * q * scale.asDiagonal();
  rho.diagonal().setOnes();
  return rho;
}

Eigen::VectorXd pack_theta(const ModelParams& p) {
  Eigen::VectorXd t(p.lambda_blocks.size() + p.omega.size());
  t << p.lambda_blocks, p.omega;
  return t;
}

std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x62u};
  return std::mt19937_64(seq);
}

}  // namespace

EstimationWindow::EstimationWindow(const CurveSystem& system, Eigen::MatrixXd y_series)
    : sys(&system), y(std::move(y_series)) {
  if (y.cols() != system.dimension()) throw std::invalid_argument("y-series dimension mismatch");
  if (y.rows() < 2) throw std::invalid_argument("estimation window needs at least two observations");
  if (!y.allFinite()) throw std::invalid_argument("y-series has missing or non-finite entries");
  if (y.rows() < y.cols() + 1) {
    log_warning("estimation window shorter than D + 1 observations (L = " + std::to_string(y.rows()) + ")");
  }
}

Eigen::VectorXd EstimationResult::theta() const { return pack_theta(params); }

std::vector<std::string> EstimationResult::theta_names(const CurveSystem& sys) const {
  std::vector<std::string> names;
  for (std::size_t b = 0; b < params.blocks.count(); ++b) names.push_back(params.blocks.block(b).name);
  for (Index i = 0; i < params.omega.size(); ++i) names.push_back("omega_" + sys.component_label(i));
  return names;
}

Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& x) {
  const Index d = x.cols();
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = c.transpose() * c;
  Eigen::VectorXd scale(d);
  for (Index i = 0; i < d; ++i) scale(i) = cov(i, i) > 0.0 ? 1.0 / std::sqrt(cov(i, i)) : 0.0;
  Eigen::MatrixXd rho = scale.asDiagonal() * cov * scale.asDiagonal();
  rho.diagonal().setOnes();
  return rho;
}

Eigen::MatrixXd residuals(const EstimationWindow& window, const ModelParams& params) {
  if ((params.omega.array() <= 0.0).any()) throw std::domain_error("residuals need positive volatilities");
  const double dt = window.dt();
  const Eigen::VectorXd m = drift_from_params(*window.sys, params) * dt;
  const Eigen::VectorXd inv = (params.omega * std::sqrt(dt)).cwiseInverse();
  return (window.y.rowwise() - m.transpose()) * inv.asDiagonal();
}

double neg_log_likelihood(const EstimationWindow& window, const ModelParams& params) {
  const Eigen::MatrixXd eta = residuals(window, params);
  Eigen::LLT<Eigen::MatrixXd> llt(params.gamma);
  if (llt.info() != Eigen::Success) throw std::domain_error("correlation matrix is singular");
  const double len = static_cast<double>(window.length());
  const double d = static_cast<double>(params.omega.size());
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Eigen::MatrixXd z = llt.matrixL().solve(eta.transpose());
  return 0.5 * len * d * kLog2Pi + 0.5 * len * logdet + len * params.omega.array().log().sum() +
         0.5 * z.squaredNorm();
}

double neg_log_likelihood_fast(const EstimationWindow& window, const ModelParams& params) {
  if ((params.omega.array() <= 0.0).any()) throw std::domain_error("likelihood needs positive volatilities");
  Objective obj(window, params.blocks, params.gamma, params.chol);
  return obj(params.omega, params.lambda_blocks);
}

ModelParams initial_params(const EstimationWindow& window, const RiskPremiumBlocks& blocks,
                           const FitOptions& options) {
  const Index d = window.y.cols();
  const double len = static_cast<double>(window.length());
  const Eigen::MatrixXd c = window.y.rowwise() - window.y.colwise().mean();
  Eigen::VectorXd omega(d);
  for (Index i = 0; i < d; ++i) {
    const double sd = std::sqrt(c.col(i).squaredNorm() / (len - 1.0)) / std::sqrt(window.dt());
    omega(i) = std::clamp(sd, options.omega_min, options.omega_max);
  }
  return make_params(std::move(omega), sample_correlation(window.y), blocks,
                     Eigen::VectorXd::Zero(static_cast<Index>(blocks.count())));
}

EstimationResult fit(const EstimationWindow& window, const RiskPremiumBlocks& blocks, const FitOptions& options) {
  if (blocks.dimension() != window.sys->dimension()) {
    throw std::invalid_argument("risk-premium blocks do not match the curve system");
  }
  if (!(options.tol > 0.0) || options.max_iters < 1) throw std::invalid_argument("invalid fit options");

  EstimationResult res;
  res.params = initial_params(window, blocks, options);
  res.theta_path.push_back(res.theta());

  Eigen::VectorXd omega = res.params.omega;
  Eigen::VectorXd lam = res.params.lambda_blocks;
  Eigen::MatrixXd rho = res.params.gamma;
  CorrelationFactor gamma{res.params.gamma, res.params.chol, false};
  const Index nb = lam.size();
  const Index d = omega.size();
  const double log_lo = std::log(options.omega_min);
  const double log_hi = std::log(options.omega_max);
  const std::uintmax_t brent_iters = 200;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    const Objective obj(window, blocks, gamma.gamma, gamma.chol);
    const Eigen::VectorXd theta_prev = pack_theta(res.params);
    double current = obj(omega, lam);
    if (!std::isfinite(current)) throw std::domain_error("non-finite likelihood during fit");

    for (Index b = 0; b < nb; ++b) {
      Eigen::VectorXd trial = lam;
      auto f = [&](double v) {
        trial(b) = v;
        return obj(omega, trial);
      };
      std::uintmax_t it = brent_iters;
      auto [x, fx] =
          boost::math::tools::brent_find_minima(f, -options.lambda_bound, options.lambda_bound, options.brent_bits, it);
      if (fx <= current) {
        lam(b) = x;
        current = fx;
      }
      if (options.record_trace) res.trace.push_back(current);
    }
    for (Index j = 0; j < d; ++j) {
      Eigen::VectorXd trial = omega;
      auto f = [&](double v) {
        trial(j) = std::exp(v);
        return obj(trial, lam);
      };
      std::uintmax_t it = brent_iters;
      auto [x, fx] = boost::math::tools::brent_find_minima(f, log_lo, log_hi, options.brent_bits, it);
      if (fx <= current) {
        omega(j) = std::exp(x);
        current = fx;
      }
      if (options.record_trace) res.trace.push_back(current);
    }

    ModelParams at_sweep{omega, gamma.gamma, gamma.chol, blocks, lam};
    const Eigen::MatrixXd next_rho = normalized_moments(residuals(window, at_sweep));

    bool moved = false;
    const Eigen::VectorXd theta_next = pack_theta(at_sweep);
    for (Index i = 0; i < theta_next.size() && !moved; ++i) moved = changed(theta_prev(i), theta_next(i), options.tol);
    for (Index i = 0; i < d && !moved; ++i) {
      for (Index j = 0; j < i && !moved; ++j) moved = changed(rho(i, j), next_rho(i, j), options.tol);
    }

    rho = next_rho;
    gamma = factor_correlation(rho);
    res.params = ModelParams{omega, gamma.gamma, gamma.chol, blocks, lam};
    res.theta_path.push_back(theta_next);
    res.n_iters = iter;
    if (!moved) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) {
    log_warning("fit stopped after " + std::to_string(res.n_iters) + " sweeps without meeting the tolerance");
  }
  res.neg_log_lik = neg_log_likelihood(window, res.params);
  if (!std::isfinite(res.neg_log_lik)) throw std::domain_error("non-finite likelihood at the fitted parameters");
  return res;
}

EstimationResult bootstrap_errors(const EstimationWindow& window, EstimationResult result,
                                  const BootstrapOptions& boot, const FitOptions& options) {
  if (boot.n_boot < 1) throw std::invalid_argument("bootstrap needs at least one replica");
  if (!result.converged) log_warning("bootstrapping a fit that did not converge");

  const ModelParams& est = result.params;
  const double dt = window.dt();
  const Eigen::MatrixXd eta = residuals(window, est);
  const Eigen::RowVectorXd m = (drift_from_params(*window.sys, est) * dt).transpose();
  const Eigen::RowVectorXd scale = (est.omega * std::sqrt(dt)).transpose();
  const Index len = window.length();
  const Eigen::VectorXd theta_hat = result.theta();
  const Index np = theta_hat.size();

  std::vector<Eigen::VectorXd> thetas(static_cast<std::size_t>(boot.n_boot));
  std::vector<char> ok(static_cast<std::size_t>(boot.n_boot), 0);
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (int r = next++; r < boot.n_boot; r = next++) {
      auto eng = replica_engine(boot.seed, static_cast<std::uint64_t>(r));
      std::uniform_int_distribution<Index> pick(0, len - 1);
      Eigen::MatrixXd ystar(len, eta.cols());
      for (Index k = 0; k < len; ++k) ystar.row(k) = m + eta.row(pick(eng)).cwiseProduct(scale);
      try {
        EstimationWindow w(*window.sys, std::move(ystar));
        EstimationResult rr = fit(w, est.blocks, options);
        Eigen::VectorXd th = rr.theta();
        if (th.allFinite() && std::isfinite(rr.neg_log_lik)) {
          thetas[static_cast<std::size_t>(r)] = std::move(th);
          ok[static_cast<std::size_t>(r)] = 1;
        }
      } catch (const std::exception& e) {
        log_debug(std::string("bootstrap replica failed: ") + e.what());
      }
    }
  };

  int nthreads = boot.threads > 0 ? boot.threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::clamp(nthreads, 1, boot.n_boot);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BootstrapSummary sum;
  sum.n_boot = boot.n_boot;
  sum.seed = boot.seed;
  int good = 0;
  for (char c : ok) good += c;
  sum.n_failed = boot.n_boot - good;
  if (sum.n_failed > boot.max_failure_rate * boot.n_boot) {
    std::ostringstream msg;
    msg << "bootstrap aborted: " << sum.n_failed << " of " << boot.n_boot << " replica fits failed";
    throw std::runtime_error(msg.str());
  }
  sum.replicas.resize(good, np);
  for (int r = 0, row = 0; r < boot.n_boot; ++r) {
    if (ok[static_cast<std::size_t>(r)]) sum.replicas.row(row++) = thetas[static_cast<std::size_t>(r)].transpose();
  }
  const Eigen::VectorXd mean = sum.replicas.colwise().mean().transpose();
  sum.bias = mean - theta_hat;
  sum.std_errors = Eigen::VectorXd::Zero(np);
  if (good > 1) {
    const Eigen::MatrixXd c = sum.replicas.rowwise() - mean.transpose();
    sum.std_errors = (c.colwise().squaredNorm() / static_cast<double>(good - 1)).cwiseSqrt().transpose();
  }
  const auto names = result.theta_names(*window.sys);
  for (Index i = 0; i < np; ++i) {
    if (std::abs(sum.bias(i)) > sum.std_errors(i) && sum.std_errors(i) > 0.0) {
      log_warning("bootstrap bias of " + names[static_cast<std::size_t>(i)] + " exceeds its standard error");
    }
  }
  result.bootstrap = std::move(sum);
  return result;
}

}  // namespace mchjm
