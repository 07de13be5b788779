#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mchjm/dynamics.hpp"

namespace mchjm {

/// L x D panel of observed y-vectors for one curve system.
struct EstimationWindow {
  const CurveSystem* sys = nullptr;
  Eigen::MatrixXd y;

  EstimationWindow(const CurveSystem& system, Eigen::MatrixXd y_series);
  Index length() const { return y.rows(); }
  double dt() const { return sys->dt(); }
};

struct FitOptions {
  double tol = 1e-4;
  int max_iters = 500;
  double lambda_bound = 50.0;
  double omega_min = 1e-8;
  double omega_max = 10.0;
  /// Bits of precision requested from the 1-D minimizer.
  int brent_bits = 40;
  /// Keep the negative log-likelihood after every accepted sub-step.
  bool record_trace = false;
};

struct BootstrapSummary {
  int n_boot = 0;
  int n_failed = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd std_errors;  ///< over theta = (lambda blocks, omega)
  Eigen::VectorXd bias;        ///< replica mean minus point estimate
  Eigen::MatrixXd replicas;    ///< successful replicas, one theta per row
};

struct EstimationResult {
  ModelParams params;
  std::vector<Eigen::VectorXd> theta_path;  ///< theta after each sweep, index 0 = start
  int n_iters = 0;
  bool converged = false;
  double neg_log_lik = 0.0;
  std::vector<double> trace;
  std::optional<BootstrapSummary> bootstrap;

  /// theta = (lambda blocks, omega_1..omega_D).
  Eigen::VectorXd theta() const;
  std::vector<std::string> theta_names(const CurveSystem& sys) const;
};

/// eta_kj = (y_kj - mu_j dt) / (omega_j sqrt(dt)).
Eigen::MatrixXd residuals(const EstimationWindow& window, const ModelParams& params);

/// Negative log-likelihood of the window, summed over residual rows:
///   LD/2 ln 2pi + L/2 ln det Gamma + L sum ln omega_i + 1/2 sum_k eta_k' Gamma^-1 eta_k
/// The ln(dt) constant is left out.
double neg_log_likelihood(const EstimationWindow& window, const ModelParams& params);
/// Same value from the sufficient statistics sum y y' and sum y; O(D^2) per call.
double neg_log_likelihood_fast(const EstimationWindow& window, const ModelParams& params);

/// Pearson starting point: lambda = 0, omega = sd(y)/sqrt(dt), Gamma = corr(y).
ModelParams initial_params(const EstimationWindow& window, const RiskPremiumBlocks& blocks,
                           const FitOptions& options = {});

/// Coordinate-wise maximum likelihood. Each sweep minimizes over one element
/// of theta at a time with Gamma held fixed, then re-estimates Gamma from the
/// normalized second moments of the residuals.
EstimationResult fit(const EstimationWindow& window, const RiskPremiumBlocks& blocks,
                     const FitOptions& options = {});

struct BootstrapOptions {
  int n_boot = 500;
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = hardware concurrency
  double max_failure_rate = 0.05;
};

/// Residual bootstrap: resamples rows of the fitted residuals, rebuilds the
/// y-series with the fitted drift and volatilities and refits each replica.
/// Throws std::runtime_error when more than max_failure_rate replicas fail.
EstimationResult bootstrap_errors(const EstimationWindow& window, EstimationResult result,
                                  const BootstrapOptions& boot = {}, const FitOptions& options = {});

/// Sample correlation of the columns of `x` (zero-variance columns get a unit row).
Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& x);

}  // namespace mchjm
