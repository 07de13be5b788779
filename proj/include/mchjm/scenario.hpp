#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mchjm/dynamics.hpp"

namespace mchjm {

enum class ForecastMethod { gaussian_closed_form, gaussian_mc, bootstrap };
/// exact_recursion: mean = sum_h A^h mu dt + A^k x.
/// paper_literal:   mean = mu k dt + A^k x.
enum class DriftMode { exact_recursion, paper_literal };

std::string_view to_string(ForecastMethod m);
std::string_view to_string(DriftMode m);
ForecastMethod parse_forecast_method(std::string_view s);
DriftMode parse_drift_mode(std::string_view s);

struct ForecastSpec {
  int horizon = 1;  ///< steps of dt
  int n_paths = 10000;
  std::vector<double> coverage{0.95, 0.99};
  ForecastMethod method = ForecastMethod::gaussian_mc;
  /// Only used by the closed form; simulated paths always follow the recursion.
  DriftMode drift_mode = DriftMode::exact_recursion;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// Drift, volatility loading and residual pool needed to propagate states.
struct ScenarioModel {
  const CurveSystem* sys = nullptr;
  Eigen::VectorXd drift;
  Eigen::MatrixXd volatility;  ///< D x N loading (Sigma, or W from PCA)
  Eigen::VectorXd omega;       ///< used by the bootstrap
  Eigen::MatrixXd residuals;   ///< pool of standardized residual rows

  static ScenarioModel from_params(const CurveSystem& sys, const ModelParams& params,
                                   Eigen::MatrixXd residual_pool = {});
  ScenarioModel with_volatility(Eigen::MatrixXd loading) const;
};

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

GaussianMoments gaussian_moments(const ScenarioModel& model, const Eigen::VectorXd& state, int k,
                                 DriftMode mode = DriftMode::exact_recursion);

/// Terminal states of simulated paths, one path per row.
struct Ensemble {
  int horizon = 0;
  Eigen::MatrixXd paths;
};

/// Simulates `n_paths` paths and keeps the states at each requested horizon
/// (sorted ascending). Paths are generated in chunks with their own random
/// substreams, so the result does not depend on the thread count.
std::vector<Ensemble> simulate_checkpoints(const ScenarioModel& model, const Eigen::VectorXd& state,
                                           const std::vector<int>& horizons, int n_paths, ForecastMethod method,
                                           std::uint64_t seed, int threads = 1);
Ensemble simulate_paths(const ScenarioModel& model, const Eigen::VectorXd& state, const ForecastSpec& spec);

struct ForecastEnvelope {
  double coverage = 0.0;
  std::string method;
  Eigen::VectorXd lower, upper, mean, sd;
  Eigen::VectorXd band_lower, band_upper;  ///< mean -/+ 2 sd
};

/// Empirical ((1-p)/2, (1+p)/2) quantiles (linear interpolation between order statistics).
ForecastEnvelope envelope(const Ensemble& ens, double p);
/// mean -/+ z_{(1+p)/2} sd.
ForecastEnvelope envelope(const GaussianMoments& mom, double p);

GaussianMoments block_moments(const GaussianMoments& mom, const CurveSystem& sys, std::size_t block);
Ensemble block_paths(const Ensemble& ens, const CurveSystem& sys, std::size_t block);

/// diag(1/s) P: forwards on the grid -> ZC yields.
Eigen::MatrixXd yield_map(const SplineOperators& ops);
GaussianMoments forecast_yields(const GaussianMoments& forwards, const SplineOperators& ops);
Ensemble forecast_yields(const Ensemble& forwards, const SplineOperators& ops);

}  // namespace mchjm
