#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mchjm/backtest.hpp"
#include "mchjm/dynamics.hpp"
#include "mchjm/estimation.hpp"
#include "mchjm/io.hpp"
#include "mchjm/pca.hpp"
#include "mchjm/scenario.hpp"

namespace mchjm {

/// Envelopes of one window for one method and horizon, one per coverage level.
struct WindowForecast {
  ForecastMethod method;
  int horizon = 0;
  std::vector<ForecastEnvelope> envelopes;
};

struct WindowRecord {
  Index end = 0;  ///< index of the forecast origin in the state panel
  Date end_date;
  bool ok = false;
  std::string error;
  EstimationResult fit;
  PcaResult pca;
  std::vector<WindowForecast> forecasts;
};

struct RollingResult {
  std::vector<WindowRecord> windows;
  CoverageReport report;
  int failed = 0;
};

/// Sweeps estimation windows of `cfg.window` y-vectors over the panel, with
/// the forecast origin at the last state of each window. A window whose fit
/// fails is logged and left out of the coverage counts.
RollingResult run_rolling(const CurveSystem& sys, const StatePanel& panel, const RunConfig& cfg);

/// params.csv, pca.csv, envelopes/*.csv, coverage_report.csv/.txt, plotdata/*.csv.
void write_rolling_artifacts(const RollingResult& res, const CurveSystem& sys, const StatePanel& panel,
                             const RunConfig& cfg, const std::filesystem::path& dir);

/// Fits one window, optionally bootstraps it, and decomposes its covariance.
struct WindowFit {
  EstimationResult fit;
  PcaResult pca;
  Eigen::MatrixXd residuals;
};
WindowFit fit_window(const CurveSystem& sys, const Eigen::MatrixXd& y, const RunConfig& cfg, int n_boot,
                     std::uint64_t seed, int boot_threads);

/// Forecasts from `state` for every configured method and horizon.
std::vector<WindowForecast> forecast_window(const CurveSystem& sys, const WindowFit& wf, const Eigen::VectorXd& state,
                                            const RunConfig& cfg, std::uint64_t seed);

/// Covariance of y / sqrt(dt) implied by the fit: diag(omega) Gamma diag(omega).
Eigen::MatrixXd fitted_covariance(const ModelParams& params);

}  // namespace mchjm
