#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "mchjm/curve.hpp"
#include "mchjm/dynamics.hpp"
#include "mchjm/io.hpp"

namespace mchjm {

/// True parameters of the bundled synthetic history.
struct FixtureTruth {
  double lambda_s = 1.5;
  double lambda_l = 0.0;
  double lambda_tenor = 0.8;
  /// Volatility for a bucket at maturity s (discount curve; tenor curves x1.1).
  static double omega_at(double s, bool tenor_curve);
  /// rho(s, s') = 0.3 + 0.7 exp(-|s - s'| / 8), damped by 0.9 across curves.
  static double correlation(double s1, double s2, bool same_curve);

  ModelParams params(const CurveSystem& sys, Index short_buckets) const;
};

/// Starting curve: upward sloping forwards, FRA 20 bp above.
Eigen::VectorXd fixture_initial_state(const CurveSystem& sys);

struct Fixture {
  std::shared_ptr<const CurveSystem> sys;
  ModelParams truth;
  std::vector<Date> dates;
  Eigen::MatrixXd states;                ///< T x D
  std::vector<CurveHistory> histories;   ///< ZC yields consistent with `states`
};

/// Simulates `n_states` weekly states from the model (Euler step with the
/// true parameters) and converts them back to ZC yields on the config grids.
/// Tenor curves must use their model grid as the spline grid.
Fixture make_fixture(const RunConfig& cfg, int n_states, std::uint64_t seed, const FixtureTruth& truth = {},
                     Date start = Date(2005, 2, 8));

/// Euler paths only (no yield conversion), T x D.
Eigen::MatrixXd simulate_states(const CurveSystem& sys, const ModelParams& params, const Eigen::VectorXd& x0,
                                int n_states, std::uint64_t seed);

}  // namespace mchjm
