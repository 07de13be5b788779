#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mchjm/dynamics.hpp"

namespace mchjm {

/// Eigen-decomposition of a covariance matrix with the retained components.
struct PcaResult {
  Eigen::VectorXd eigenvalues;   ///< descending, clipped at zero
  Eigen::MatrixXd eigenvectors;  ///< columns; largest-magnitude entry positive
  Index F = 0;                   ///< retained count, 0 until selected
  double phi = 0.0;              ///< explained fraction of the retained set
  double threshold = 0.0;
  Eigen::MatrixXd W;             ///< D x F, w_m = sqrt(gamma_m) O[:, m]

  /// Fraction of total variance carried by the first f eigenvalues.
  double explained(Index f) const;
};

/// Throws std::invalid_argument unless C is symmetric to 1e-10 (relative).
PcaResult decompose(const Eigen::MatrixXd& c);
/// Minimal F with explained(F) >= threshold; threshold must lie in (0, 1].
PcaResult select_components(PcaResult res, double threshold = 0.95);
/// Modified volatility functions W (D x F).
Eigen::MatrixXd reduced_volatility(const PcaResult& res);

/// Rows of W belonging to each curve block of the system.
std::vector<Eigen::MatrixXd> split_by_curve(const Eigen::MatrixXd& w, const CurveSystem& sys);
Eigen::MatrixXd join_curves(const std::vector<Eigen::MatrixXd>& parts);

}  // namespace mchjm
