#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mchjm/grid.hpp"
#include "mchjm/spline_ops.hpp"

namespace mchjm {

using Eigen::Index;

/// A tenor curve modelled through its FRA term structure.
struct TenorCurve {
  std::string curve_id;
  double tenor;  ///< accrual length in years
  BucketGrid grid;
};

/// Stacked discrete dynamics of one discounting forward curve plus any number
/// of FRA curves. Block 0 is the discount curve, block b >= 1 the (b-1)-th
/// tenor curve. The state has D = K + sum K_tenor components.
///
/// Each block evolves as x' = (I + M dt) x + mu dt + Sigma eps sqrt(dt).
class CurveSystem {
 public:
  static constexpr double kDefaultDt = 1.0 / 52.0;

  CurveSystem(std::string discount_id, BucketGrid discount_grid, std::vector<TenorCurve> tenors,
              double dt = kDefaultDt);

  double dt() const { return dt_; }
  Index dimension() const { return dim_; }
  std::size_t block_count() const { return splines_.size(); }
  Index block_offset(std::size_t block) const;
  Index block_size(std::size_t block) const;
  const std::string& block_name(std::size_t block) const;
  /// 0 for the discount block.
  double block_tenor(std::size_t block) const;
  const BucketGrid& grid(std::size_t block) const;
  const SplineOperators& spline(std::size_t block) const;
  /// "CURVE:label" for stacked component i.
  std::string component_label(Index i) const;

  /// I + M dt for one block; throws std::out_of_range on an unknown block.
  Eigen::MatrixXd transition_matrix(std::size_t block) const;
  const Eigen::MatrixXd& transition(std::size_t block) const;
  /// Block-diagonal D x D transition.
  const Eigen::MatrixXd& full_transition() const { return full_transition_; }
  /// D x D matrix with P_f and the cross integrals P_tenor stacked in the
  /// first K columns and zeros elsewhere.
  const Eigen::MatrixXd& drift_integral() const { return drift_integral_; }
  /// Largest |eigenvalue| of a block transition.
  double spectral_radius(std::size_t block) const;

 private:
  void check_block(std::size_t block) const;

  double dt_;
  Index dim_ = 0;
  std::vector<std::string> names_;
  std::vector<double> tenors_;
  std::vector<SplineOperators> splines_;
  std::vector<Index> offsets_;
  std::vector<Eigen::MatrixXd> transitions_;
  Eigen::MatrixXd full_transition_;
  Eigen::MatrixXd drift_integral_;
};

/// Step-wise constant grouping of the market-price-of-risk vector: a short
/// and a long block on the discount curve plus one block per tenor curve.
class RiskPremiumBlocks {
 public:
  struct Block {
    std::string name;
    Index begin;
    Index end;  ///< one past the last component
  };

  RiskPremiumBlocks() = default;
  /// `short_buckets` = number of leading discount buckets sharing lambda_s.
  /// With 0 or K the discount curve carries a single block.
  RiskPremiumBlocks(const CurveSystem& sys, Index short_buckets);
  RiskPremiumBlocks(std::vector<Block> blocks, Index dimension);

  std::size_t count() const { return blocks_.size(); }
  Index dimension() const { return dim_; }
  const Block& block(std::size_t i) const { return blocks_.at(i); }
  Index short_buckets() const { return short_buckets_; }

  Eigen::VectorXd expand(const Eigen::VectorXd& per_block) const;
  /// Block averages of a full D-vector.
  Eigen::VectorXd project(const Eigen::VectorXd& full) const;
  /// D x count() indicator matrix B with lambda = B lambda_blocks.
  Eigen::MatrixXd indicator() const;

 private:
  std::vector<Block> blocks_;
  Index dim_ = 0;
  Index short_buckets_ = 0;
};

/// Constant-volatility parametrisation Sigma = diag(omega) R with R R^T = Gamma.
struct ModelParams {
  Eigen::VectorXd omega;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd chol;
  RiskPremiumBlocks blocks;
  Eigen::VectorXd lambda_blocks;

  Eigen::VectorXd lambda() const { return blocks.expand(lambda_blocks); }
  Eigen::MatrixXd volatility() const { return omega.asDiagonal() * chol; }
  Eigen::MatrixXd covariance() const;
};

struct CorrelationFactor {
  Eigen::MatrixXd gamma;  ///< possibly repaired correlation
  Eigen::MatrixXd chol;   ///< lower triangular, chol * chol^T = gamma
  bool repaired = false;
};

/// Cholesky factor of a correlation matrix. When the matrix is not positive
/// definite its eigenvalues are clipped at 1e-10 and the diagonal is rescaled
/// back to one before factoring.
CorrelationFactor factor_correlation(const Eigen::MatrixXd& gamma);

/// Validates and assembles a parameter set (Gamma is repaired if needed).
ModelParams make_params(Eigen::VectorXd omega, const Eigen::MatrixXd& gamma, RiskPremiumBlocks blocks,
                        Eigen::VectorXd lambda_blocks);

/// Stacked forward + FRA state at one date.
struct StateVector {
  Date date;
  Eigen::VectorXd values;
};

/// mu = omega o (P o Gamma) omega - omega o (R lambda).
Eigen::VectorXd drift_from_params(const CurveSystem& sys, const ModelParams& params);

/// y = next - (I + M dt) prev, stacked over blocks.
Eigen::VectorXd compute_y(const CurveSystem& sys, const StateVector& prev, const StateVector& next);
/// Rows t = 1..T-1 of the y-series of a T x D state panel.
Eigen::MatrixXd compute_y_series(const CurveSystem& sys, const Eigen::MatrixXd& states);

/// One Euler step with D standard normal shocks `eps` (or N shocks for a
/// D x N volatility loading).
StateVector step(const CurveSystem& sys, const ModelParams& params, const StateVector& state,
                 const Eigen::VectorXd& eps);
Eigen::VectorXd step(const CurveSystem& sys, const Eigen::VectorXd& drift,
                     const Eigen::MatrixXd& volatility, const Eigen::VectorXd& state,
                     const Eigen::VectorXd& eps);

}  // namespace mchjm
