#pragma once

#include <Eigen/Dense>
#include <utility>

#include "mchjm/grid.hpp"

namespace mchjm {

/// Bessel (Hermite) cubic spline on a bucket grid, expressed as linear
/// operators acting on the vector g of node values:
///
///   g_spline(x) = a_h + b_h t + c_h t^2 + d_h t^3,  t = x - s_h,  s_h <= x <= s_{h+1}
///   a = g,  b = M g,  c = M' g,  d = M'' g
///
/// Node slopes b are three-point parabola slopes (one-sided at both ends).
/// The first and last pieces are the parabolas through their three nearest
/// nodes, so d_1 = d_{K-1} = 0. Below s_1 the spline is extrapolated flat;
/// evaluation beyond s_K is rejected.
class SplineOperators {
 public:
  explicit SplineOperators(BucketGrid grid);

  const BucketGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

  /// K x K first-derivative operator M (node slopes b).
  const Eigen::MatrixXd& derivative() const { return m_; }
  /// K x K operator M' for quadratic coefficients c; row K is zero.
  const Eigen::MatrixXd& quadratic() const { return mp_; }
  /// K x K operator M'' for cubic coefficients d; rows 1, K-1 and K are zero.
  const Eigen::MatrixXd& cubic() const { return mpp_; }
  /// K x K integral operator P: (P g)_i = int_0^{s_i} g_spline(u) du.
  const Eigen::MatrixXd& integral() const { return p_; }

  /// Row vector w with w.g = g_spline(x), for 0 <= x <= s_K.
  Eigen::RowVectorXd value_weights(double x) const;
  /// Row vector w with w.g = int_0^x g_spline(u) du, for 0 <= x <= s_K.
  Eigen::RowVectorXd integral_weights(double x) const;
  /// Rows integrate the spline from 0 to each bucket of `targets`.
  Eigen::MatrixXd cross_integral(const BucketGrid& targets) const;

 private:
  std::size_t piece_index(double x) const;

  BucketGrid grid_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd mp_;
  Eigen::MatrixXd mpp_;
  Eigen::MatrixXd p_;
};

Eigen::MatrixXd build_derivative_matrix(const BucketGrid& grid);
/// Returns (M', M'').
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_c_d_matrices(const BucketGrid& grid);
Eigen::MatrixXd build_integral_matrix(const BucketGrid& grid);
/// K_d x K_f matrix integrating the spline built on `grid_f` up to each
/// bucket of `grid_d`.
Eigen::MatrixXd build_cross_integral_matrix(const BucketGrid& grid_f, const BucketGrid& grid_d);

}  // namespace mchjm
