#include "mchjm/spline_ops.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mchjm {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

MatrixXd derivative_matrix(const BucketGrid& s) {
  const Index k = static_cast<Index>(s.size());
  MatrixXd m = MatrixXd::Zero(k, k);

  {
    const double s1 = s[0], s2 = s[1], s3 = s[2];
    m(0, 0) = (2 * s1 - s3 - s2) / ((s2 - s1) * (s3 - s1));
    m(0, 1) = (s3 - s1) / ((s3 - s2) * (s2 - s1));
    m(0, 2) = (s1 - s2) / ((s3 - s2) * (s3 - s1));
  }
  for (Index i = 1; i + 1 < k; ++i) {
    const double lo = s[i - 1], mid = s[i], hi = s[i + 1];
    const double a = (mid - hi) / ((mid - lo) * (hi - lo));
    const double c = (mid - lo) / ((hi - mid) * (hi - lo));
    m(i, i - 1) = a;
    m(i, i) = -a - c;
    m(i, i + 1) = c;
  }
  {
    const double s1 = s[k - 3], s2 = s[k - 2], s3 = s[k - 1];
    m(k - 1, k - 3) = (s3 - s2) / ((s2 - s1) * (s3 - s1));
    m(k - 1, k - 2) = (s1 - s3) / ((s2 - s1) * (s3 - s2));
    m(k - 1, k - 1) = (2 * s3 - s2 - s1) / ((s3 - s2) * (s3 - s1));
  }
  return m;
}

// Second divided difference g[s_j, s_{j+1}, s_{j+2}] as a row operator.
Eigen::RowVectorXd second_divided_difference(const BucketGrid& s, Index j) {
  const double s1 = s[j], s2 = s[j + 1], s3 = s[j + 2];
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Index>(s.size()));
  row(j) = 1.0 / ((s2 - s1) * (s3 - s1));
  row(j + 1) = -1.0 / ((s3 - s2) * (s2 - s1));
  row(j + 2) = 1.0 / ((s3 - s2) * (s3 - s1));
  return row;
}

std::pair<MatrixXd, MatrixXd> coefficient_matrices(const BucketGrid& s, const MatrixXd& m) {
  const Index k = static_cast<Index>(s.size());
  MatrixXd mp = MatrixXd::Zero(k, k);
  MatrixXd mpp = MatrixXd::Zero(k, k);

  // End pieces are parabolas: c is the second divided difference, d = 0.
  mp.row(0) = second_divided_difference(s, 0);
  mp.row(k - 2) = second_divided_difference(s, k - 3);

  for (Index h = 1; h + 2 < k; ++h) {
    const double dx = s[h + 1] - s[h];
    Eigen::RowVectorXd slope = Eigen::RowVectorXd::Zero(k);
    slope(h) = -1.0 / dx;
    slope(h + 1) = 1.0 / dx;
    mp.row(h) = (3.0 * slope - 2.0 * m.row(h) - m.row(h + 1)) / dx;
    mpp.row(h) = (m.row(h) + m.row(h + 1) - 2.0 * slope) / (dx * dx);
  }
  return {std::move(mp), std::move(mpp)};
}

}  // namespace

SplineOperators::SplineOperators(BucketGrid grid) : grid_(std::move(grid)) {
  m_ = derivative_matrix(grid_);
  std::tie(mp_, mpp_) = coefficient_matrices(grid_, m_);

  const Index k = static_cast<Index>(grid_.size());
  p_ = MatrixXd::Zero(k, k);
  p_(0, 0) = grid_[0];
  for (Index i = 1; i < k; ++i) {
    const Index h = i - 1;
    const double dx = grid_[h + 1] - grid_[h];
    p_.row(i) = p_.row(h) + dx * dx / 2.0 * m_.row(h) + dx * dx * dx / 3.0 * mp_.row(h) +
                dx * dx * dx * dx / 4.0 * mpp_.row(h);
    p_(i, h) += dx;
  }
}

std::size_t SplineOperators::piece_index(double x) const {
  if (!(x >= 0.0) || x > grid_.back() * (1.0 + 1e-12)) {
    throw std::domain_error("spline evaluation at " + std::to_string(x) +
                            " outside [0, " + std::to_string(grid_.back()) + "]");
  }
  auto values = grid_.values();
  auto it = std::upper_bound(values.begin(), values.end(), x);
  std::size_t idx = static_cast<std::size_t>(it - values.begin());
  // idx is the first bucket strictly above x; the piece starts one before.
  if (idx == 0) return 0;
  return std::min(idx - 1, grid_.size() - 2);
}

Eigen::RowVectorXd SplineOperators::value_weights(double x) const {
  const Index k = static_cast<Index>(size());
  Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(k);
  if (x <= grid_.front()) {
    (void)piece_index(x);
    w(0) = 1.0;
    return w;
  }
  const Index h = static_cast<Index>(piece_index(x));
  const double t = x - grid_[h];
  w = t * m_.row(h) + t * t * mp_.row(h) + t * t * t * mpp_.row(h);
  w(h) += 1.0;
  return w;
}

Eigen::RowVectorXd SplineOperators::integral_weights(double x) const {
  const Index k = static_cast<Index>(size());
  Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(k);
  if (x <= grid_.front()) {
    (void)piece_index(x);
    w(0) = x;
    return w;
  }
  const Index h = static_cast<Index>(piece_index(x));
  const double t = x - grid_[h];
  w = p_.row(h) + t * t / 2.0 * m_.row(h) + t * t * t / 3.0 * mp_.row(h) +
      t * t * t * t / 4.0 * mpp_.row(h);
  w(h) += t;
  return w;
}

Eigen::MatrixXd SplineOperators::cross_integral(const BucketGrid& targets) const {
  MatrixXd out(static_cast<Index>(targets.size()), static_cast<Index>(size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::size_t same = grid_.find(targets[i]);
    out.row(static_cast<Index>(i)) =
        same != BucketGrid::npos ? Eigen::RowVectorXd(p_.row(static_cast<Index>(same)))
                                 : integral_weights(targets[i]);
  }
  return out;
}

Eigen::MatrixXd build_derivative_matrix(const BucketGrid& grid) {
  return derivative_matrix(grid);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_c_d_matrices(const BucketGrid& grid) {
  return coefficient_matrices(grid, derivative_matrix(grid));
}

Eigen::MatrixXd build_integral_matrix(const BucketGrid& grid) {
  return SplineOperators(grid).integral();
}

Eigen::MatrixXd build_cross_integral_matrix(const BucketGrid& grid_f, const BucketGrid& grid_d) {
  return SplineOperators(grid_f).cross_integral(grid_d);
}

}  // namespace mchjm
