#include "mchjm/curve.hpp"

#include <cmath>
#include <stdexcept>

namespace mchjm {
namespace {

using Eigen::Index;

void require_grid(const BucketGrid& data, const SplineOperators& ops, const char* what) {
  if (!(data.size() == ops.size() && data == ops.grid())) {
    throw std::invalid_argument(std::string(what) + ": snapshot grid does not match spline grid");
  }
}

Eigen::VectorXd grid_vector(const BucketGrid& g) {
  return Eigen::Map<const Eigen::VectorXd>(g.values().data(), static_cast<Index>(g.size()));
}

}  // namespace

CurveSnapshot::CurveSnapshot(Date d, BucketGrid g, Eigen::VectorXd v)
    : date(d), grid(std::move(g)), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw std::invalid_argument("curve snapshot length does not match its grid");
  }
  if (!values.allFinite()) throw std::invalid_argument("curve snapshot has non-finite values");
}

CurveHistory::CurveHistory(std::string curve_id, double tenor, BucketGrid grid,
                           std::vector<Date> dates, Eigen::MatrixXd values)
    : curve_id_(std::move(curve_id)),
      tenor_(tenor),
      grid_(std::move(grid)),
      dates_(std::move(dates)),
      values_(std::move(values)) {
  if (tenor_ < 0.0) throw std::invalid_argument("negative tenor for curve " + curve_id_);
  if (static_cast<std::size_t>(values_.rows()) != dates_.size() ||
      static_cast<std::size_t>(values_.cols()) != grid_.size()) {
    throw std::invalid_argument("curve history shape mismatch for " + curve_id_);
  }
  for (std::size_t t = 1; t < dates_.size(); ++t) {
    if (!(dates_[t - 1] < dates_[t])) {
      throw std::invalid_argument("dates not strictly increasing in " + curve_id_ + " at " +
                                  dates_[t].iso());
    }
  }
  if (!values_.allFinite()) throw std::invalid_argument("non-finite values in " + curve_id_);
}

CurveSnapshot CurveHistory::snapshot(std::size_t t) const {
  return CurveSnapshot(dates_.at(t), grid_, values_.row(static_cast<Index>(t)).transpose());
}

CurveHistory CurveHistory::sample_rows(std::size_t stride, std::size_t offset) const {
  if (stride == 0) throw std::invalid_argument("sampling stride must be positive");
  std::vector<Date> d;
  std::vector<Index> rows;
  for (std::size_t t = offset; t < dates_.size(); t += stride) {
    d.push_back(dates_[t]);
    rows.push_back(static_cast<Index>(t));
  }
  Eigen::MatrixXd v(static_cast<Index>(rows.size()), values_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) v.row(static_cast<Index>(r)) = values_.row(rows[r]);
  return CurveHistory(curve_id_, tenor_, grid_, std::move(d), std::move(v));
}

CurveSnapshot yields_to_discounts(const CurveSnapshot& yields) {
  const Eigen::VectorXd s = grid_vector(yields.grid);
  return CurveSnapshot(yields.date, yields.grid, (-s.array() * yields.values.array()).exp().matrix());
}

CurveSnapshot discounts_to_yields(const CurveSnapshot& discounts) {
  if ((discounts.values.array() <= 0.0).any()) {
    throw std::domain_error("discount factors must be positive");
  }
  const Eigen::VectorXd s = grid_vector(discounts.grid);
  return CurveSnapshot(discounts.date, discounts.grid,
                       (-discounts.values.array().log() / s.array()).matrix());
}

CurveSnapshot yields_to_forwards(const CurveSnapshot& yields, const SplineOperators& ops) {
  require_grid(yields.grid, ops, "yields_to_forwards");
  const Eigen::VectorXd s = grid_vector(yields.grid);
  Eigen::VectorXd f = yields.values + s.cwiseProduct(ops.derivative() * yields.values);
  return CurveSnapshot(yields.date, yields.grid, std::move(f));
}

CurveSnapshot forwards_to_yields(const CurveSnapshot& forwards, const SplineOperators& ops) {
  require_grid(forwards.grid, ops, "forwards_to_yields");
  const Eigen::VectorXd s = grid_vector(forwards.grid);
  Eigen::VectorXd y = (ops.integral() * forwards.values).cwiseQuotient(s);
  return CurveSnapshot(forwards.date, forwards.grid, std::move(y));
}

CurveSnapshot invert_yields_to_forwards(const CurveSnapshot& forwards, const SplineOperators& ops) {
  require_grid(forwards.grid, ops, "invert_yields_to_forwards");
  const Eigen::VectorXd s = grid_vector(forwards.grid);
  Eigen::MatrixXd map = s.asDiagonal() * ops.derivative();
  map.diagonal().array() += 1.0;
  Eigen::VectorXd y = map.partialPivLu().solve(forwards.values);
  return CurveSnapshot(forwards.date, forwards.grid, std::move(y));
}

Eigen::MatrixXd fra_exponent_operator(double tenor, const BucketGrid& target_grid,
                                      const SplineOperators& ops) {
  if (!(tenor > 0.0)) throw std::invalid_argument("FRA tenor must be positive");
  const Index k = static_cast<Index>(ops.size());
  Eigen::MatrixXd op(static_cast<Index>(target_grid.size()), k);
  for (std::size_t i = 0; i < target_grid.size(); ++i) {
    const double x = target_grid[i];
    if (x < tenor - 1e-12) {
      throw std::invalid_argument("FRA bucket " + target_grid.label(i) +
                                  " is shorter than the tenor");
    }
    const double start = std::max(x - tenor, 0.0);
    op.row(static_cast<Index>(i)) = x * ops.value_weights(x) - start * ops.value_weights(start);
  }
  return op;
}

CurveSnapshot tenor_yields_to_fra(const CurveSnapshot& yields, double tenor,
                                  const BucketGrid& target_grid, const SplineOperators& ops) {
  require_grid(yields.grid, ops, "tenor_yields_to_fra");
  const Eigen::VectorXd exponent = fra_exponent_operator(tenor, target_grid, ops) * yields.values;
  Eigen::VectorXd fra = (exponent.array().exp() - 1.0) / tenor;
  return CurveSnapshot(yields.date, target_grid, std::move(fra));
}

CurveSnapshot fra_to_tenor_yields(const CurveSnapshot& fra, double tenor, const SplineOperators& ops) {
  require_grid(fra.grid, ops, "fra_to_tenor_yields");
  const Eigen::MatrixXd op = fra_exponent_operator(tenor, fra.grid, ops);
  const Eigen::VectorXd rhs = (1.0 + tenor * fra.values.array()).log();
  Eigen::VectorXd y = op.partialPivLu().solve(rhs);
  return CurveSnapshot(fra.date, fra.grid, std::move(y));
}

CurveHistory subset_grid(const CurveHistory& hist, const BucketGrid& target) {
  std::vector<Index> cols;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const std::size_t j = hist.grid().find(target[i]);
    if (j == BucketGrid::npos) {
      throw std::invalid_argument("bucket " + target.label(i) + " absent from the grid of " +
                                  hist.curve_id());
    }
    cols.push_back(static_cast<Index>(j));
  }
  Eigen::MatrixXd v(hist.values().rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) v.col(static_cast<Index>(c)) = hist.values().col(cols[c]);
  return CurveHistory(hist.curve_id(), hist.tenor(), target, hist.dates(), std::move(v));
}

}  // namespace mchjm
