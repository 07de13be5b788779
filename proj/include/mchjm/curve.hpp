#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mchjm/grid.hpp"
#include "mchjm/spline_ops.hpp"

namespace mchjm {

/// One dated curve on a bucket grid. Rates are decimals: continuously
/// compounded for yields and forwards, simple for FRA.
struct CurveSnapshot {
  Date date;
  BucketGrid grid;
  Eigen::VectorXd values;

  CurveSnapshot(Date d, BucketGrid g, Eigen::VectorXd v);
};

/// Date-ordered panel of one curve on a fixed grid. Row t of `values` is the
/// curve observed at dates[t].
class CurveHistory {
 public:
  CurveHistory(std::string curve_id, double tenor, BucketGrid grid, std::vector<Date> dates,
               Eigen::MatrixXd values);

  const std::string& curve_id() const { return curve_id_; }
  /// Accrual tenor in years; 0 for the discounting curve.
  double tenor() const { return tenor_; }
  const BucketGrid& grid() const { return grid_; }
  const std::vector<Date>& dates() const { return dates_; }
  const Eigen::MatrixXd& values() const { return values_; }
  std::size_t size() const { return dates_.size(); }

  CurveSnapshot snapshot(std::size_t t) const;
  /// Every `stride`-th row starting at row `offset`.
  CurveHistory sample_rows(std::size_t stride, std::size_t offset = 0) const;

 private:
  std::string curve_id_;
  double tenor_;
  BucketGrid grid_;
  std::vector<Date> dates_;
  Eigen::MatrixXd values_;
};

CurveSnapshot yields_to_discounts(const CurveSnapshot& yields);
CurveSnapshot discounts_to_yields(const CurveSnapshot& discounts);

/// f_i = Y_i + s_i (M Y)_i.
CurveSnapshot yields_to_forwards(const CurveSnapshot& yields, const SplineOperators& ops);
/// Y_i = (P f)_i / s_i.
CurveSnapshot forwards_to_yields(const CurveSnapshot& forwards, const SplineOperators& ops);
/// Exact inverse of yields_to_forwards: Y = (I + diag(s) M)^{-1} f.
CurveSnapshot invert_yields_to_forwards(const CurveSnapshot& forwards, const SplineOperators& ops);

/// FRA_i = ((P(x_i - tenor) / P(x_i)) - 1) / tenor on the tenor curve, with
/// off-grid yields taken from the Bessel spline of `yields` (flat below s_1).
CurveSnapshot tenor_yields_to_fra(const CurveSnapshot& yields, double tenor,
                                  const BucketGrid& target_grid, const SplineOperators& ops);
/// Linear map `yields -> x_i Y(x_i) - (x_i - tenor) Y(x_i - tenor)` used by
/// the FRA transform; rows follow `target_grid`.
Eigen::MatrixXd fra_exponent_operator(double tenor, const BucketGrid& target_grid,
                                      const SplineOperators& ops);
/// Inverse of tenor_yields_to_fra when target grid equals the yield grid.
CurveSnapshot fra_to_tenor_yields(const CurveSnapshot& fra, double tenor, const SplineOperators& ops);

/// Restricts a history to `target` buckets, which must all be present.
CurveHistory subset_grid(const CurveHistory& hist, const BucketGrid& target);

}  // namespace mchjm
