#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "mchjm/grid.hpp"

namespace mchjm {

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1_sf(double x);

inline constexpr double kChi2Crit95 = 3.841458820694124;
inline constexpr double kChi2Crit99 = 6.634896601021214;

struct KupiecResult {
  double lr = 0.0;
  double p_value = 1.0;  ///< probability, not percent
  bool reject95 = false;
  bool reject99 = false;

  /// "", "(*)" or "(**)".
  std::string flag() const;
};

/// Unconditional coverage LR for n1 exceedances out of n_obs at coverage p.
KupiecResult kupiec_lr(long n1, long n_obs, double p);

/// Exceedance indicators of one component at one horizon and coverage.
struct ExceedanceSeries {
  std::string bucket;
  int horizon = 0;
  double coverage = 0.0;
  std::vector<int> indicators;  ///< 1 when realized is outside [lower, upper]
  std::vector<int> sign;        ///< -1 below lower, +1 above upper, 0 inside
  long n0 = 0;
  long n1 = 0;
};

/// Rows of `lower`, `upper` are forecasts for `target_dates`; the realized
/// panel is looked up by date (std::invalid_argument when a date is missing).
std::vector<ExceedanceSeries> count_exceedances(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& upper,
                                                const std::vector<Date>& target_dates,
                                                const std::vector<Date>& realized_dates,
                                                const Eigen::MatrixXd& realized,
                                                const std::vector<std::string>& bucket_labels, int horizon,
                                                double coverage);

struct CoverageRow {
  std::string method;
  int horizon = 0;
  double coverage = 0.0;
  std::string bucket;
  long n_obs = 0;
  long n1 = 0;
  long n_below = 0;
  long n_above = 0;
  KupiecResult test;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;

  void add(const std::string& method, const ExceedanceSeries& s);
  void write_csv(std::ostream& out) const;
  /// One block per (method, horizon): bucket rows, then n1 / LR_UC / p-value
  /// columns for each coverage level.
  void write_table(std::ostream& out) const;
};

}  // namespace mchjm
