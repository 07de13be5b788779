#include "mchjm/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace mchjm {
namespace {

using Eigen::Index;

// n ln(n / (N q)) with 0 ln 0 = 0.
double xlogratio(long n, long total, double q) {
  if (n == 0) return 0.0;
  return static_cast<double>(n) * std::log(static_cast<double>(n) / (static_cast<double>(total) * q));
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

double chi2_1_sf(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

std::string KupiecResult::flag() const {
  if (reject99) return "(**)";
  if (reject95) return "(*)";
  return "";
}

KupiecResult kupiec_lr(long n1, long n_obs, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("coverage must lie in (0, 1)");
  if (n_obs <= 0 || n1 < 0 || n1 > n_obs) throw std::invalid_argument("need 0 <= n1 <= n_obs and n_obs > 0");
  const long n0 = n_obs - n1;
  KupiecResult r;
  r.lr = std::max(0.0, 2.0 * (xlogratio(n1, n_obs, 1.0 - p) + xlogratio(n0, n_obs, p)));
  r.p_value = chi2_1_sf(r.lr);
  r.reject95 = r.lr > kChi2Crit95;
  r.reject99 = r.lr > kChi2Crit99;
  return r;
}

std::vector<ExceedanceSeries> count_exceedances(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& upper,
                                                const std::vector<Date>& target_dates,
                                                const std::vector<Date>& realized_dates,
                                                const Eigen::MatrixXd& realized,
                                                const std::vector<std::string>& bucket_labels, int horizon,
                                                double coverage) {
  const Index n = lower.rows();
  const Index b = lower.cols();
  if (upper.rows() != n || upper.cols() != b || static_cast<Index>(target_dates.size()) != n ||
      realized.cols() != b || static_cast<Index>(realized_dates.size()) != realized.rows() ||
      static_cast<Index>(bucket_labels.size()) != b) {
    throw std::invalid_argument("count_exceedances: shape mismatch");
  }
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    auto it = std::lower_bound(realized_dates.begin(), realized_dates.end(), target_dates[static_cast<std::size_t>(k)]);
    if (it == realized_dates.end() || *it != target_dates[static_cast<std::size_t>(k)]) {
      throw std::invalid_argument("no realized curve on forecast target date " +
                                  target_dates[static_cast<std::size_t>(k)].iso());
    }
    rows[static_cast<std::size_t>(k)] = static_cast<Index>(it - realized_dates.begin());
  }

  std::vector<ExceedanceSeries> out(static_cast<std::size_t>(b));
  for (Index j = 0; j < b; ++j) {
    auto& s = out[static_cast<std::size_t>(j)];
    s.bucket = bucket_labels[static_cast<std::size_t>(j)];
    s.horizon = horizon;
    s.coverage = coverage;
    s.indicators.reserve(static_cast<std::size_t>(n));
    s.sign.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
      const double v = realized(rows[static_cast<std::size_t>(k)], j);
      const int sg = v < lower(k, j) ? -1 : (v > upper(k, j) ? 1 : 0);
      s.sign.push_back(sg);
      s.indicators.push_back(sg != 0 ? 1 : 0);
      s.n1 += sg != 0 ? 1 : 0;
    }
    s.n0 = static_cast<long>(n) - s.n1;
  }
  return out;
}

void CoverageReport::add(const std::string& method, const ExceedanceSeries& s) {
  CoverageRow row;
  row.method = method;
  row.horizon = s.horizon;
  row.coverage = s.coverage;
  row.bucket = s.bucket;
  row.n_obs = s.n0 + s.n1;
  row.n1 = s.n1;
  for (int sg : s.sign) {
    row.n_below += sg < 0;
    row.n_above += sg > 0;
  }
  row.test = kupiec_lr(row.n1, row.n_obs, row.coverage);
  rows.push_back(std::move(row));
}

void CoverageReport::write_csv(std::ostream& out) const {
  out << "method,horizon,coverage,bucket,n_obs,n1,n_below,n_above,lr_uc,p_value_pct,flag\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.horizon << ',' << fmt("%.2f", r.coverage) << ',' << r.bucket << ',' << r.n_obs << ','
        << r.n1 << ',' << r.n_below << ',' << r.n_above << ',' << fmt("%.6f", r.test.lr) << ','
        << fmt("%.6f", 100.0 * r.test.p_value) << ',' << r.test.flag() << '\n';
  }
}

void CoverageReport::write_table(std::ostream& out) const {
  // Group by (method, horizon); keep first-seen order of buckets and coverages.
  std::vector<std::pair<std::string, int>> groups;
  for (const auto& r : rows) {
    std::pair<std::string, int> key{r.method, r.horizon};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& [method, horizon] : groups) {
    std::vector<std::string> buckets;
    std::vector<double> levels;
    std::map<std::pair<std::string, double>, const CoverageRow*> cell;
    long n_obs = 0;
    for (const auto& r : rows) {
      if (r.method != method || r.horizon != horizon) continue;
      if (std::find(buckets.begin(), buckets.end(), r.bucket) == buckets.end()) buckets.push_back(r.bucket);
      if (std::find(levels.begin(), levels.end(), r.coverage) == levels.end()) levels.push_back(r.coverage);
      cell[{r.bucket, r.coverage}] = &r;
      n_obs = r.n_obs;
    }
    out << method << ", horizon " << horizon << " steps, n_obs = " << n_obs << '\n';
    out << std::string(14, ' ');
    for (double p : levels) out << fmt("| p = %-28.2f", p);
    out << '\n' << std::string(14, ' ');
    for (std::size_t i = 0; i < levels.size(); ++i) out << "| n1    LR_UC          p-value(%) ";
    out << '\n';
    for (const auto& b : buckets) {
      char name[32];
      std::snprintf(name, sizeof name, "%-14s", b.c_str());
      out << name;
      for (double p : levels) {
        auto it = cell.find({b, p});
        if (it == cell.end()) {
          out << "| " << std::string(32, ' ');
          continue;
        }
        const CoverageRow& r = *it->second;
        char buf[96];
        const std::string lr = fmt("%.2f", r.test.lr) + (r.test.flag().empty() ? "" : " " + r.test.flag());
        std::snprintf(buf, sizeof buf, "| %-5ld %-14s %-11.2f", r.n1, lr.c_str(), 100.0 * r.test.p_value);
        out << buf;
      }
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace mchjm
