#pragma once

#include <chrono>
#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mchjm {

/// Parses a time-to-maturity label such as "1d", "7d", "1m", "18m", "1y",
/// "1y6m" into a year fraction. Days count as d/365, months as m/12.
double parse_tenor_label(std::string_view label);

/// Inverse of parse_tenor_label for month-aligned values; anything else is
/// printed as a decimal year fraction.
std::string format_tenor_label(double years);

/// Strictly increasing, strictly positive time-to-maturity buckets (years).
/// Construction validates; the object is immutable afterwards.
class BucketGrid {
 public:
  static constexpr std::size_t kMinBuckets = 3;

  explicit BucketGrid(std::vector<double> maturities,
                      std::vector<std::string> labels = {});
  static BucketGrid from_labels(std::span<const std::string> labels);

  std::size_t size() const { return s_.size(); }
  double operator[](std::size_t i) const { return s_[i]; }
  double front() const { return s_.front(); }
  double back() const { return s_.back(); }
  std::span<const double> values() const { return s_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }

  /// Index of the bucket equal to `x` (within 1e-12), or npos.
  std::size_t find(double x) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool operator==(const BucketGrid& other) const;

 private:
  std::vector<double> s_;
  std::vector<std::string> labels_;
};

/// Calendar date used as an observation label; no business-day logic.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}
  Date(int y, unsigned m, unsigned d)
      : ymd_(std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}) {}

  /// Accepts YYYY-MM-DD only; throws std::invalid_argument otherwise.
  static Date parse(std::string_view iso);
  std::string iso() const;
  Date plus_days(int days) const;

  auto operator<=>(const Date& other) const {
    return std::chrono::sys_days{ymd_} <=> std::chrono::sys_days{other.ymd_};
  }
  bool operator==(const Date& other) const = default;

 private:
  std::chrono::year_month_day ymd_{};
};

}  // namespace mchjm
