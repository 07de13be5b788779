#include "mchjm/grid.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mchjm {

double parse_tenor_label(std::string_view label) {
  if (label.empty()) throw std::invalid_argument("empty tenor label");
  double years = 0.0;
  std::size_t pos = 0;
  bool any = false;
  while (pos < label.size()) {
    if (label[pos] == ' ') {
      ++pos;
      continue;
    }
    int count = 0;
    auto [ptr, ec] = std::from_chars(label.data() + pos, label.data() + label.size(), count);
    if (ec != std::errc{} || ptr == label.data() + label.size()) {
      throw std::invalid_argument("malformed tenor label '" + std::string(label) + "'");
    }
    pos = static_cast<std::size_t>(ptr - label.data());
    switch (label[pos]) {
      case 'd': case 'D': years += count / 365.0; break;
      case 'w': case 'W': years += 7.0 * count / 365.0; break;
      case 'm': case 'M': years += count / 12.0; break;
      case 'y': case 'Y': years += count; break;
      default:
        throw std::invalid_argument("unknown tenor unit in '" + std::string(label) + "'");
    }
    ++pos;
    any = true;
  }
  if (!any) throw std::invalid_argument("malformed tenor label '" + std::string(label) + "'");
  return years;
}

std::string format_tenor_label(double years) {
  if (years == 0.0) return "0";
  const double months = years * 12.0;
  const long rounded = std::lround(months);
  if (std::abs(months - rounded) < 1e-9 && rounded > 0) {
    if (rounded % 12 == 0) return std::to_string(rounded / 12) + "y";
    return std::to_string(rounded) + "m";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6gy", years);
  return buf;
}

BucketGrid::BucketGrid(std::vector<double> maturities, std::vector<std::string> labels)
    : s_(std::move(maturities)), labels_(std::move(labels)) {
  if (s_.size() < kMinBuckets) {
    throw std::invalid_argument("bucket grid needs at least 3 buckets, got " +
                                std::to_string(s_.size()));
  }
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (!std::isfinite(s_[i]) || s_[i] <= 0.0) {
      throw std::invalid_argument("bucket grid entries must be finite and > 0");
    }
    if (i > 0 && s_[i] <= s_[i - 1]) {
      throw std::invalid_argument("bucket grid must be strictly increasing");
    }
  }
  if (labels_.empty()) {
    labels_.reserve(s_.size());
    for (double x : s_) labels_.push_back(format_tenor_label(x));
  } else if (labels_.size() != s_.size()) {
    throw std::invalid_argument("bucket grid label count does not match bucket count");
  }
}

BucketGrid BucketGrid::from_labels(std::span<const std::string> labels) {
  std::vector<double> s;
  s.reserve(labels.size());
  for (const auto& l : labels) s.push_back(parse_tenor_label(l));
  return BucketGrid(std::move(s), {labels.begin(), labels.end()});
}

std::size_t BucketGrid::find(double x) const {
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (std::abs(s_[i] - x) < 1e-12) return i;
  }
  return npos;
}

bool BucketGrid::operator==(const BucketGrid& other) const {
  if (s_.size() != other.s_.size()) return false;
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (std::abs(s_[i] - other.s_[i]) > 1e-12) return false;
  }
  return true;
}

Date Date::parse(std::string_view iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  auto bad = [&] { return std::invalid_argument("invalid date '" + std::string(iso) + "'"); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  auto num = [&](std::size_t from, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(iso.data() + from, iso.data() + from + len, out);
    if (ec != std::errc{} || p != iso.data() + from + len) throw bad();
  };
  num(0, 4, y);
  num(5, 2, m);
  num(8, 2, d);
  Date out(y, m, d);
  if (!out.ymd_.ok()) throw bad();
  return out;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
  return buf;
}

Date Date::plus_days(int days) const {
  return Date(std::chrono::year_month_day{std::chrono::sys_days{ymd_} + std::chrono::days{days}});
}

}  // namespace mchjm
