#include "mchjm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mchjm/log.hpp"

namespace mchjm {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::invalid_argument row_error(std::size_t row, const std::string& what) {
  return std::invalid_argument("input row " + std::to_string(row) + ": " + what);
}

const std::vector<std::string>& spline_labels(const CurveConfig& c) {
  return c.tenor_years() > 0.0 && !c.source_buckets.empty() ? c.source_buckets : c.buckets;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

double CurveConfig::tenor_years() const { return tenor == "0" ? 0.0 : parse_tenor_label(tenor); }

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.curves.push_back({"EONIA", "0", {"1m", "2m", "3m", "6m", "9m", "1y", "5y", "10y", "15y", "20y", "25y", "30y"}, {}});
  c.curves.push_back({"EUR3M", "3m", {"3m", "6m", "9m", "1y", "5y", "10y", "15y", "20y", "25y", "30y"}, {}});
  return c;
}

void RunConfig::validate() const {
  if (curves.empty()) throw std::invalid_argument("config: no curves defined");
  if (curves.front().tenor_years() != 0.0) throw std::invalid_argument("config: first curve must be the discount curve (tenor 0)");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    if (c.id.empty()) throw std::invalid_argument("config: curve without id");
    if (!ids.insert(c.id).second) throw std::invalid_argument("config: duplicate curve id " + c.id);
    if (i > 0 && !(c.tenor_years() > 0.0)) throw std::invalid_argument("config: tenor curve " + c.id + " needs a positive tenor");
    (void)BucketGrid::from_labels(c.buckets);
    (void)BucketGrid::from_labels(spline_labels(c));
  }
  if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
  if (sample_stride < 1 || window < 2 || window_stride < 1) throw std::invalid_argument("config: invalid window settings");
  if (short_buckets < 0) throw std::invalid_argument("config: short_buckets must be >= 0");
  if (!(pca_threshold > 0.0 && pca_threshold <= 1.0)) throw std::invalid_argument("config: pca_threshold must lie in (0, 1]");
  if (forecast_volatility != "full" && forecast_volatility != "pca") {
    throw std::invalid_argument("config: forecast_volatility must be 'full' or 'pca'");
  }
  if (horizons.empty()) throw std::invalid_argument("config: no horizons");
  for (int h : horizons) {
    if (h < 1) throw std::invalid_argument("config: horizons must be >= 1");
  }
  for (double p : coverage) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("config: coverage must lie in (0, 1)");
  }
  for (const auto& m : methods) (void)parse_forecast_method(m);
  (void)parse_drift_mode(drift_mode);
  if (n_paths < 2 || n_boot < 0 || rolling_boot < 0) throw std::invalid_argument("config: invalid path or replica count");
  if (!(tol > 0.0) || max_iters < 1) throw std::invalid_argument("config: invalid tolerance settings");
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  RunConfig c = RunConfig::defaults();
  try {
    if (j.contains("curves")) {
      c.curves.clear();
      for (const auto& jc : j.at("curves")) {
        CurveConfig cc;
        cc.id = jc.at("id").get<std::string>();
        read_opt(jc, "tenor", cc.tenor);
        cc.buckets = jc.at("buckets").get<std::vector<std::string>>();
        read_opt(jc, "source_buckets", cc.source_buckets);
        c.curves.push_back(std::move(cc));
      }
    }
    read_opt(j, "dt", c.dt);
    read_opt(j, "sample_stride", c.sample_stride);
    read_opt(j, "window", c.window);
    read_opt(j, "window_stride", c.window_stride);
    read_opt(j, "short_buckets", c.short_buckets);
    read_opt(j, "pca_threshold", c.pca_threshold);
    read_opt(j, "forecast_volatility", c.forecast_volatility);
    read_opt(j, "horizons", c.horizons);
    read_opt(j, "coverage", c.coverage);
    read_opt(j, "methods", c.methods);
    read_opt(j, "n_paths", c.n_paths);
    read_opt(j, "n_boot", c.n_boot);
    read_opt(j, "rolling_boot", c.rolling_boot);
    read_opt(j, "tol", c.tol);
    read_opt(j, "max_iters", c.max_iters);
    read_opt(j, "seed", c.seed);
    read_opt(j, "threads", c.threads);
    read_opt(j, "drift_mode", c.drift_mode);
    read_opt(j, "input", c.input);
    read_opt(j, "output", c.output);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  static const std::set<std::string> known{"curves", "dt", "sample_stride", "window", "window_stride", "short_buckets",
                                           "pca_threshold", "forecast_volatility", "horizons", "coverage", "methods",
                                           "n_paths", "n_boot", "rolling_boot", "tol", "max_iters", "seed", "threads",
                                           "drift_mode", "input", "output"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["curves"] = json::array();
  for (const auto& cc : c.curves) {
    json jc{{"id", cc.id}, {"tenor", cc.tenor}, {"buckets", cc.buckets}};
    if (!cc.source_buckets.empty()) jc["source_buckets"] = cc.source_buckets;
    j["curves"].push_back(jc);
  }
  j["dt"] = c.dt;
  j["sample_stride"] = c.sample_stride;
  j["window"] = c.window;
  j["window_stride"] = c.window_stride;
  j["short_buckets"] = c.short_buckets;
  j["pca_threshold"] = c.pca_threshold;
  j["forecast_volatility"] = c.forecast_volatility;
  j["horizons"] = c.horizons;
  j["coverage"] = c.coverage;
  j["methods"] = c.methods;
  j["n_paths"] = c.n_paths;
  j["n_boot"] = c.n_boot;
  j["rolling_boot"] = c.rolling_boot;
  j["tol"] = c.tol;
  j["max_iters"] = c.max_iters;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["drift_mode"] = c.drift_mode;
  j["input"] = c.input;
  j["output"] = c.output;
  return j.dump(2) + "\n";
}

CurveSystem make_system(const RunConfig& cfg) {
  cfg.validate();
  std::vector<TenorCurve> tenors;
  for (std::size_t i = 1; i < cfg.curves.size(); ++i) {
    const auto& c = cfg.curves[i];
    tenors.push_back({c.id, c.tenor_years(), BucketGrid::from_labels(c.buckets)});
  }
  return CurveSystem(cfg.curves.front().id, BucketGrid::from_labels(cfg.curves.front().buckets), std::move(tenors),
                     cfg.dt);
}

std::vector<CurveHistory> load_history(std::istream& in, const RunConfig& cfg) {
  struct Panel {
    BucketGrid grid;
    std::map<Date, std::pair<Eigen::VectorXd, std::size_t>> rows;  // values, first input row
    Date last{};
    bool any = false;
  };
  std::map<std::string, std::size_t> index;
  std::vector<Panel> panels;
  for (std::size_t i = 0; i < cfg.curves.size(); ++i) {
    index[cfg.curves[i].id] = i;
    panels.push_back({BucketGrid::from_labels(spline_labels(cfg.curves[i])), {}, {}, false});
  }

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (row == 1 && !f.empty() && f[0] == "date") continue;
    if (f.size() != 4) throw row_error(row, "expected 4 fields date,curve_id,tenor_label,yield");
    const Date date = [&] {
      try {
        return Date::parse(f[0]);
      } catch (const std::invalid_argument& e) {
        throw row_error(row, e.what());
      }
    }();
    double maturity = 0.0;
    try {
      maturity = parse_tenor_label(f[2]);
    } catch (const std::invalid_argument& e) {
      throw row_error(row, std::string("unknown tenor label '") + f[2] + "'");
    }
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw row_error(row, "malformed yield '" + f[3] + "'");
    }
    if (!std::isfinite(value)) throw row_error(row, "non-finite yield");

    auto it = index.find(f[1]);
    if (it == index.end()) continue;
    Panel& p = panels[it->second];
    if (p.any && date < p.last) {
      throw row_error(row, "dates of " + f[1] + " are not in increasing order (" + date.iso() + " after " + p.last.iso() + ")");
    }
    p.last = date;
    p.any = true;
    const std::size_t col = p.grid.find(maturity);
    if (col == BucketGrid::npos) continue;
    auto [cell, inserted] = p.rows.try_emplace(
        date, Eigen::VectorXd::Constant(static_cast<Index>(p.grid.size()), std::numeric_limits<double>::quiet_NaN()), row);
    double& slot = cell->second.first(static_cast<Index>(col));
    if (!std::isnan(slot)) {
      throw row_error(row, "duplicate value for " + f[1] + " " + p.grid.label(col) + " on " + date.iso());
    }
    slot = value;
  }

  std::vector<CurveHistory> out;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const Panel& p = panels[i];
    const auto& cc = cfg.curves[i];
    if (p.rows.empty()) throw std::invalid_argument("no data for curve " + cc.id);
    std::vector<Date> dates;
    Eigen::MatrixXd values(static_cast<Index>(p.rows.size()), static_cast<Index>(p.grid.size()));
    Index r = 0;
    for (const auto& [date, cell] : p.rows) {
      for (std::size_t c = 0; c < p.grid.size(); ++c) {
        if (std::isnan(cell.first(static_cast<Index>(c)))) {
          throw std::invalid_argument("missing value for " + cc.id + " bucket " + p.grid.label(c) + " on " + date.iso() +
                                      " (first row of that date: " + std::to_string(cell.second) + ")");
        }
      }
      dates.push_back(date);
      values.row(r++) = cell.first.transpose();
    }
    out.emplace_back(cc.id, cc.tenor_years(), p.grid, std::move(dates), std::move(values));
  }
  return out;
}

std::vector<CurveHistory> load_history(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open history " + path.string());
  return load_history(in, cfg);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void save_history(std::ostream& out, const std::vector<CurveHistory>& histories) {
  std::set<Date> all;
  for (const auto& h : histories) all.insert(h.dates().begin(), h.dates().end());
  out << "date,curve_id,tenor_label,yield\n";
  for (const Date& d : all) {
    for (const auto& h : histories) {
      auto it = std::lower_bound(h.dates().begin(), h.dates().end(), d);
      if (it == h.dates().end() || *it != d) continue;
      const Index r = static_cast<Index>(it - h.dates().begin());
      for (std::size_t c = 0; c < h.grid().size(); ++c) {
        out << d.iso() << ',' << h.curve_id() << ',' << h.grid().label(c) << ','
            << format_number(h.values()(r, static_cast<Index>(c))) << '\n';
      }
    }
  }
}

void save_history(const std::filesystem::path& path, const std::vector<CurveHistory>& histories) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  save_history(out, histories);
}

StatePanel build_states(const std::vector<CurveHistory>& histories, const RunConfig& cfg, const CurveSystem& sys) {
  if (histories.size() != sys.block_count() || histories.size() != cfg.curves.size()) {
    throw std::invalid_argument("history count does not match the curve system");
  }
  const auto& dates = histories.front().dates();
  for (const auto& h : histories) {
    if (h.dates() != dates) throw std::invalid_argument("curve " + h.curve_id() + " is observed on different dates");
  }
  StatePanel panel;
  for (std::size_t t = 0; t < dates.size(); t += static_cast<std::size_t>(cfg.sample_stride)) panel.dates.push_back(dates[t]);
  panel.states.resize(static_cast<Index>(panel.dates.size()), sys.dimension());

  const CurveHistory disc = subset_grid(histories.front(), sys.grid(0));
  for (std::size_t b = 0; b < sys.block_count(); ++b) {
    const Index off = sys.block_offset(b);
    const Index n = sys.block_size(b);
    if (b == 0) {
      for (std::size_t k = 0; k < panel.dates.size(); ++k) {
        const auto snap = disc.snapshot(k * static_cast<std::size_t>(cfg.sample_stride));
        panel.states.row(static_cast<Index>(k)).segment(off, n) = yields_to_forwards(snap, sys.spline(0)).values.transpose();
      }
    } else {
      const CurveHistory& h = histories[b];
      const SplineOperators ops(h.grid());
      const Eigen::MatrixXd expo = fra_exponent_operator(sys.block_tenor(b), sys.grid(b), ops);
      const double tenor = sys.block_tenor(b);
      for (std::size_t k = 0; k < panel.dates.size(); ++k) {
        const Eigen::VectorXd y = h.values().row(static_cast<Index>(k * static_cast<std::size_t>(cfg.sample_stride))).transpose();
        panel.states.row(static_cast<Index>(k)).segment(off, n) = ((expo * y).array().exp() - 1.0).matrix().transpose() / tenor;
      }
    }
  }
  return panel;
}

}  // namespace mchjm
