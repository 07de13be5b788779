#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mchjm/curve.hpp"
#include "mchjm/dynamics.hpp"
#include "mchjm/scenario.hpp"

namespace mchjm {

struct CurveConfig {
  std::string id;
  std::string tenor = "0";              ///< "0" for the discount curve, else a label such as "3m"
  std::vector<std::string> buckets;     ///< model grid
  std::vector<std::string> source_buckets;  ///< tenor curves: spline grid of the input yields (default: buckets)

  double tenor_years() const;
};

struct RunConfig {
  std::vector<CurveConfig> curves;
  double dt = CurveSystem::kDefaultDt;
  int sample_stride = 1;  ///< input rows per model step (5 for daily business-day files)
  int window = 156;
  int window_stride = 1;
  int short_buckets = 2;
  double pca_threshold = 0.95;
  std::string forecast_volatility = "full";  ///< or "pca"
  std::vector<int> horizons{1, 12, 52};
  std::vector<double> coverage{0.95, 0.99};
  std::vector<std::string> methods{"gaussian-mc", "bootstrap"};
  int n_paths = 10000;
  int n_boot = 500;
  int rolling_boot = 0;  ///< bootstrap replicas per rolling window (0 = none)
  double tol = 1e-4;
  int max_iters = 500;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string drift_mode = "exact-recursion";
  std::string input;
  std::string output = "out";

  /// EONIA on {1m..30y} (K = 12) and EUR3M on {3m..30y} (K = 10).
  static RunConfig defaults();
  void validate() const;
};

RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

CurveSystem make_system(const RunConfig& cfg);

/// Long CSV `date,curve_id,tenor_label,yield`. Curves come back in config
/// order, each on the grid it needs (buckets, or source_buckets for tenor
/// curves). Extra curves in the file are ignored.
std::vector<CurveHistory> load_history(std::istream& in, const RunConfig& cfg);
std::vector<CurveHistory> load_history(const std::filesystem::path& path, const RunConfig& cfg);
/// Same schema, 12 significant digits, sorted by date then curve then bucket.
void save_history(std::ostream& out, const std::vector<CurveHistory>& histories);
void save_history(const std::filesystem::path& path, const std::vector<CurveHistory>& histories);

/// Model state panel: forwards of the discount curve and FRA of each tenor curve.
struct StatePanel {
  std::vector<Date> dates;
  Eigen::MatrixXd states;  ///< T x D
};

/// Every `sample_stride`-th input date becomes a model state.
StatePanel build_states(const std::vector<CurveHistory>& histories, const RunConfig& cfg, const CurveSystem& sys);

/// Fixed-format number used in every emitted CSV.
std::string format_number(double v);

}  // namespace mchjm
