// mchjm: command-line front end of the multi-curve HJM scenario engine.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mchjm/backtest.hpp"
#include "mchjm/estimation.hpp"
#include "mchjm/fixture.hpp"
#include "mchjm/io.hpp"
#include "mchjm/log.hpp"
#include "mchjm/pca.hpp"
#include "mchjm/rolling.hpp"
#include "mchjm/scenario.hpp"

namespace fs = std::filesystem;
using namespace mchjm;
using nlohmann::json;

namespace {

// Error tagged with the pipeline stage that raised it; exit code follows the
// wrapped exception type.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what, int code)
      : std::runtime_error(stage + ": " + what), exit_code(code) {}
  int exit_code;
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw StageError(name, e.what(), 1);
  } catch (const std::out_of_range& e) {
    throw StageError(name, e.what(), 1);
  } catch (const fs::filesystem_error& e) {
    throw StageError(name, e.what(), 1);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), 2);
  }
}

struct Globals {
  std::string config;
  std::string input;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
  std::string drift_mode;
  std::string log_level = "warning";
};

RunConfig resolve_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig::defaults() : load_config(g.config);
  if (!g.input.empty()) cfg.input = g.input;
  if (!g.out.empty()) cfg.output = g.out;
  if (g.seed_set) cfg.seed = g.seed;
  if (g.threads >= 0) cfg.threads = g.threads;
  if (!g.drift_mode.empty()) cfg.drift_mode = g.drift_mode;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  write_text(dir / "resolved_config.json", config_to_json(cfg));
  return dir;
}

struct Loaded {
  std::unique_ptr<CurveSystem> sys;
  std::vector<CurveHistory> histories;
  StatePanel panel;
};

Loaded load_all(const RunConfig& cfg) {
  Loaded l;
  l.sys = std::make_unique<CurveSystem>(stage("config", [&] { return make_system(cfg); }));
  if (cfg.input.empty()) throw StageError("load", "no input history given (--input or config 'input')", 1);
  l.histories = stage("load", [&] { return load_history(fs::path(cfg.input), cfg); });
  l.panel = stage("transform", [&] { return build_states(l.histories, cfg, *l.sys); });
  return l;
}

// Index of the forecast origin: the state on `end_date`, or the last one.
Index origin_index(const StatePanel& panel, const std::string& end_date) {
  if (end_date.empty()) return panel.states.rows() - 1;
  const Date d = Date::parse(end_date);
  for (std::size_t i = 0; i < panel.dates.size(); ++i) {
    if (panel.dates[i] == d) return static_cast<Index>(i);
  }
  throw std::invalid_argument("no sampled state on " + end_date);
}

Eigen::MatrixXd window_y(const CurveSystem& sys, const StatePanel& panel, Index end, int window) {
  if (end < window) {
    throw std::invalid_argument("not enough history before the origin for a window of " + std::to_string(window));
  }
  return compute_y_series(sys, panel.states.middleRows(end - window, window + 1));
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int cmd_synthesize(const Globals& g, int states) {
  RunConfig cfg = resolve_config(g);
  const fs::path dir = prepare_output(cfg);
  const Fixture fx = stage("simulate", [&] { return make_fixture(cfg, states, cfg.seed); });
  stage("write", [&] {
    save_history(dir / "history.csv", fx.histories);
    json truth;
    EstimationResult er;
    er.params = fx.truth;
    const auto names = er.theta_names(*fx.sys);
    const Eigen::VectorXd theta = er.theta();
    for (std::size_t i = 0; i < names.size(); ++i) truth["theta"][names[i]] = theta(static_cast<Index>(i));
    std::vector<std::vector<double>> gamma;
    for (Index i = 0; i < fx.truth.gamma.rows(); ++i) gamma.push_back(std::vector<double>(fx.truth.gamma.row(i).data(), fx.truth.gamma.row(i).data() + fx.truth.gamma.cols()));
    truth["gamma"] = gamma;
    truth["seed"] = cfg.seed;
    truth["states"] = states;
    write_text(dir / "truth.json", truth.dump(2) + "\n");
    return 0;
  });
  std::cout << "wrote " << (dir / "history.csv").string() << " (" << states << " weekly dates)\n";
  return 0;
}

int cmd_transform(const Globals& g) {
  const RunConfig cfg = resolve_config(g);
  const Loaded l = load_all(cfg);
  const fs::path dir = stage("write", [&] { return prepare_output(cfg); });
  stage("write", [&] {
    std::ofstream out(dir / "states.csv");
    out << "date,curve_id,tenor_label,rate\n";
    for (Index t = 0; t < l.panel.states.rows(); ++t) {
      for (std::size_t b = 0; b < l.sys->block_count(); ++b) {
        for (Index i = 0; i < l.sys->block_size(b); ++i) {
          out << l.panel.dates[static_cast<std::size_t>(t)].iso() << ',' << l.sys->block_name(b) << ','
              << l.sys->grid(b).label(static_cast<std::size_t>(i)) << ','
              << format_number(l.panel.states(t, l.sys->block_offset(b) + i)) << '\n';
        }
      }
    }
    return 0;
  });
  std::cout << "wrote " << (dir / "states.csv").string() << '\n';
  return 0;
}

int cmd_estimate(const Globals& g, const std::string& end_date, int n_boot, double tol) {
  RunConfig cfg = resolve_config(g);
  if (n_boot >= 0) cfg.n_boot = n_boot;
  if (tol > 0.0) cfg.tol = tol;
  cfg.validate();
  const Loaded l = load_all(cfg);
  const fs::path dir = stage("write", [&] { return prepare_output(cfg); });
  const Index end = stage("window", [&] { return origin_index(l.panel, end_date); });
  const Eigen::MatrixXd y = stage("window", [&] { return window_y(*l.sys, l.panel, end, cfg.window); });
  const WindowFit wf = stage("estimate", [&] { return fit_window(*l.sys, y, cfg, cfg.n_boot, cfg.seed, cfg.threads); });

  json doc;
  doc["end_date"] = l.panel.dates[static_cast<std::size_t>(end)].iso();
  doc["window"] = cfg.window;
  doc["n_iters"] = wf.fit.n_iters;
  doc["converged"] = wf.fit.converged;
  doc["neg_log_lik"] = wf.fit.neg_log_lik;
  const auto names = wf.fit.theta_names(*l.sys);
  const Eigen::VectorXd th = wf.fit.theta();
  for (std::size_t i = 0; i < names.size(); ++i) {
    json p{{"name", names[i]}, {"value", th(static_cast<Index>(i))}};
    if (wf.fit.bootstrap) {
      p["std_error"] = wf.fit.bootstrap->std_errors(static_cast<Index>(i));
      p["bias"] = wf.fit.bootstrap->bias(static_cast<Index>(i));
    }
    doc["parameters"].push_back(p);
  }
  std::vector<std::string> labels;
  for (Index i = 0; i < l.sys->dimension(); ++i) labels.push_back(l.sys->component_label(i));
  doc["components"] = labels;
  std::vector<std::vector<double>> gamma;
  for (Index i = 0; i < wf.fit.params.gamma.rows(); ++i) {
    gamma.emplace_back(wf.fit.params.gamma.row(i).data(), wf.fit.params.gamma.row(i).data() + wf.fit.params.gamma.cols());
  }
  doc["gamma"] = gamma;
  doc["drift"] = vec_json(drift_from_params(*l.sys, wf.fit.params));
  for (const auto& t : wf.fit.theta_path) doc["theta_path"].push_back(vec_json(t));
  if (wf.fit.bootstrap) {
    doc["bootstrap"] = {{"n_boot", wf.fit.bootstrap->n_boot}, {"n_failed", wf.fit.bootstrap->n_failed},
                        {"seed", wf.fit.bootstrap->seed}};
  }
  stage("write", [&] {
    write_text(dir / "estimate.json", doc.dump(2) + "\n");
    return 0;
  });
  std::cout << "sweeps " << wf.fit.n_iters << (wf.fit.converged ? " (converged)" : " (not converged)")
            << ", -log L = " << format_number(wf.fit.neg_log_lik) << '\n';
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::cout << "  " << names[i] << " = " << format_number(th(static_cast<Index>(i)));
    if (wf.fit.bootstrap) std::cout << "  (se " << format_number(wf.fit.bootstrap->std_errors(static_cast<Index>(i))) << ")";
    std::cout << '\n';
  }
  return 0;
}

int cmd_pca(const Globals& g, const std::string& end_date) {
  const RunConfig cfg = resolve_config(g);
  const Loaded l = load_all(cfg);
  const fs::path dir = stage("write", [&] { return prepare_output(cfg); });
  const Index end = stage("window", [&] { return origin_index(l.panel, end_date); });
  const Eigen::MatrixXd y = stage("window", [&] { return window_y(*l.sys, l.panel, end, cfg.window); });
  const WindowFit wf = stage("estimate", [&] { return fit_window(*l.sys, y, cfg, 0, cfg.seed, cfg.threads); });
  const PcaResult& pca = wf.pca;
  stage("write", [&] {
    std::ofstream ev(dir / "eigenvalues.csv");
    ev << "m,eigenvalue,cumulative_phi\n";
    for (Index m = 0; m < pca.eigenvalues.size(); ++m) {
      ev << m + 1 << ',' << format_number(pca.eigenvalues(m)) << ',' << format_number(pca.explained(m + 1)) << '\n';
    }
    std::ofstream w(dir / "modified_volatility.csv");
    w << "component";
    for (Index m = 0; m < pca.F; ++m) w << ",w_" << m + 1;
    w << '\n';
    for (Index i = 0; i < pca.W.rows(); ++i) {
      w << l.sys->component_label(i);
      for (Index m = 0; m < pca.F; ++m) w << ',' << format_number(pca.W(i, m));
      w << '\n';
    }
    return 0;
  });
  std::cout << "F = " << pca.F << " components explain " << format_number(100.0 * pca.phi) << "% (threshold "
            << format_number(100.0 * cfg.pca_threshold) << "%)\n";
  return 0;
}

int cmd_forecast(const Globals& g, const std::string& end_date) {
  const RunConfig cfg = resolve_config(g);
  const Loaded l = load_all(cfg);
  const fs::path dir = stage("write", [&] { return prepare_output(cfg); });
  const Index end = stage("window", [&] { return origin_index(l.panel, end_date); });
  const Eigen::MatrixXd y = stage("window", [&] { return window_y(*l.sys, l.panel, end, cfg.window); });
  const WindowFit wf = stage("estimate", [&] { return fit_window(*l.sys, y, cfg, 0, cfg.seed, cfg.threads); });
  const Eigen::VectorXd state = l.panel.states.row(end).transpose();
  const auto forecasts = stage("forecast", [&] { return forecast_window(*l.sys, wf, state, cfg, cfg.seed); });

  stage("write", [&] {
    fs::create_directories(dir / "envelopes");
    for (const auto& fc : forecasts) {
      const std::string method(to_string(fc.method));
      std::ofstream out(dir / "envelopes" / (method + "_h" + std::to_string(fc.horizon) + ".csv"));
      out << "method,horizon,end_date,target_date,component,mean,sd,band_lower,band_upper";
      for (const auto& e : fc.envelopes) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "%.4g", e.coverage);
        out << ",lower_" << tag << ",upper_" << tag;
      }
      out << ",realized\n";
      const bool has_real = end + fc.horizon < l.panel.states.rows();
      const std::string target = has_real ? l.panel.dates[static_cast<std::size_t>(end + fc.horizon)].iso() : "";
      const auto& e0 = fc.envelopes.front();
      for (Index i = 0; i < l.sys->dimension(); ++i) {
        out << method << ',' << fc.horizon << ',' << l.panel.dates[static_cast<std::size_t>(end)].iso() << ',' << target
            << ',' << l.sys->component_label(i) << ',' << format_number(e0.mean(i)) << ',' << format_number(e0.sd(i))
            << ',' << format_number(e0.band_lower(i)) << ',' << format_number(e0.band_upper(i));
        for (const auto& e : fc.envelopes) out << ',' << format_number(e.lower(i)) << ',' << format_number(e.upper(i));
        out << ',' << (has_real ? format_number(l.panel.states(end + fc.horizon, i)) : "") << '\n';
      }
    }
    // Closed-form ZC yield moments of the discount curve.
    ScenarioModel model = ScenarioModel::from_params(*l.sys, wf.fit.params);
    if (cfg.forecast_volatility == "pca") model = model.with_volatility(reduced_volatility(wf.pca));
    std::ofstream yo(dir / "yields.csv");
    yo << "horizon,bucket,mean,sd\n";
    for (int h : cfg.horizons) {
      const GaussianMoments ym = forecast_yields(
          block_moments(gaussian_moments(model, state, h, parse_drift_mode(cfg.drift_mode)), *l.sys, 0), l.sys->spline(0));
      for (Index i = 0; i < ym.mean.size(); ++i) {
        yo << h << ',' << l.sys->grid(0).label(static_cast<std::size_t>(i)) << ',' << format_number(ym.mean(i)) << ','
           << format_number(std::sqrt(std::max(ym.cov(i, i), 0.0))) << '\n';
      }
    }
    return 0;
  });
  std::cout << "wrote " << forecasts.size() << " envelope files to " << (dir / "envelopes").string() << '\n';
  return 0;
}

int cmd_backtest_counts(const std::string& counts_file, long n1, long n_obs, double coverage, const fs::path& out_dir) {
  struct Row {
    std::string label;
    long n1, n_obs;
    double p;
  };
  std::vector<Row> rows;
  stage("load", [&] {
    if (!counts_file.empty()) {
      std::ifstream in(counts_file);
      if (!in) throw std::invalid_argument("cannot open " + counts_file);
      std::string line;
      std::getline(in, line);
      std::vector<std::string> head;
      {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) head.push_back(f);
      }
      auto col = [&](const std::string& name) -> long {
        for (std::size_t i = 0; i < head.size(); ++i) {
          if (head[i] == name) return static_cast<long>(i);
        }
        return -1;
      };
      const long c_n1 = col("n1"), c_obs = col("n_obs"), c_p = col("coverage"), c_label = col("label");
      if (c_n1 < 0 || c_obs < 0 || c_p < 0) throw std::invalid_argument("counts file needs n1,n_obs,coverage columns");
      std::size_t r = 1;
      while (std::getline(in, line)) {
        ++r;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string x;
        while (std::getline(ss, x, ',')) f.push_back(x);
        try {
          rows.push_back({c_label >= 0 ? f.at(static_cast<std::size_t>(c_label)) : std::to_string(r - 1),
                          std::stol(f.at(static_cast<std::size_t>(c_n1))), std::stol(f.at(static_cast<std::size_t>(c_obs))),
                          std::stod(f.at(static_cast<std::size_t>(c_p)))});
        } catch (const std::exception&) {
          throw std::invalid_argument("counts file row " + std::to_string(r) + " is malformed");
        }
      }
    } else {
      rows.push_back({"1", n1, n_obs, coverage});
    }
    return 0;
  });
  std::ostringstream csv;
  csv << "label,n1,n_obs,coverage,lr_uc,p_value_pct,flag\n";
  stage("backtest", [&] {
    for (const auto& r : rows) {
      const KupiecResult k = kupiec_lr(r.n1, r.n_obs, r.p);
      csv << r.label << ',' << r.n1 << ',' << r.n_obs << ',' << format_number(r.p) << ',' << format_number(k.lr) << ','
          << format_number(100.0 * k.p_value) << ',' << k.flag() << '\n';
    }
    return 0;
  });
  fs::create_directories(out_dir);
  write_text(out_dir / "kupiec.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_backtest(const std::vector<std::string>& files, const fs::path& out_dir) {
  // (method, horizon, coverage, component) -> exceedance series
  std::map<std::tuple<std::string, int, double, std::string>, ExceedanceSeries> series;
  std::vector<std::tuple<std::string, int, double, std::string>> order;
  stage("load", [&] {
    for (const auto& file : files) {
      std::ifstream in(file);
      if (!in) throw std::invalid_argument("cannot open " + file);
      std::string line;
      std::getline(in, line);
      std::vector<std::string> head;
      {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) head.push_back(f);
      }
      auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < head.size(); ++i) {
          if (head[i] == name) return i;
        }
        throw std::invalid_argument(file + ": missing column " + name);
      };
      const std::size_t c_m = col("method"), c_h = col("horizon"), c_c = col("component"), c_r = col("realized");
      std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> levels;
      for (std::size_t i = 0; i < head.size(); ++i) {
        if (head[i].rfind("lower_", 0) == 0) {
          const std::string tag = head[i].substr(6);
          levels.push_back({std::stod(tag), {i, col("upper_" + tag)}});
        }
      }
      std::size_t r = 1;
      while (std::getline(in, line)) {
        ++r;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string x;
        while (std::getline(ss, x, ',')) f.push_back(x);
        if (f.size() < head.size()) f.resize(head.size());
        if (f[c_r].empty()) continue;
        const double real = std::stod(f[c_r]);
        for (const auto& [p, cols] : levels) {
          auto key = std::make_tuple(f[c_m], std::stoi(f[c_h]), p, f[c_c]);
          auto [it, fresh] = series.try_emplace(key);
          if (fresh) {
            order.push_back(key);
            it->second.bucket = f[c_c];
            it->second.horizon = std::get<1>(key);
            it->second.coverage = p;
          }
          const double lo = std::stod(f[cols.first]), hi = std::stod(f[cols.second]);
          const int sg = real < lo ? -1 : (real > hi ? 1 : 0);
          it->second.sign.push_back(sg);
          it->second.indicators.push_back(sg != 0);
          it->second.n1 += sg != 0;
          it->second.n0 += sg == 0;
        }
      }
    }
    if (series.empty()) throw std::invalid_argument("no envelope rows with realized values");
    return 0;
  });
  CoverageReport report;
  stage("backtest", [&] {
    for (const auto& key : order) report.add(std::get<0>(key), series.at(key));
    return 0;
  });
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "coverage_report.csv");
  report.write_csv(csv);
  std::ofstream txt(out_dir / "coverage_report.txt");
  report.write_table(txt);
  report.write_table(std::cout);
  return 0;
}

int cmd_rolling(const Globals& g) {
  const RunConfig cfg = resolve_config(g);
  const Loaded l = load_all(cfg);
  const fs::path dir = stage("write", [&] { return prepare_output(cfg); });
  const RollingResult res = stage("rolling", [&] { return run_rolling(*l.sys, l.panel, cfg); });
  stage("write", [&] {
    write_rolling_artifacts(res, *l.sys, l.panel, cfg, dir);
    return 0;
  });
  std::cout << res.windows.size() - static_cast<std::size_t>(res.failed) << " windows fitted";
  if (res.failed > 0) std::cout << ", " << res.failed << " excluded";
  std::cout << "; artifacts in " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-curve HJM estimation, scenario generation and coverage backtesting"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("-c,--config", g.config, "JSON run configuration");
  app.add_option("-i,--input", g.input, "long CSV history date,curve_id,tenor_label,yield");
  app.add_option("-o,--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "master random seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--drift-mode", g.drift_mode, "exact-recursion or paper-literal")
      ->check(CLI::IsMember({"exact-recursion", "paper-literal"}));
  app.add_option("--log-level", g.log_level, "debug, info, warning, error or silent")
      ->check(CLI::IsMember({"debug", "info", "warning", "error", "silent"}));

  int states = 450;
  auto* syn = app.add_subcommand("synthesize", "simulate a fixture history from the model with known parameters");
  syn->add_option("--states", states, "number of weekly dates")->check(CLI::Range(2, 1000000));

  auto* tr = app.add_subcommand("transform", "ZC yields to forward and FRA states");

  std::string end_date;
  int n_boot = -1;
  double tol = 0.0;
  auto* est = app.add_subcommand("estimate", "fit one window and bootstrap standard errors");
  est->add_option("--end-date", end_date, "forecast origin (default: last sampled date)");
  est->add_option("--n-boot", n_boot, "bootstrap replicas (0 = none)")->check(CLI::NonNegativeNumber);
  est->add_option("--tol", tol, "relative convergence tolerance")->check(CLI::PositiveNumber);

  auto* pc = app.add_subcommand("pca", "principal components of the fitted covariance");
  pc->add_option("--end-date", end_date, "window end (default: last sampled date)");

  auto* fc = app.add_subcommand("forecast", "forecast envelopes from one fitted window");
  fc->add_option("--end-date", end_date, "forecast origin (default: last sampled date)");

  std::vector<std::string> env_files;
  std::string counts_file;
  long n1 = -1, n_obs = -1;
  double coverage = 0.95;
  auto* bt = app.add_subcommand("backtest", "coverage tests on envelope files, or on raw counts");
  bt->add_option("--envelopes", env_files, "envelope CSV files with realized values");
  bt->add_option("--counts", counts_file, "counts-only mode: CSV with n1,n_obs,coverage[,label]");
  bt->add_option("--n1", n1, "counts-only mode: exceedances");
  bt->add_option("--n-obs", n_obs, "counts-only mode: observations");
  bt->add_option("--coverage", coverage, "counts-only mode: coverage level");

  auto* ro = app.add_subcommand("rolling", "rolling out-of-sample estimation, forecasting and backtest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  static const std::map<std::string, LogLevel> levels{{"debug", LogLevel::debug},
                                                      {"info", LogLevel::info},
                                                      {"warning", LogLevel::warning},
                                                      {"error", LogLevel::error},
                                                      {"silent", LogLevel::silent}};
  set_log_level(levels.at(g.log_level));

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (syn->parsed()) return cmd_synthesize(g, states);
    if (tr->parsed()) return cmd_transform(g);
    if (est->parsed()) return cmd_estimate(g, end_date, n_boot, tol);
    if (pc->parsed()) return cmd_pca(g, end_date);
    if (fc->parsed()) return cmd_forecast(g, end_date);
    if (bt->parsed()) {
      const fs::path out = g.out.empty() ? fs::path("out") : fs::path(g.out);
      if (!counts_file.empty() || n1 >= 0) return cmd_backtest_counts(counts_file, n1, n_obs, coverage, out);
      if (env_files.empty()) throw StageError("config", "backtest needs --envelopes or a counts-only option", 1);
      return cmd_backtest(env_files, out);
    }
    if (ro->parsed()) return cmd_rolling(g);
  } catch (const StageError& e) {
    std::cerr << "mchjm " << name << ": " << e.what() << '\n';
    return e.exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mchjm " << name << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mchjm " << name << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
