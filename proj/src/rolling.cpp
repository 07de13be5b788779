#include "mchjm/rolling.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "mchjm/log.hpp"

namespace mchjm {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string coverage_tag(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", p);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace

Eigen::MatrixXd fitted_covariance(const ModelParams& params) { return params.covariance(); }

WindowFit fit_window(const CurveSystem& sys, const Eigen::MatrixXd& y, const RunConfig& cfg, int n_boot,
                     std::uint64_t seed, int boot_threads) {
  WindowFit wf;
  EstimationWindow window(sys, y);
  FitOptions opts;
  opts.tol = cfg.tol;
  opts.max_iters = cfg.max_iters;
  const RiskPremiumBlocks blocks(sys, std::min<Index>(cfg.short_buckets, sys.block_size(0)));
  wf.fit = fit(window, blocks, opts);
  if (n_boot > 0) {
    BootstrapOptions bo;
    bo.n_boot = n_boot;
    bo.seed = seed;
    bo.threads = boot_threads;
    wf.fit = bootstrap_errors(window, std::move(wf.fit), bo, opts);
  }
  wf.residuals = residuals(window, wf.fit.params);
  wf.pca = select_components(decompose(fitted_covariance(wf.fit.params)), cfg.pca_threshold);
  return wf;
}

std::vector<WindowForecast> forecast_window(const CurveSystem& sys, const WindowFit& wf, const Eigen::VectorXd& state,
                                            const RunConfig& cfg, std::uint64_t seed) {
  const ScenarioModel full = ScenarioModel::from_params(sys, wf.fit.params, wf.residuals);
  const ScenarioModel model = cfg.forecast_volatility == "pca" ? full.with_volatility(reduced_volatility(wf.pca)) : full;
  const DriftMode mode = parse_drift_mode(cfg.drift_mode);
  std::vector<WindowForecast> out;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const ForecastMethod method = parse_forecast_method(cfg.methods[mi]);
    if (method == ForecastMethod::gaussian_closed_form) {
      for (int h : cfg.horizons) {
        const GaussianMoments mom = gaussian_moments(model, state, h, mode);
        WindowForecast wfc{method, h, {}};
        for (double p : cfg.coverage) wfc.envelopes.push_back(envelope(mom, p));
        out.push_back(std::move(wfc));
      }
    } else {
      const auto ens = simulate_checkpoints(model, state, cfg.horizons, cfg.n_paths, method, mix_seed(seed, mi, 0x5c), 1);
      for (int h : cfg.horizons) {
        const auto it = std::find_if(ens.begin(), ens.end(), [h](const Ensemble& e) { return e.horizon == h; });
        WindowForecast wfc{method, h, {}};
        for (double p : cfg.coverage) wfc.envelopes.push_back(envelope(*it, p));
        out.push_back(std::move(wfc));
      }
    }
  }
  return out;
}

RollingResult run_rolling(const CurveSystem& sys, const StatePanel& panel, const RunConfig& cfg) {
  cfg.validate();
  const Index t = panel.states.rows();
  if (panel.states.cols() != sys.dimension()) throw std::invalid_argument("state panel does not match the curve system");
  if (t - 1 < cfg.window) {
    throw std::invalid_argument("history too short: " + std::to_string(t) + " states for a window of " +
                                std::to_string(cfg.window) + " increments");
  }
  const Eigen::MatrixXd y = compute_y_series(sys, panel.states);

  RollingResult res;
  for (Index e = cfg.window; e <= t - 1; e += cfg.window_stride) {
    WindowRecord rec;
    rec.end = e;
    rec.end_date = panel.dates[static_cast<std::size_t>(e)];
    res.windows.push_back(std::move(rec));
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < res.windows.size(); i = next++) {
      WindowRecord& rec = res.windows[i];
      try {
        const WindowFit wf = fit_window(sys, y.middleRows(rec.end - cfg.window, cfg.window), cfg, cfg.rolling_boot,
                                        mix_seed(cfg.seed, static_cast<std::uint64_t>(rec.end), 0xb0), 1);
        rec.forecasts = forecast_window(sys, wf, panel.states.row(rec.end).transpose(), cfg,
                                        mix_seed(cfg.seed, static_cast<std::uint64_t>(rec.end), 0xf0));
        rec.fit = wf.fit;
        rec.pca = wf.pca;
        rec.ok = true;
      } catch (const std::exception& ex) {
        rec.error = ex.what();
        log_warning("window ending " + rec.end_date.iso() + " excluded: " + rec.error);
      }
    }
  };
  const int nthreads = std::min<int>(resolve_threads(cfg.threads), static_cast<int>(res.windows.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& w : res.windows) res.failed += w.ok ? 0 : 1;
  if (res.failed > 0) log_warning(std::to_string(res.failed) + " rolling windows failed and were excluded");

  std::vector<std::string> labels;
  for (Index i = 0; i < sys.dimension(); ++i) labels.push_back(sys.component_label(i));

  // Forecast slots are laid out identically in every successful window.
  const WindowRecord* first = nullptr;
  for (const auto& w : res.windows) {
    if (w.ok) {
      first = &w;
      break;
    }
  }
  if (first == nullptr) throw std::runtime_error("every rolling window failed");
  for (std::size_t slot = 0; slot < first->forecasts.size(); ++slot) {
    const int h = first->forecasts[slot].horizon;
    const ForecastMethod method = first->forecasts[slot].method;
    std::vector<const WindowRecord*> used;
    for (const auto& w : res.windows) {
      if (w.ok && w.end + h <= t - 1) used.push_back(&w);
    }
    if (used.empty()) continue;
    for (std::size_t pi = 0; pi < cfg.coverage.size(); ++pi) {
      Eigen::MatrixXd lo(static_cast<Index>(used.size()), sys.dimension());
      Eigen::MatrixXd hi(static_cast<Index>(used.size()), sys.dimension());
      std::vector<Date> targets;
      for (std::size_t k = 0; k < used.size(); ++k) {
        const auto& env = used[k]->forecasts[slot].envelopes[pi];
        lo.row(static_cast<Index>(k)) = env.lower.transpose();
        hi.row(static_cast<Index>(k)) = env.upper.transpose();
        targets.push_back(panel.dates[static_cast<std::size_t>(used[k]->end + h)]);
      }
      for (const auto& s : count_exceedances(lo, hi, targets, panel.dates, panel.states, labels, h, cfg.coverage[pi])) {
        res.report.add(std::string(to_string(method)), s);
      }
    }
  }
  return res;
}

void write_rolling_artifacts(const RollingResult& res, const CurveSystem& sys, const StatePanel& panel,
                             const RunConfig& cfg, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "envelopes");
  fs::create_directories(dir / "plotdata");
  const Index d = sys.dimension();
  const Index t = panel.states.rows();

  std::vector<const WindowRecord*> ok;
  for (const auto& w : res.windows) {
    if (w.ok) ok.push_back(&w);
  }

  {
    auto out = open_out(dir / "params.csv");
    out << "end_date,n_iters,converged,neg_log_lik";
    std::vector<std::string> names;
    if (!ok.empty()) names = ok.front()->fit.theta_names(sys);
    for (const auto& n : names) out << ',' << n;
    const bool with_se = !ok.empty() && ok.front()->fit.bootstrap.has_value();
    if (with_se) {
      for (const auto& n : names) out << ",se_" << n;
    }
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) out << ",gamma_" << sys.component_label(i) << '_' << sys.component_label(j);
    }
    out << '\n';
    for (const auto* w : ok) {
      out << w->end_date.iso() << ',' << w->fit.n_iters << ',' << (w->fit.converged ? 1 : 0) << ','
          << format_number(w->fit.neg_log_lik);
      const Eigen::VectorXd th = w->fit.theta();
      for (Index i = 0; i < th.size(); ++i) out << ',' << format_number(th(i));
      if (with_se) {
        for (Index i = 0; i < th.size(); ++i) out << ',' << format_number(w->fit.bootstrap->std_errors(i));
      }
      for (Index i = 0; i < d; ++i) {
        for (Index j = i + 1; j < d; ++j) out << ',' << format_number(w->fit.params.gamma(i, j));
      }
      out << '\n';
    }
  }

  {
    auto out = open_out(dir / "pca.csv");
    auto fout = open_out(dir / "plotdata" / "pca_components.csv");
    out << "end_date,F,phi";
    for (Index m = 0; m < d; ++m) out << ",eig_" << m + 1;
    out << '\n';
    fout << "end_date,F,phi\n";
    for (const auto* w : ok) {
      out << w->end_date.iso() << ',' << w->pca.F << ',' << format_number(w->pca.phi);
      for (Index m = 0; m < d; ++m) out << ',' << format_number(w->pca.eigenvalues(m));
      out << '\n';
      fout << w->end_date.iso() << ',' << w->pca.F << ',' << format_number(w->pca.phi) << '\n';
    }
  }

  if (!ok.empty()) {
    const auto& slots = ok.front()->forecasts;
    for (std::size_t slot = 0; slot < slots.size(); ++slot) {
      const std::string method(to_string(slots[slot].method));
      const int h = slots[slot].horizon;
      const std::string stem = method + "_h" + std::to_string(h);
      auto env_out = open_out(dir / "envelopes" / (stem + ".csv"));
      env_out << "method,horizon,end_date,target_date,component,mean,sd,band_lower,band_upper";
      for (double p : cfg.coverage) env_out << ",lower_" << coverage_tag(p) << ",upper_" << coverage_tag(p);
      env_out << ",realized\n";

      std::vector<std::ofstream> plots;
      for (std::size_t b = 0; b < sys.block_count(); ++b) {
        plots.push_back(open_out(dir / "plotdata" / (stem + "_" + sys.block_name(b) + ".csv")));
        auto& po = plots.back();
        po << "end_date,target_date,bucket,mean,band_lower,band_upper";
        for (double p : cfg.coverage) po << ",lower_" << coverage_tag(p) << ",upper_" << coverage_tag(p);
        po << ",realized";
        for (double p : cfg.coverage) po << ",exception_" << coverage_tag(p);
        po << '\n';
      }

      for (const auto* w : ok) {
        const auto& fc = w->forecasts[slot];
        const bool has_real = w->end + h <= t - 1;
        const std::string target = has_real ? panel.dates[static_cast<std::size_t>(w->end + h)].iso() : "";
        for (Index i = 0; i < d; ++i) {
          const auto& e0 = fc.envelopes.front();
          const std::string real = has_real ? format_number(panel.states(w->end + h, i)) : "";
          env_out << method << ',' << h << ',' << w->end_date.iso() << ',' << target << ',' << sys.component_label(i) << ','
                  << format_number(e0.mean(i)) << ',' << format_number(e0.sd(i)) << ','
                  << format_number(e0.band_lower(i)) << ',' << format_number(e0.band_upper(i));
          for (const auto& e : fc.envelopes) env_out << ',' << format_number(e.lower(i)) << ',' << format_number(e.upper(i));
          env_out << ',' << real << '\n';

          std::size_t b = sys.block_count() - 1;
          while (sys.block_offset(b) > i) --b;
          auto& po = plots[b];
          po << w->end_date.iso() << ',' << target << ','
             << sys.grid(b).label(static_cast<std::size_t>(i - sys.block_offset(b))) << ',' << format_number(e0.mean(i))
             << ',' << format_number(e0.band_lower(i)) << ',' << format_number(e0.band_upper(i));
          for (const auto& e : fc.envelopes) po << ',' << format_number(e.lower(i)) << ',' << format_number(e.upper(i));
          po << ',' << real;
          for (const auto& e : fc.envelopes) {
            po << ',';
            if (has_real) {
              const double v = panel.states(w->end + h, i);
              po << (v < e.lower(i) ? -1 : (v > e.upper(i) ? 1 : 0));
            }
          }
          po << '\n';
        }
      }
    }
  }

  {
    auto out = open_out(dir / "coverage_report.csv");
    res.report.write_csv(out);
    auto txt = open_out(dir / "coverage_report.txt");
    res.report.write_table(txt);
  }
}

}  // namespace mchjm
