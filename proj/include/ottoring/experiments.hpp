#pragma once

// Named experiment runners. Each one consumes a resolved configuration,
// runs the corresponding simulation and writes CSV tables plus a JSON
// sidecar echoing the configuration it actually used.

#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

#include "ottoring/config.hpp"
#include "ottoring/engine.hpp"
#include "ottoring/io.hpp"

namespace ottoring {

struct ExperimentManifest {
  std::string experiment;
  KeyValueConfig config;
  std::string output_dir = ".";
  int workers = 1;

  ExperimentManifest() = default;
  ExperimentManifest(std::string exp, KeyValueConfig cfg, std::string out, int workers_)
      : experiment(std::move(exp)), config(std::move(cfg)), output_dir(std::move(out)),
        workers(workers_) {
    if (workers < 1) throw config_error("manifest: workers < 1");
  }

  std::string path(const std::string& file) const {
    return (std::filesystem::path(output_dir) / file).string();
  }
};

namespace detail {

/// Runs job(i) for i in [0, n) on up to `workers` threads. Exceptions are
/// rethrown on the calling thread; output ordering is the caller's problem
/// (results should land in preallocated slots).
inline void parallel_for(int n, int workers, const std::function<void(int)>& job) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const int n_threads = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n && !failed; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Single-bath system assembled from the hot-bath keys of the engine
/// configuration; the WM sits at the bath frequency.
inline SingleBathSystem single_bath_system(const EngineConfig& cfg) {
  return SingleBathSystem(cfg.hot_bath(), WorkingMediumSpec(cfg.omega_h, cfg.temp_wm()),
                          cfg.gamma(), cfg.profile(), cfg.controls, cfg.n_sites);
}

/// Least-squares slope of ln|y| versus ln x.
inline double fit_power_exponent(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_power_exponent: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]), ly = std::log(std::abs(ys[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(xs.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// WM temperature, correlation build-up and athermality over one
/// interaction period with a single bath.
inline void run_thermalize(const ExperimentManifest& m) {
  const EngineConfig cfg = engine_config_from(m.config);
  const SingleBathSystem sys = detail::single_bath_system(cfg);
  const long stride = m.config.get_int("trace_stride", 500);
  if (stride < 1) throw config_error("thermalize: trace_stride < 1");
  const double sample_dt = static_cast<double>(stride) * cfg.controls.dt;

  const int node1 = sys.coupling().sites.front();
  const std::vector<int> bath_modes = sys.layout().bath_modes(0);
  const int node1_mode = bath_modes[node1];
  std::vector<int> rest;
  for (int mode : bath_modes)
    if (mode != node1_mode) rest.push_back(mode);

  CsvWriter csv(m.path("thermalize.csv"),
                {"t", "T_eff", "MI_wm_bath", "MI_wm_node1", "MI_node1_rest", "athermality"});
  const Covariance sigma0 = sys.initial_state();
  const double omega_m = cfg.omega_h;
  const auto emit = [&](double t, const Covariance& state) {
    const Covariance wm = sys.wm_state(state);
    csv.row({t, effective_temperature(wm, omega_m),
             mutual_information(state, {{0}, bath_modes}),
             mutual_information(state, {{0}, {node1_mode}}),
             mutual_information(state, {{node1_mode}, rest}), athermality(wm)});
  };
  propagate_sampled(sys.schedule(), 0, cfg.tau, sample_dt, cfg.controls,
                    [&](double t, const Propagator& s) { emit(t, evolve_covariance(sigma0, s)); });
  csv.close();
  nlohmann::json sidecar = resolved_config_json(cfg);
  sidecar["experiment"] = "thermalize";
  sidecar["trace_stride"] = stride;
  write_json_sidecar(m.path("thermalize.json"), sidecar);
}

/// Final WM temperature over an (N, tau) grid: the causal-cone map.
inline void run_cone(const ExperimentManifest& m) {
  const EngineConfig base = engine_config_from(m.config);
  std::vector<double> n_values = m.config.get_double_list("n_values", {10, 20, 30, 40, 50});
  std::vector<double> tau_values =
      m.config.get_double_list("tau_values", {20, 40, 60, 80, 100, 120});

  struct Point {
    int n;
    double tau;
    double t_eff;
  };
  std::vector<Point> grid;
  for (double n : n_values)
    for (double tau : tau_values) grid.push_back({static_cast<int>(n), tau, 0});

  detail::parallel_for(static_cast<int>(grid.size()), m.workers, [&](int i) {
    EngineConfig cfg = base;
    cfg.n_hot = grid[i].n;
    cfg.tau = grid[i].tau;
    cfg.delta_override.reset();  // keep delta = 0.1 tau across the sweep
    grid[i].t_eff = detail::single_bath_system(cfg).final_wm_temperature();
  });

  CsvWriter csv(m.path("cone.csv"), {"N", "tau", "T_eff_final"});
  for (const Point& p : grid) csv.row({static_cast<long>(p.n), p.tau, p.t_eff});
  csv.close();
  nlohmann::json sidecar = resolved_config_json(base);
  sidecar["experiment"] = "cone";
  sidecar["n_values"] = n_values;
  sidecar["tau_values"] = tau_values;
  write_json_sidecar(m.path("cone.json"), sidecar);
}

inline void write_cycles_csv(const std::string& path, const std::vector<CycleRecord>& records) {
  CsvWriter csv(path, {"cycle", "W_ih", "W_ic", "W_hot_to_cold", "W_cold_to_hot", "W_total",
                       "Q", "eta", "eta_defined", "T_h_eff", "T_c_eff", "MI_baths",
                       "S_rel_hot", "S_rel_cold", "Q_pred", "W_pred", "eta_pred", "perfect"});
  for (const CycleRecord& r : records) {
    csv.row({static_cast<long>(r.index), r.w_ih, r.w_ic, r.w_hot_to_cold, r.w_cold_to_hot,
             r.w_total, r.heat, r.eta, static_cast<long>(r.eta_defined), r.t_h_eff, r.t_c_eff,
             r.mi_baths, r.s_rel_hot, r.s_rel_cold, r.q_pred, r.w_pred, r.eta_pred,
             static_cast<long>(r.perfect)});
  }
}

/// Full Otto run: per-cycle table, optional time traces.
inline void run_otto(const ExperimentManifest& m) {
  const EngineConfig cfg = engine_config_from(m.config);
  const OttoEngine eng(cfg);
  write_cycles_csv(m.path("cycles.csv"), eng.run());

  if (m.config.has("trace_stride")) {
    const long stride = m.config.get_int("trace_stride", 500);
    if (stride < 1) throw config_error("otto: trace_stride < 1");
    const double sample_dt = static_cast<double>(stride) * cfg.controls.dt;
    CsvWriter traces(m.path("cycle_traces.csv"), {"t", "cycle", "T_eff", "athermality"});
    run_engine_traced(eng, sample_dt, [&](double t, int cycle, const Covariance& sigma) {
      const Covariance wm = eng.wm_state(sigma);
      // During the cold half of cycle k the WM sits at omega_c; the trace
      // uses the frequency of the stroke the state last completed.
      const double phase = cfg.tau > 0 ? t - std::floor(t / (2 * cfg.tau)) * 2 * cfg.tau : 0;
      const double omega = phase <= cfg.tau ? cfg.omega_h : cfg.omega_c;
      traces.row({t, static_cast<long>(cycle), effective_temperature(wm, omega), athermality(wm)});
    });
    traces.close();
  }
  nlohmann::json sidecar = resolved_config_json(cfg);
  sidecar["experiment"] = "otto";
  write_json_sidecar(m.path("cycles.json"), sidecar);
}

/// Mutual-information traces: WM vs each bath node, bath vs bath, and
/// pairwise intra-bath snapshots at requested times.
inline void run_correlations(const ExperimentManifest& m) {
  const EngineConfig cfg = engine_config_from(m.config);
  const OttoEngine eng(cfg);
  const long stride = m.config.get_int("trace_stride", 2000);
  if (stride < 1) throw config_error("correlations: trace_stride < 1");
  const double sample_dt = static_cast<double>(stride) * cfg.controls.dt;
  const std::vector<double> snapshot_times = m.config.get_double_list("snapshot_times", {});

  CsvWriter nodes_csv(m.path("mi_wm_nodes.csv"), {"t", "bath", "node", "MI"});
  CsvWriter baths_csv(m.path("mi_baths.csv"), {"t", "MI"});
  std::vector<bool> snapshot_done(snapshot_times.size(), false);

  run_engine_traced(eng, sample_dt, [&](double t, int, const Covariance& sigma) {
    for (int b = 0; b < eng.layout().n_baths(); ++b) {
      const std::vector<int> modes = eng.layout().bath_modes(b);
      for (size_t node = 0; node < modes.size(); ++node) {
        nodes_csv.row({t, static_cast<long>(b), static_cast<long>(node),
                       mutual_information(sigma, {{0}, {modes[node]}})});
      }
    }
    baths_csv.row(
        {t, mutual_information(sigma, {eng.layout().bath_modes(0), eng.layout().bath_modes(1)})});

    for (size_t s = 0; s < snapshot_times.size(); ++s) {
      if (snapshot_done[s] || t + sample_dt / 2 < snapshot_times[s]) continue;
      snapshot_done[s] = true;
      CsvWriter snap(m.path("mi_intra_" + format_number(snapshot_times[s]) + ".csv"),
                     {"node_i", "node_j", "MI"});
      const std::vector<int> modes = eng.layout().bath_modes(0);
      for (size_t i = 0; i < modes.size(); ++i)
        for (size_t j = i + 1; j < modes.size(); ++j)
          snap.row({static_cast<long>(i), static_cast<long>(j),
                    mutual_information(sigma, {{modes[i]}, {modes[j]}})});
    }
  });
  nodes_csv.close();
  baths_csv.close();
  nlohmann::json sidecar = resolved_config_json(cfg);
  sidecar["experiment"] = "correlations";
  sidecar["trace_stride"] = stride;
  sidecar["snapshot_times"] = snapshot_times;
  write_json_sidecar(m.path("mi.json"), sidecar);
}

/// Coupling-strength scaling study: thermalization time, isochoric work,
/// heat, efficiency gap and power per alpha, plus fitted exponents.
inline void run_scaling(const ExperimentManifest& m) {
  const EngineConfig base = engine_config_from(m.config);
  const std::vector<double> alphas = m.config.get_double_list("alpha_values", {0.05, 0.1, 0.2});
  const double tau_lo = m.config.get_double("tau_lo", 20);
  const double tau_hi = m.config.get_double("tau_hi", 640);
  const double tau_res = m.config.get_double("tau_resolution", 0.5);

  struct Row {
    double alpha, tau_th, w_i, heat, eta, eta_gap, power;
  };
  std::vector<Row> rows(alphas.size());

  detail::parallel_for(static_cast<int>(alphas.size()), m.workers, [&](int i) {
    EngineConfig cfg = base;
    cfg.alpha = alphas[i];
    cfg.gamma_override = alphas[i];  // stay on the resonant gamma = alpha line
    Row& row = rows[i];
    row.alpha = alphas[i];
    row.tau_th = thermalization_time(cfg.hot_bath(), WorkingMediumSpec(cfg.omega_h, cfg.temp_wm()),
                                     cfg.gamma(), 0.1, cfg.controls, tau_lo, tau_hi, tau_res);
    cfg.tau = row.tau_th;
    cfg.delta_override.reset();
    cfg.n_cycles = 1;
    cfg.record_bath_mi = false;
    cfg.record_relative_entropy = false;
    const std::vector<CycleRecord> cycle = OttoEngine(cfg).run();
    row.w_i = cycle[0].w_ih;
    row.heat = cycle[0].heat;
    row.eta = cycle[0].eta;
    row.eta_gap = (1.0 - cfg.omega_c / cfg.omega_h) - cycle[0].eta;
    row.power = cycle[0].w_total / (2 * row.tau_th);
  });

  CsvWriter csv(m.path("scaling.csv"),
                {"alpha", "tau_th", "W_i", "Q", "eta", "eta_gap", "power"});
  std::vector<double> xs, tau_ths, w_is, gaps, powers;
  for (const Row& r : rows) {
    csv.row({r.alpha, r.tau_th, r.w_i, r.heat, r.eta, r.eta_gap, r.power});
    xs.push_back(r.alpha);
    tau_ths.push_back(r.tau_th);
    w_is.push_back(r.w_i);
    gaps.push_back(r.eta_gap);
    powers.push_back(r.power);
  }
  csv.close();

  nlohmann::json sidecar = resolved_config_json(base);
  sidecar["experiment"] = "scaling";
  sidecar["alpha_values"] = alphas;
  sidecar["exponents"] = {{"tau_th", detail::fit_power_exponent(xs, tau_ths)},
                          {"W_i", detail::fit_power_exponent(xs, w_is)},
                          {"eta_gap", detail::fit_power_exponent(xs, gaps)},
                          {"power", detail::fit_power_exponent(xs, powers)}};
  write_json_sidecar(m.path("scaling.json"), sidecar);
}

inline void run_experiment(const ExperimentManifest& m) {
  if (m.experiment == "thermalize")
    run_thermalize(m);
  else if (m.experiment == "cone")
    run_cone(m);
  else if (m.experiment == "otto")
    run_otto(m);
  else if (m.experiment == "correlations")
    run_correlations(m);
  else if (m.experiment == "scaling")
    run_scaling(m);
  else
    throw config_error("unknown experiment '" + m.experiment + "'");
}

}  // namespace ottoring
