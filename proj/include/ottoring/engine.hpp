#pragma once

// Otto-cycle orchestration: isochores, adiabats (instantaneous swap or
// counterdiabatic ramp), per-cycle energetic bookkeeping, the analytic
// cycle predictor, thermalization-time search, and cached-propagator
// execution for multi-cycle runs.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "ottoring/information.hpp"
#include "ottoring/models.hpp"

namespace ottoring {

/// n(x) = 1/(e^x - 1).
inline double bose_occupation(double x) {
  if (x == 0) throw std::invalid_argument("bose_occupation: x = 0");
  return 1.0 / std::expm1(x);
}

enum class AdiabatMode { instantaneous, counterdiabatic };

struct EngineConfig {
  int n_hot = 300;
  int n_cold = 300;
  double omega_h = 2.0;
  double omega_c = 1.0;
  double alpha = 0.1;
  double temp_hot = 4.0;
  double temp_cold = 0.5;
  double tau = 100.0;
  int n_cycles = 20;
  int n_sites = 1;
  AdiabatMode adiabat_mode = AdiabatMode::instantaneous;
  double tau_ad = 0.1;
  IntegratorControls controls;
  bool record_bath_mi = true;
  bool record_relative_entropy = true;
  bool use_cached_propagators = true;

  // Resonance defaults: gamma = alpha, delta = 0.1 tau, WM starts at the
  // cold temperature; all three can be overridden.
  std::optional<double> gamma_override;
  std::optional<double> delta_override;
  std::optional<double> temp_wm_override;

  double gamma() const { return gamma_override.value_or(alpha); }
  double delta() const { return delta_override.value_or(0.1 * tau); }
  double temp_wm() const { return temp_wm_override.value_or(temp_cold); }

  SwitchingProfile profile() const { return {tau, delta()}; }
  BathSpec hot_bath() const { return {n_hot, omega_h, alpha, temp_hot}; }
  BathSpec cold_bath() const { return {n_cold, omega_c, alpha, temp_cold}; }

  bool refrigerator_regime() const { return omega_c > omega_h; }
};

/// Everything observed during one cycle. Works are positive when extracted
/// from the system; heat is positive when it leaves the hot bath.
struct CycleRecord {
  int index = 0;
  double w_ih = 0, w_ic = 0;            // isochoric works
  double w_hot_to_cold = 0, w_cold_to_hot = 0;
  double w_total = 0;
  double heat = 0;
  double eta = 0;
  bool eta_defined = false;
  double t_h_eff = 0, t_c_eff = 0;      // WM temperatures after each isochore
  double mi_baths = std::numeric_limits<double>::quiet_NaN();
  double s_rel_hot = std::numeric_limits<double>::quiet_NaN();
  double s_rel_cold = std::numeric_limits<double>::quiet_NaN();
  double q_pred = 0, w_pred = 0, eta_pred = 0;
  bool perfect = false;
};

struct CyclePrediction {
  double heat = 0;
  double work = 0;
  double eta = 0;
};

/// Appendix-style perfect-cycle predictor from WM temperatures and the
/// measured isochoric works.
inline CyclePrediction predict_cycle(double t_h, double t_c, double t_c_prev, double w_ih,
                                     double w_ic, double omega_h, double omega_c) {
  if (!(t_h > 0 && t_c > 0 && t_c_prev > 0))
    throw std::invalid_argument("predict_cycle: temperatures must be positive");
  const double n_h = bose_occupation(omega_h / t_h);
  const double n_c = bose_occupation(omega_c / t_c);
  const double n_cp = bose_occupation(omega_c / t_c_prev);
  CyclePrediction p;
  p.heat = omega_h * (n_h - n_cp) + w_ih;
  p.work = (omega_h - omega_c) * (n_h - n_c) + w_ih + w_ic;
  const double eta_o = 1.0 - omega_c / omega_h;
  p.eta = eta_o + (omega_c * w_ih + omega_h * w_ic) / (omega_h * p.heat) -
          (omega_h - omega_c) / p.heat * (n_c - n_cp);
  return p;
}

/// Instantaneous Hamiltonian swap: the state is untouched, the extracted
/// work is the WM energy difference (omega_from - omega_to) tr(sigma_m)/4.
inline double adiabat_swap_work(const Covariance& sigma_m, double omega_from, double omega_to) {
  if (sigma_m.modes() != 1) throw std::invalid_argument("adiabat_swap_work: need the WM block");
  return (omega_from - omega_to) * sigma_m.mat.trace() / 4.0;
}

/// Passive rescaling from omega_from-scaled to omega_ref-scaled quadratures
/// of a single mode: q -> q sqrt(omega_ref/omega_from), p -> p / (...).
inline Matrix quadrature_rescale(double omega_from, double omega_ref) {
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = std::sqrt(omega_ref / omega_from);
  b(1, 1) = std::sqrt(omega_from / omega_ref);
  return b;
}

struct IsochoreReport {
  double work = 0;            // total-system energy decrease
  double heat_from_bath = 0;  // energy the active bath loses
};

namespace detail {

inline Matrix block_diag(const std::vector<Matrix>& blocks) {
  long dim = 0;
  for (const auto& b : blocks) dim += b.rows();
  Matrix out = Matrix::Zero(dim, dim);
  long at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace detail

/// The composed WM + baths system for a given configuration. Owns the
/// layout, the block Hamiltonians and the per-stroke schedules.
class OttoEngine {
 public:
  explicit OttoEngine(EngineConfig cfg)
      : cfg_(std::move(cfg)),
        layout_({cfg_.n_hot, cfg_.n_cold}),
        baths_{cfg_.hot_bath(), cfg_.cold_bath()},
        f_hot_(bath_hamiltonian(baths_[0])),
        f_cold_(bath_hamiltonian(baths_[1])),
        free_h_(free_system_hamiltonian(layout_, cfg_.omega_h, baths_)),
        free_c_(free_system_hamiltonian(layout_, cfg_.omega_c, baths_)),
        coupling_(CouplingSpec::evenly_spaced(cfg_.gamma(), cfg_.n_sites, cfg_.n_hot)) {
    if (cfg_.n_hot != cfg_.n_cold && cfg_.n_sites > 1)
      throw std::invalid_argument("OttoEngine: multi-site coupling needs equal bath sizes");
  }

  const EngineConfig& config() const { return cfg_; }
  const SystemLayout& layout() const { return layout_; }
  const Hamiltonian& hot_bath_hamiltonian() const { return f_hot_; }
  const Hamiltonian& cold_bath_hamiltonian() const { return f_cold_; }

  /// WM thermal at temp_wm w.r.t. omega_c, baths thermal, no correlations.
  Covariance initial_state() const {
    const Covariance wm = thermal_state(Hamiltonian::free_mode(cfg_.omega_c), cfg_.temp_wm());
    return direct_sum({wm, thermal_state(f_hot_, cfg_.temp_hot),
                       thermal_state(f_cold_, cfg_.temp_cold)});
  }

  HamiltonianSchedule isochore_schedule(int bath) const {
    const double omega = bath == 0 ? cfg_.omega_h : cfg_.omega_c;
    return assemble_engine_schedule(layout_, omega, baths_, bath, coupling_, cfg_.profile());
  }

  Covariance wm_state(const Covariance& sigma) const { return extract_block(sigma, {0}); }
  Covariance bath_state(const Covariance& sigma, int bath) const {
    return extract_block(sigma, layout_.bath_modes(bath));
  }

  /// One switched interaction with the given bath. With a cached propagator
  /// the whole stroke is a single congruence; otherwise the stroke is
  /// integrated segment by segment.
  IsochoreReport run_isochore(Covariance& sigma, int bath, const Propagator* cached = nullptr) const {
    const Hamiltonian& free_f = bath == 0 ? free_h_ : free_c_;
    const Hamiltonian& bath_f = bath == 0 ? f_hot_ : f_cold_;
    IsochoreReport rep;
    const double e0 = mean_energy(free_f, sigma);
    const double eb0 = mean_energy(bath_f, bath_state(sigma, bath));
    if (cached) {
      sigma = evolve_covariance(sigma, *cached);
    } else {
      const HamiltonianSchedule sched = isochore_schedule(bath);
      const SwitchingProfile prof = cfg_.profile();
      for (auto [a, b] : {std::pair{0.0, prof.delta},
                          std::pair{prof.delta, prof.tau - prof.delta},
                          std::pair{prof.tau - prof.delta, prof.tau}}) {
        sigma = evolve_covariance(sigma, propagate(sched, a, b, cfg_.controls));
      }
    }
    rep.work = e0 - mean_energy(free_f, sigma);
    rep.heat_from_bath = eb0 - mean_energy(bath_f, bath_state(sigma, bath));
    return rep;
  }

  /// Full-system propagator of the counterdiabatic adiabat (WM ramp plus
  /// free bath evolution), including the passive quadrature rescale that
  /// expresses the incoming state in omega_to-scaled quadratures.
  Propagator adiabat_ramp_propagator(double omega_from, double omega_to) const {
    const FrequencyRamp ramp = sin_squared_ramp(omega_from, omega_to, cfg_.tau_ad);
    const HamiltonianSchedule wm_sched = counterdiabatic_wm_schedule(ramp, omega_to);
    const Matrix s_wm = propagate(wm_sched, 0, cfg_.tau_ad, cfg_.controls).mat *
                        quadrature_rescale(omega_from, omega_to);
    const Matrix s_hot = constant_propagator(f_hot_, cfg_.tau_ad).mat;
    const Matrix s_cold = constant_propagator(f_cold_, cfg_.tau_ad).mat;
    return Propagator(detail::block_diag({s_wm, s_hot, s_cold}));
  }

  /// Adiabat stroke; returns the extracted work. The swap leaves the state
  /// untouched, the ramp evolves it over tau_ad.
  double run_adiabat(Covariance& sigma, double omega_from, double omega_to,
                     const Propagator* cached_ramp = nullptr) const {
    if (cfg_.adiabat_mode == AdiabatMode::instantaneous)
      return adiabat_swap_work(wm_state(sigma), omega_from, omega_to);
    const Hamiltonian& f_before = omega_from == cfg_.omega_h ? free_h_ : free_c_;
    const Hamiltonian& f_after = omega_to == cfg_.omega_h ? free_h_ : free_c_;
    const double e0 = mean_energy(f_before, sigma);
    if (cached_ramp) {
      sigma = evolve_covariance(sigma, *cached_ramp);
    } else {
      sigma = evolve_covariance(sigma, adiabat_ramp_propagator(omega_from, omega_to));
    }
    return e0 - mean_energy(f_after, sigma);
  }

  /// Executes n_cycles of [hot isochore, h->c adiabat, cold isochore,
  /// c->h adiabat] and returns the per-cycle records.
  std::vector<CycleRecord> run() const {
    Covariance sigma = initial_state();
    return run_from(sigma);
  }

  /// Same, but starts from (and leaves behind) the supplied state.
  std::vector<CycleRecord> run_from(Covariance& sigma) const {
    std::optional<Propagator> s_hot, s_cold, s_h2c, s_c2h;
    if (cfg_.use_cached_propagators) {
      s_hot = propagate(isochore_schedule(0), 0, cfg_.tau, cfg_.controls);
      s_cold = propagate(isochore_schedule(1), 0, cfg_.tau, cfg_.controls);
    }
    if (cfg_.adiabat_mode == AdiabatMode::counterdiabatic && cfg_.use_cached_propagators) {
      s_h2c = adiabat_ramp_propagator(cfg_.omega_h, cfg_.omega_c);
      s_c2h = adiabat_ramp_propagator(cfg_.omega_c, cfg_.omega_h);
    }
    std::optional<ThermalReference> ref_h, ref_c;
    if (cfg_.record_relative_entropy) {
      ref_h.emplace(f_hot_, cfg_.temp_hot);
      ref_c.emplace(f_cold_, cfg_.temp_cold);
    }

    const double q_floor = 1e-6 * cfg_.omega_h;
    std::vector<CycleRecord> records;
    records.reserve(cfg_.n_cycles);
    double t_c_prev = cfg_.temp_wm();
    for (int k = 1; k <= cfg_.n_cycles; ++k) {
      CycleRecord rec;
      rec.index = k;
      if (cfg_.record_relative_entropy) {
        rec.s_rel_hot = ref_h->relative_entropy(bath_state(sigma, 0));
        rec.s_rel_cold = ref_c->relative_entropy(bath_state(sigma, 1));
      }

      const IsochoreReport hot = run_isochore(sigma, 0, s_hot ? &*s_hot : nullptr);
      rec.w_ih = hot.work;
      rec.heat = hot.heat_from_bath;
      rec.t_h_eff = effective_temperature(wm_state(sigma), cfg_.omega_h);

      rec.w_hot_to_cold = run_adiabat(sigma, cfg_.omega_h, cfg_.omega_c, s_h2c ? &*s_h2c : nullptr);

      const IsochoreReport cold = run_isochore(sigma, 1, s_cold ? &*s_cold : nullptr);
      rec.w_ic = cold.work;
      rec.t_c_eff = effective_temperature(wm_state(sigma), cfg_.omega_c);

      rec.w_cold_to_hot = run_adiabat(sigma, cfg_.omega_c, cfg_.omega_h, s_c2h ? &*s_c2h : nullptr);

      rec.w_total = rec.w_ih + rec.w_ic + rec.w_hot_to_cold + rec.w_cold_to_hot;
      rec.eta_defined = std::abs(rec.heat) >= q_floor;
      rec.eta = rec.eta_defined ? rec.w_total / rec.heat
                                : std::numeric_limits<double>::quiet_NaN();

      if (cfg_.record_bath_mi) {
        rec.mi_baths = mutual_information(sigma, {layout_.bath_modes(0), layout_.bath_modes(1)});
      }

      if (rec.t_h_eff > 0 && rec.t_c_eff > 0 && t_c_prev > 0) {
        const CyclePrediction p = predict_cycle(rec.t_h_eff, rec.t_c_eff, t_c_prev, rec.w_ih,
                                                rec.w_ic, cfg_.omega_h, cfg_.omega_c);
        rec.q_pred = p.heat;
        rec.w_pred = p.work;
        rec.eta_pred = p.eta;
      }
      t_c_prev = rec.t_c_eff;
      records.push_back(rec);
    }

    if (!records.empty()) {
      const double w1 = records.front().w_total;
      for (auto& rec : records) rec.perfect = rec.w_total >= 0.9 * w1;
    }
    return records;
  }

 private:
  EngineConfig cfg_;
  SystemLayout layout_;
  std::vector<BathSpec> baths_;
  Hamiltonian f_hot_, f_cold_;
  Hamiltonian free_h_, free_c_;
  CouplingSpec coupling_;
};

/// WM coupled to one ring bath; the building block of the thermalization
/// and causal-cone studies.
class SingleBathSystem {
 public:
  SingleBathSystem(BathSpec bath, WorkingMediumSpec wm, double gamma, SwitchingProfile profile,
                   IntegratorControls controls = {}, int n_sites = 1)
      : bath_(bath),
        wm_(wm),
        layout_({bath.n_nodes}),
        coupling_(CouplingSpec::evenly_spaced(gamma, n_sites, bath.n_nodes)),
        profile_(profile),
        controls_(controls),
        f_bath_(bath_hamiltonian(bath)),
        free_f_(free_system_hamiltonian(layout_, wm.omega_m, {bath})),
        schedule_(assemble_engine_schedule(layout_, wm.omega_m, {bath}, 0, coupling_, profile)) {}

  const SystemLayout& layout() const { return layout_; }
  const Hamiltonian& bath_block_hamiltonian() const { return f_bath_; }
  const HamiltonianSchedule& schedule() const { return schedule_; }
  const CouplingSpec& coupling() const { return coupling_; }
  const SwitchingProfile& profile() const { return profile_; }

  Covariance initial_state() const {
    const Covariance wm = thermal_state(Hamiltonian::free_mode(wm_.omega_m),
                                        wm_.initial_temperature);
    return direct_sum({wm, thermal_state(f_bath_, bath_.temperature)});
  }

  /// Full interaction period [0, tau]; returns the work/heat report.
  IsochoreReport run(Covariance& sigma) const {
    IsochoreReport rep;
    const double e0 = mean_energy(free_f_, sigma);
    const double eb0 = mean_energy(f_bath_, bath_state(sigma));
    sigma = evolve_covariance(sigma, propagate(schedule_, 0, profile_.tau, controls_));
    rep.work = e0 - mean_energy(free_f_, sigma);
    rep.heat_from_bath = eb0 - mean_energy(f_bath_, bath_state(sigma));
    return rep;
  }

  Covariance wm_state(const Covariance& sigma) const { return extract_block(sigma, {0}); }
  Covariance bath_state(const Covariance& sigma) const {
    return extract_block(sigma, layout_.bath_modes(0));
  }

  double final_wm_temperature() const {
    Covariance sigma = initial_state();
    run(sigma);
    return effective_temperature(wm_state(sigma), wm_.omega_m);
  }

 private:
  BathSpec bath_;
  WorkingMediumSpec wm_;
  SystemLayout layout_;
  CouplingSpec coupling_;
  SwitchingProfile profile_;
  IntegratorControls controls_;
  Hamiltonian f_bath_;
  Hamiltonian free_f_;
  HamiltonianSchedule schedule_;
};

/// Runs the cycle sequence while reporting the full state at (roughly)
/// every sample_dt of evolved time. Stroke step propagators are built once
/// and reused across cycles. The callback receives (t, cycle, state); the
/// instantaneous adiabats advance the cycle but not the clock.
inline void run_engine_traced(const OttoEngine& eng, double sample_dt,
                              const std::function<void(double, int, const Covariance&)>& on_sample) {
  if (sample_dt <= 0) throw std::invalid_argument("run_engine_traced: sample_dt <= 0");
  const EngineConfig& cfg = eng.config();

  const auto build_steps = [&](int bath) {
    std::vector<std::pair<double, Propagator>> steps;
    const HamiltonianSchedule sched = eng.isochore_schedule(bath);
    double t = 0;
    while (t < cfg.tau - 1e-12) {
      const double next = std::min(t + sample_dt, cfg.tau);
      steps.emplace_back(next - t, propagate(sched, t, next, cfg.controls));
      t = next;
    }
    return steps;
  };
  const auto steps_hot = build_steps(0);
  const auto steps_cold = build_steps(1);
  std::optional<Propagator> ramp_h2c, ramp_c2h;
  if (cfg.adiabat_mode == AdiabatMode::counterdiabatic) {
    ramp_h2c = eng.adiabat_ramp_propagator(cfg.omega_h, cfg.omega_c);
    ramp_c2h = eng.adiabat_ramp_propagator(cfg.omega_c, cfg.omega_h);
  }

  Covariance sigma = eng.initial_state();
  double t = 0;
  on_sample(t, 0, sigma);
  for (int k = 1; k <= cfg.n_cycles; ++k) {
    for (const auto& [h, s] : steps_hot) {
      sigma = evolve_covariance(sigma, s);
      t += h;
      on_sample(t, k, sigma);
    }
    if (ramp_h2c) {
      sigma = evolve_covariance(sigma, *ramp_h2c);
      t += cfg.tau_ad;
      on_sample(t, k, sigma);
    }
    for (const auto& [h, s] : steps_cold) {
      sigma = evolve_covariance(sigma, s);
      t += h;
      on_sample(t, k, sigma);
    }
    if (ramp_c2h) {
      sigma = evolve_covariance(sigma, *ramp_c2h);
      t += cfg.tau_ad;
      on_sample(t, k, sigma);
    }
  }
}

/// Smallest interaction duration tau (with delta = delta_frac * tau) after
/// which the final WM temperature reaches the bath temperature. The bracket
/// [tau_lo, tau_hi] should roughly enclose the expected value: its width
/// sets the forward-scan step ((tau_hi - tau_lo) / 16), which must stay
/// below the width of the first crossing window to not step over it.
inline double thermalization_time(const BathSpec& bath, const WorkingMediumSpec& wm, double gamma,
                                  double delta_frac = 0.1, IntegratorControls controls = {},
                                  double tau_lo = 1.0, double tau_hi = 400.0,
                                  double tau_resolution = 0.25) {
  // The WM approaches T_b from the T_m side; "thermalized" means the final
  // WM temperature has reached the bath temperature itself.
  const bool heating = bath.temperature >= wm.initial_temperature;
  const auto thermalized = [&](double tau) {
    SingleBathSystem sys(bath, wm, gamma, {tau, delta_frac * tau}, controls);
    const double t_eff = sys.final_wm_temperature();
    return heating ? t_eff >= bath.temperature : t_eff <= bath.temperature;
  };
  if (thermalized(tau_lo)) return tau_lo;
  // The final temperature is not monotone in tau: it crosses T_b, then
  // finite-size recurrences pull it back across for longer durations. A
  // doubling search can overshoot into such a later window, so scan forward
  // linearly to bracket the first crossing, then bisect inside the bracket.
  double step = std::max(tau_resolution, (tau_hi - tau_lo) / 16.0);
  double lo = tau_lo;
  double hi = tau_lo + step;
  while (!thermalized(hi)) {
    lo = hi;
    hi += step;
    if (hi > tau_hi) step *= 1.5;
    if (hi > 1e5) throw std::runtime_error("thermalization_time: no thermalization found");
  }
  while (hi - lo > tau_resolution) {
    const double mid = 0.5 * (lo + hi);
    (thermalized(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace ottoring
