#pragma once

// Builders for the concrete system: harmonic ring baths, the working
// medium, switched WM-bath couplings, the composed engine Hamiltonian,
// and the counterdiabatic frequency ramp for finite-time adiabats.

#include <cmath>
#include <numeric>
#include <vector>

#include "ottoring/dynamics.hpp"

namespace ottoring {

/// Translation-invariant harmonic ring with nearest-neighbour q-q coupling.
struct BathSpec {
  int n_nodes = 0;
  double omega_b = 0;
  double alpha = 0;
  double temperature = 0;

  BathSpec() = default;
  BathSpec(int n, double omega, double alpha_, double temp)
      : n_nodes(n), omega_b(omega), alpha(alpha_), temperature(temp) {
    if (n < 3) throw std::invalid_argument("BathSpec: need at least 3 nodes");
    if (!(omega > 0)) throw std::invalid_argument("BathSpec: omega_b must be positive");
    if (!(std::abs(alpha_) < omega / 2))
      throw std::invalid_argument("BathSpec: need |alpha| < omega_b/2");
    if (temp < 0) throw std::invalid_argument("BathSpec: negative temperature");
  }
};

struct WorkingMediumSpec {
  double omega_m = 0;
  double initial_temperature = 0;

  WorkingMediumSpec() = default;
  WorkingMediumSpec(double omega, double temp) : omega_m(omega), initial_temperature(temp) {
    if (!(omega > 0)) throw std::invalid_argument("WorkingMediumSpec: omega_m must be positive");
    if (temp < 0) throw std::invalid_argument("WorkingMediumSpec: negative temperature");
  }
};

/// WM-bath coupling: strength and the bath nodes the WM attaches to.
struct CouplingSpec {
  double gamma = 0;
  std::vector<int> sites;  // 0-based bath node indices

  CouplingSpec() = default;
  CouplingSpec(double gamma_, std::vector<int> sites_) : gamma(gamma_), sites(std::move(sites_)) {
    if (sites.empty()) throw std::invalid_argument("CouplingSpec: empty site set");
  }

  /// k sites at floor(j*N/k), j = 0..k-1; k = 1 gives the first node.
  static CouplingSpec evenly_spaced(double gamma, int n_sites, int bath_nodes) {
    if (n_sites < 1 || n_sites > bath_nodes)
      throw std::invalid_argument("CouplingSpec: bad site count");
    std::vector<int> s(n_sites);
    for (int j = 0; j < n_sites; ++j) s[j] = j * bath_nodes / n_sites;
    return CouplingSpec(gamma, std::move(s));
  }
};

/// Mode layout of the composed system: WM in slot 0, baths in declaration
/// order immediately after.
struct SystemLayout {
  std::vector<int> bath_sizes;

  explicit SystemLayout(std::vector<int> sizes) : bath_sizes(std::move(sizes)) {
    for (int n : bath_sizes)
      if (n < 1) throw std::invalid_argument("SystemLayout: empty bath");
  }

  int n_baths() const { return static_cast<int>(bath_sizes.size()); }
  int total_modes() const {
    return 1 + std::accumulate(bath_sizes.begin(), bath_sizes.end(), 0);
  }
  int wm_mode() const { return 0; }

  int bath_start(int b) const {
    check_bath(b);
    int at = 1;
    for (int i = 0; i < b; ++i) at += bath_sizes[i];
    return at;
  }

  std::vector<int> bath_modes(int b) const {
    std::vector<int> out(bath_sizes[b]);
    std::iota(out.begin(), out.end(), bath_start(b));
    return out;
  }

  void check_bath(int b) const {
    if (b < 0 || b >= n_baths()) throw std::invalid_argument("SystemLayout: unknown bath");
  }
};

/// Ring Hamiltonian matrix: omega_b/2 on the diagonal, alpha/2 on the
/// q_i q_{i+1} couplings with periodic closure.
inline Hamiltonian bath_hamiltonian(const BathSpec& spec) {
  const int n = spec.n_nodes;
  Matrix f = Matrix::Identity(2 * n, 2 * n) * (spec.omega_b / 2);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    f(2 * i, 2 * j) += spec.alpha / 2;
    f(2 * j, 2 * i) += spec.alpha / 2;
  }
  return Hamiltonian(std::move(f));
}

/// Full-system matrix coupling q_m to q_i for each interaction site, with
/// gamma/2 per symmetric slot so that x^T F x = gamma q_m sum_i q_i.
inline Hamiltonian coupling_matrix(const SystemLayout& layout, int bath,
                                   const CouplingSpec& coupling) {
  layout.check_bath(bath);
  const int dim = 2 * layout.total_modes();
  Matrix f = Matrix::Zero(dim, dim);
  const int qm = 2 * layout.wm_mode();
  for (int site : coupling.sites) {
    if (site < 0 || site >= layout.bath_sizes[bath])
      throw std::invalid_argument("coupling_matrix: site out of range");
    const int qi = 2 * (layout.bath_start(bath) + site);
    f(qm, qi) += coupling.gamma / 2;
    f(qi, qm) += coupling.gamma / 2;
  }
  return Hamiltonian(std::move(f));
}

/// Embeds a block Hamiltonian on the given modes of the full system.
inline Hamiltonian embed(const SystemLayout& layout, const Hamiltonian& block,
                         const std::vector<int>& modes) {
  const int dim = 2 * layout.total_modes();
  Matrix f = Matrix::Zero(dim, dim);
  for (size_t i = 0; i < modes.size(); ++i)
    for (size_t j = 0; j < modes.size(); ++j)
      f.block<2, 2>(2 * modes[i], 2 * modes[j]) =
          block.mat.block<2, 2>(2 * static_cast<int>(i), 2 * static_cast<int>(j));
  return Hamiltonian(std::move(f));
}

/// Block-diagonal system Hamiltonian with the WM at the given frequency and
/// all baths free (no coupling).
inline Hamiltonian free_system_hamiltonian(const SystemLayout& layout, double wm_omega,
                                           const std::vector<BathSpec>& baths) {
  if (static_cast<int>(baths.size()) != layout.n_baths())
    throw std::invalid_argument("free_system_hamiltonian: bath count mismatch");
  const int dim = 2 * layout.total_modes();
  Matrix f = Matrix::Zero(dim, dim);
  f.block<2, 2>(0, 0) = Hamiltonian::free_mode(wm_omega).mat;
  for (int b = 0; b < layout.n_baths(); ++b) {
    if (baths[b].n_nodes != layout.bath_sizes[b])
      throw std::invalid_argument("free_system_hamiltonian: bath size mismatch");
    const int at = 2 * layout.bath_start(b);
    const Hamiltonian fb = bath_hamiltonian(baths[b]);
    f.block(at, at, fb.mat.rows(), fb.mat.cols()) = fb.mat;
  }
  return Hamiltonian(std::move(f));
}

/// Isochore schedule: static free system plus the switched coupling to the
/// active bath; the other baths evolve freely.
inline HamiltonianSchedule assemble_engine_schedule(const SystemLayout& layout, double wm_omega,
                                                    const std::vector<BathSpec>& baths,
                                                    int active_bath, const CouplingSpec& coupling,
                                                    const SwitchingProfile& profile) {
  HamiltonianSchedule sched;
  sched.static_part = free_system_hamiltonian(layout, wm_omega, baths);
  sched.modulated.push_back({coupling_matrix(layout, active_bath, coupling),
                             [profile](double t) { return switching_value(t, profile); }});
  sched.breakpoints = {0.0, profile.delta, profile.tau - profile.delta, profile.tau};
  return sched;
}

/// A smooth frequency path omega(t) on [0, duration] with its derivative.
struct FrequencyRamp {
  std::function<double(double)> omega;
  std::function<double(double)> domega;
  double duration = 0;
};

/// omega_from -> omega_to along sin^2, with vanishing slope at both ends.
inline FrequencyRamp sin_squared_ramp(double omega_from, double omega_to, double tau_ad) {
  if (!(tau_ad > 0)) throw std::invalid_argument("sin_squared_ramp: tau_ad <= 0");
  FrequencyRamp r;
  r.duration = tau_ad;
  r.omega = [=](double t) {
    const double s = std::sin(M_PI * t / (2 * tau_ad));
    return omega_from + (omega_to - omega_from) * s * s;
  };
  r.domega = [=](double t) {
    return (omega_to - omega_from) * (M_PI / (2 * tau_ad)) * std::sin(M_PI * t / tau_ad);
  };
  return r;
}

/// Single-mode schedule implementing the adiabatic map in finite time, in
/// fixed quadratures scaled by omega_ref:
///   F_qq = omega(t)^2 / (2 omega_ref), F_pp = omega_ref / 2,
///   F_qp = F_pq = -domega / (4 omega).
inline HamiltonianSchedule counterdiabatic_wm_schedule(const FrequencyRamp& ramp,
                                                       double omega_ref) {
  if (!(omega_ref > 0)) throw std::invalid_argument("counterdiabatic_wm_schedule: omega_ref <= 0");
  double max_qq = 0, max_qp = 0;
  const int grid = 1000;
  for (int i = 0; i <= grid; ++i) {
    const double t = ramp.duration * i / grid;
    const double w = ramp.omega(t);
    if (!(w > 0)) throw std::invalid_argument("counterdiabatic_wm_schedule: nonpositive omega");
    max_qq = std::max(max_qq, w * w / (2 * omega_ref));
    max_qp = std::max(max_qp, std::abs(ramp.domega(t) / (4 * w)));
  }

  HamiltonianSchedule sched;
  Matrix pp = Matrix::Zero(2, 2);
  pp(1, 1) = omega_ref / 2;
  sched.static_part = Hamiltonian(std::move(pp));

  Matrix qq = Matrix::Zero(2, 2);
  qq(0, 0) = max_qq;
  const auto omega = ramp.omega;
  sched.modulated.push_back({Hamiltonian(std::move(qq)), [omega, omega_ref, max_qq](double t) {
                               const double w = omega(t);
                               return w * w / (2 * omega_ref) / max_qq;
                             }});
  if (max_qp > 0) {
    Matrix qp = Matrix::Zero(2, 2);
    qp(0, 1) = qp(1, 0) = max_qp;
    const auto domega = ramp.domega;
    sched.modulated.push_back({Hamiltonian(std::move(qp)), [omega, domega, max_qp](double t) {
                                 return -domega(t) / (4 * omega(t)) / max_qp;
                               }});
  }
  sched.breakpoints = {0.0, ramp.duration};
  return sched;
}

}  // namespace ottoring
