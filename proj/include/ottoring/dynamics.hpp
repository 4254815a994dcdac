#pragma once

// Time evolution of symplectic propagators: smooth switching profiles,
// piecewise RK4 integration of dS/dt = Omega F_s(t) S, and matrix
// exponentials for the constant stretches.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "ottoring/phase_space.hpp"

namespace ottoring {

/// Compactly supported smooth switch: 0 outside [0,tau], 1 on the flat top,
/// tanh(cot) ramps of width delta at both ends.
struct SwitchingProfile {
  double tau = 0;
  double delta = 0;

  SwitchingProfile() = default;
  SwitchingProfile(double tau_, double delta_) : tau(tau_), delta(delta_) {
    if (!(delta > 0) || tau < 2 * delta)
      throw std::invalid_argument("SwitchingProfile: need tau >= 2*delta > 0");
  }
};

inline double switching_value(double t, const SwitchingProfile& p) {
  if (t <= 0 || t >= p.tau) return 0.0;
  if (t < p.delta) {
    const double c = std::tan(M_PI * t / p.delta);
    if (c == 0) return t < p.delta / 2 ? 0.0 : 1.0;  // tanh saturates at the edges
    return 0.5 - 0.5 * std::tanh(1.0 / c);
  }
  if (t < p.tau - p.delta) return 1.0;
  const double c = std::tan(M_PI * (t - p.tau) / p.delta);
  if (c == 0) return t > p.tau - p.delta / 2 ? 0.0 : 1.0;
  return 0.5 + 0.5 * std::tanh(1.0 / c);
}

/// F(t) = F0 + sum_k lambda_k(t) * F_k. Breakpoints mark the instants where
/// any lambda_k changes between segments; within a segment each lambda is
/// either constant or smooth.
struct HamiltonianSchedule {
  struct Part {
    Hamiltonian matrix;
    std::function<double(double)> lambda;
  };

  Hamiltonian static_part;
  std::vector<Part> modulated;
  std::vector<double> breakpoints;  // sorted

  int modes() const { return static_part.modes(); }

  Hamiltonian at(double t) const {
    Matrix f = static_part.mat;
    for (const auto& p : modulated) f += p.lambda(t) * p.matrix.mat;
    return Hamiltonian(std::move(f));
  }

  static HamiltonianSchedule constant(Hamiltonian f) {
    HamiltonianSchedule s;
    s.static_part = std::move(f);
    return s;
  }
};

struct IntegratorControls {
  double dt = 1e-3;
  int symplecticity_check_interval = 1000;
  double tol_symp = tol::symp;
};

/// exp(Omega F_s t) with F_s = 2F.
inline Propagator constant_propagator(const Hamiltonian& f, double t) {
  if (t < 0) throw std::invalid_argument("constant_propagator: t < 0");
  const Matrix a = symplectic_form(f.modes()) * (2.0 * f.mat) * t;
  return Propagator(a.exp());
}

namespace detail {

using Sparse = Eigen::SparseMatrix<double>;

inline Sparse sparsify(const Matrix& m) {
  Sparse s = m.sparseView(1.0, 0.0);
  s.makeCompressed();
  return s;
}

// RK4 on dS/dt = (B0 + sum lambda_k(t) Bk) S over [t0,t1], accumulating into s.
inline void rk4_segment(const Sparse& b0, const std::vector<Sparse>& bk,
                        const std::vector<std::function<double(double)>>& lambdas,
                        double t0, double t1, const IntegratorControls& ctl, Matrix& s) {
  const long dim = s.rows();
  Matrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), stage(dim, dim);
  const auto apply = [&](double t, const Matrix& x, Matrix& y) {
    y.noalias() = b0 * x;
    for (size_t k = 0; k < bk.size(); ++k) y.noalias() += lambdas[k](t) * (bk[k] * x);
  };
  const long nsteps = std::max(1L, std::lround(std::ceil((t1 - t0) / ctl.dt - 1e-12)));
  const double h = (t1 - t0) / static_cast<double>(nsteps);
  const int n_modes = static_cast<int>(dim) / 2;
  const Matrix omega = symplectic_form(n_modes);
  for (long i = 0; i < nsteps; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    apply(t, s, k1);
    stage = s + (h / 2) * k1;
    apply(t + h / 2, stage, k2);
    stage = s + (h / 2) * k2;
    apply(t + h / 2, stage, k3);
    stage = s + h * k3;
    apply(t + h, stage, k4);
    s += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    if (ctl.symplecticity_check_interval > 0 &&
        (i + 1) % ctl.symplecticity_check_interval == 0) {
      if (max_abs(s * omega * s.transpose() - omega) > ctl.tol_symp)
        throw integration_error("propagate: symplecticity defect exceeds tolerance");
    }
  }
}

// True if every lambda_k is constant across (a,b), probed at interior points.
inline bool segment_constant(const HamiltonianSchedule& sched, double a, double b,
                             std::vector<double>* values) {
  values->clear();
  for (const auto& p : sched.modulated) {
    const double mid = p.lambda(0.5 * (a + b));
    for (double frac : {0.17, 0.41, 0.83}) {
      if (std::abs(p.lambda(a + frac * (b - a)) - mid) > 1e-13) return false;
    }
    values->push_back(mid);
  }
  return true;
}

}  // namespace detail

/// Integrates dS/dt = Omega F_s(t) S from S(t0) = I to S(t1). Segments where
/// every lambda is constant are handled by one matrix exponential; ramps by
/// fixed-step RK4 with periodic symplecticity checks.
inline Propagator propagate(const HamiltonianSchedule& sched, double t0, double t1,
                            const IntegratorControls& ctl = {}) {
  if (t1 < t0) throw std::invalid_argument("propagate: t1 < t0");
  const int dim = 2 * sched.modes();
  Matrix s = Matrix::Identity(dim, dim);
  if (t1 == t0) return Propagator(std::move(s));

  std::vector<double> cuts{t0};
  for (double b : sched.breakpoints)
    if (b > t0 + 1e-12 && b < t1 - 1e-12) cuts.push_back(b);
  cuts.push_back(t1);

  const Matrix omega = symplectic_form(sched.modes());
  const detail::Sparse b0 = detail::sparsify(omega * (2.0 * sched.static_part.mat));
  std::vector<detail::Sparse> bk;
  std::vector<std::function<double(double)>> lambdas;
  for (const auto& p : sched.modulated) {
    bk.push_back(detail::sparsify(omega * (2.0 * p.matrix.mat)));
    lambdas.push_back(p.lambda);
  }

  std::vector<double> values;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (detail::segment_constant(sched, a, b, &values)) {
      Matrix f = sched.static_part.mat;
      for (size_t k = 0; k < values.size(); ++k) f += values[k] * sched.modulated[k].matrix.mat;
      s = constant_propagator(Hamiltonian(std::move(f)), b - a).mat * s;
    } else {
      detail::rk4_segment(b0, bk, lambdas, a, b, ctl, s);
    }
  }

  Propagator out(std::move(s));
  if (out.symplecticity_defect() > ctl.tol_symp)
    throw integration_error("propagate: symplecticity defect exceeds tolerance");
  return out;
}

/// sigma -> S sigma S^T, re-symmetrized.
inline Covariance evolve_covariance(const Covariance& sigma, const Propagator& s) {
  if (sigma.mat.rows() != s.mat.rows())
    throw std::invalid_argument("evolve_covariance: dimension mismatch");
  Matrix out = s.mat * sigma.mat * s.mat.transpose();
  out = 0.5 * (out + out.transpose());
  return Covariance(std::move(out));
}

/// Stepwise propagation that reports S(t) at (roughly) every sample_dt of
/// evolved time; used for time traces. The callback receives (t, S(t)).
inline void propagate_sampled(const HamiltonianSchedule& sched, double t0, double t1,
                              double sample_dt, const IntegratorControls& ctl,
                              const std::function<void(double, const Propagator&)>& on_sample) {
  if (t1 < t0) throw std::invalid_argument("propagate_sampled: t1 < t0");
  if (sample_dt <= 0) throw std::invalid_argument("propagate_sampled: sample_dt <= 0");
  const int dim = 2 * sched.modes();
  Matrix s = Matrix::Identity(dim, dim);
  Propagator view(s);
  on_sample(t0, view);
  double t = t0;
  while (t < t1 - 1e-12) {
    const double next = std::min(t + sample_dt, t1);
    const Propagator step = propagate(sched, t, next, ctl);
    s = step.mat * s;
    t = next;
    view.mat = s;
    on_sample(t, view);
  }
}

}  // namespace ottoring
