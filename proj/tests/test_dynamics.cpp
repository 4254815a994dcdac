#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ottoring/dynamics.hpp"

using namespace ottoring;

namespace {

// A two-mode Hamiltonian with a weak q-q coupling, used as a generic
// non-commuting test system.
Hamiltonian coupled_pair(double w1, double w2, double g) {
  Matrix f = Matrix::Zero(4, 4);
  f(0, 0) = f(1, 1) = w1 / 2;
  f(2, 2) = f(3, 3) = w2 / 2;
  f(0, 2) = f(2, 0) = g / 2;
  return Hamiltonian(std::move(f));
}

HamiltonianSchedule switched_pair(const SwitchingProfile& prof) {
  HamiltonianSchedule sched;
  Matrix stat = Matrix::Zero(4, 4);
  stat(0, 0) = stat(1, 1) = 1.0;   // omega_1 = 2
  stat(2, 2) = stat(3, 3) = 0.75;  // omega_2 = 1.5
  sched.static_part = Hamiltonian(std::move(stat));
  Matrix coup = Matrix::Zero(4, 4);
  coup(0, 2) = coup(2, 0) = 0.05;
  sched.modulated.push_back(
      {Hamiltonian(std::move(coup)), [prof](double t) { return switching_value(t, prof); }});
  sched.breakpoints = {0.0, prof.delta, prof.tau - prof.delta, prof.tau};
  return sched;
}

}  // namespace

TEST_CASE("switching profile validation") {
  CHECK_THROWS_AS(SwitchingProfile(1.0, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingProfile(1.0, 0.0), std::invalid_argument);
  CHECK_NOTHROW(SwitchingProfile(1.0, 0.5));
}

TEST_CASE("switching function shape") {
  const SwitchingProfile p(10.0, 2.0);
  CHECK(switching_value(-1.0, p) == 0.0);
  CHECK(switching_value(0.0, p) == 0.0);
  CHECK(switching_value(1.0, p) == doctest::Approx(0.5).epsilon(1e-14));  // ramp midpoint
  CHECK(switching_value(5.0, p) == 1.0);
  CHECK(switching_value(9.0, p) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(switching_value(10.0, p) == 0.0);
  CHECK(switching_value(11.0, p) == 0.0);
  // monotone on the way up, symmetric about the interval midpoint
  double prev = 0.0;
  for (double t = 0.05; t <= 2.0; t += 0.05) {
    const double v = switching_value(t, p);
    CHECK(v >= prev);
    CHECK(v == doctest::Approx(switching_value(10.0 - t, p)).epsilon(1e-13));
    prev = v;
  }
  // smooth saturation: essentially flat near the ramp edges
  CHECK(switching_value(0.05, p) <= 1e-10);
  CHECK(switching_value(1.95, p) >= 1.0 - 1e-10);
}

TEST_CASE("constant propagator of a free mode is a phase-space rotation") {
  const double omega = 1.7, t = 0.8;
  const Propagator s = constant_propagator(Hamiltonian::free_mode(omega), t);
  Matrix expected(2, 2);
  expected << std::cos(omega * t), std::sin(omega * t), -std::sin(omega * t), std::cos(omega * t);
  CHECK(max_abs(s.mat - expected) <= 1e-13);
  CHECK_THROWS_AS(constant_propagator(Hamiltonian::free_mode(1.0), -0.1), std::invalid_argument);
}

TEST_CASE("propagate on a constant schedule matches the matrix exponential") {
  const Hamiltonian f = coupled_pair(2.0, 1.5, 0.1);
  const Propagator direct = constant_propagator(f, 3.0);
  const Propagator via = propagate(HamiltonianSchedule::constant(f), 0, 3.0);
  CHECK(max_abs(direct.mat - via.mat) <= 1e-12);
  CHECK(via.symplecticity_defect() <= 1e-12);
}

TEST_CASE("RK4 ramp integration matches the exact commuting solution") {
  // F(t) = lambda(t) * F0 commutes with itself at all times, so
  // S = exp(Omega 2 F0 * integral of lambda); lambda = sin^2(pi t / 2)
  // integrates to 1 over [0, 2].
  HamiltonianSchedule sched;
  sched.static_part = Hamiltonian(Matrix::Zero(2, 2));
  sched.modulated.push_back({Hamiltonian::free_mode(1.3), [](double t) {
                               const double s = std::sin(M_PI * t / 2);
                               return s * s;
                             }});
  sched.breakpoints = {0.0, 2.0};
  const Propagator got = propagate(sched, 0, 2.0, {1e-3, 1000, 1e-8});
  const Propagator expected = constant_propagator(Hamiltonian::free_mode(1.3), 1.0);
  CHECK(max_abs(got.mat - expected.mat) <= 1e-8);
}

TEST_CASE("switched schedule: symplecticity and breakpoint composition") {
  const SwitchingProfile prof(8.0, 1.5);
  const HamiltonianSchedule sched = switched_pair(prof);
  const IntegratorControls ctl{1e-3, 1000, 1e-8};
  const Propagator full = propagate(sched, 0, prof.tau, ctl);
  CHECK(full.symplecticity_defect() <= 1e-8);
  // composing the segments reproduces the full propagator
  const Propagator a = propagate(sched, 0, prof.delta, ctl);
  const Propagator b = propagate(sched, prof.delta, prof.tau - prof.delta, ctl);
  const Propagator c = propagate(sched, prof.tau - prof.delta, prof.tau, ctl);
  CHECK(max_abs(c.mat * b.mat * a.mat - full.mat) <= 1e-9);
  // the flat top really is handled exactly: it matches one exponential
  const Hamiltonian flat = sched.at(prof.tau / 2);
  CHECK(max_abs(b.mat - constant_propagator(flat, prof.tau - 2 * prof.delta).mat) <= 1e-12);
}

TEST_CASE("propagate validates its time interval") {
  const HamiltonianSchedule sched = HamiltonianSchedule::constant(Hamiltonian::free_mode(1.0));
  CHECK_THROWS_AS(propagate(sched, 1.0, 0.5), std::invalid_argument);
  CHECK(max_abs(propagate(sched, 1.0, 1.0).mat - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("a too-coarse step fails the symplecticity check") {
  const SwitchingProfile prof(8.0, 1.5);
  const HamiltonianSchedule sched = switched_pair(prof);
  CHECK_THROWS_AS(propagate(sched, 0, prof.tau, IntegratorControls{0.75, 1, 1e-10}),
                  integration_error);
}

TEST_CASE("evolution preserves symplectic eigenvalues and stationary states") {
  const Hamiltonian f = coupled_pair(2.0, 1.5, 0.3);
  const Covariance thermal = thermal_state(f, 2.0);
  const Propagator s = constant_propagator(f, 5.0);
  // thermal state of the generator is stationary
  CHECK(max_abs(evolve_covariance(thermal, s).mat - thermal.mat) <= 1e-7);
  // a non-stationary state keeps its symplectic spectrum
  const Covariance skew = thermal_state(Hamiltonian::free_mode(1.0), 3.0);
  const Covariance moved =
      evolve_covariance(direct_sum({skew, Covariance::vacuum(1)}), s);
  const auto before = symplectic_eigenvalues(direct_sum({skew, Covariance::vacuum(1)}));
  const auto after = symplectic_eigenvalues(moved);
  for (size_t i = 0; i < before.size(); ++i)
    CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-8));
  CHECK_THROWS_AS(evolve_covariance(skew, s), std::invalid_argument);
}

TEST_CASE("sampled propagation composes to the full propagator") {
  const SwitchingProfile prof(6.0, 1.0);
  const HamiltonianSchedule sched = switched_pair(prof);
  const IntegratorControls ctl{1e-3, 1000, 1e-8};
  const Propagator full = propagate(sched, 0, prof.tau, ctl);
  int samples = 0;
  Matrix last;
  propagate_sampled(sched, 0, prof.tau, 0.7, ctl, [&](double t, const Propagator& s) {
    ++samples;
    CHECK(s.symplecticity_defect() <= 1e-8);
    if (t == prof.tau) last = s.mat;
  });
  CHECK(samples == 1 + 9);  // t=0 plus ceil(6 / 0.7) steps
  CHECK(max_abs(last - full.mat) <= 1e-9);
  CHECK_THROWS_AS(propagate_sampled(sched, 0, 1.0, 0.0, ctl, [](double, const Propagator&) {}),
                  std::invalid_argument);
}
