#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "ottoring/information.hpp"

using namespace ottoring;

namespace {

Covariance thermal_single(double nu) { return Covariance(nu * Matrix::Identity(2, 2)); }

// Single-mode squeezed vacuum: diag(e^{-2r}, e^{2r}).
Covariance squeezed(double r) {
  Matrix m(2, 2);
  m << std::exp(-2 * r), 0, 0, std::exp(2 * r);
  return Covariance(m);
}

// Two-mode squeezed vacuum with c = cosh 2r, s = sinh 2r.
Covariance two_mode_squeezed(double r) {
  const double c = std::cosh(2 * r), s = std::sinh(2 * r);
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 2) = m(3, 3) = c;
  m(0, 2) = m(2, 0) = s;
  m(1, 3) = m(3, 1) = -s;
  return Covariance(m);
}

Matrix random_symplectic(int n_modes, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 0.4);
  Matrix a(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < 2 * n_modes; ++i)
    for (int j = 0; j < 2 * n_modes; ++j) a(i, j) = dist(rng);
  a = 0.5 * (a + a.transpose()).eval();
  return (symplectic_form(n_modes) * a).exp();
}

// Bosonic entropy written via the mean occupation, as an independent
// expression: (nbar+1) ln(nbar+1) - nbar ln nbar with nbar = (nu-1)/2.
double entropy_via_occupation(double nu) {
  const double nbar = (nu - 1) / 2;
  if (nbar <= 0) return 0.0;
  return (nbar + 1) * std::log1p(nbar) - nbar * std::log(nbar);
}

}  // namespace

TEST_CASE("partition rejects overlapping sides") {
  CHECK_THROWS_AS(Partition({0, 1}, {1, 2}), std::invalid_argument);
  CHECK_NOTHROW(Partition({0}, {2, 3}));
}

TEST_CASE("single-eigenvalue entropy") {
  CHECK(entropy_of_eigenvalue(1.0) == 0.0);
  // frozen reference for nu = coth(1/4), the omega=2, T=4 thermal value
  CHECK(entropy_of_eigenvalue(4.082988165073596) ==
        doctest::Approx(1.7034991708355876).epsilon(1e-12));
  for (double nu : {1.0 + 1e-13, 1.5, 2.0, 7.0})
    CHECK(entropy_of_eigenvalue(nu) == doctest::Approx(entropy_via_occupation(nu)).epsilon(1e-10));
  CHECK_THROWS_AS(entropy_of_eigenvalue(0.9), invalid_state);
}

TEST_CASE("entropy is additive and symplectically invariant") {
  std::mt19937 rng(23);
  const Covariance a = thermal_single(2.0);
  const Covariance b = thermal_single(3.5);
  const Covariance joint = direct_sum({a, b});
  CHECK(entropy(joint) == doctest::Approx(entropy(a) + entropy(b)).epsilon(1e-12));
  const Matrix s = random_symplectic(2, rng);
  Matrix moved = s * joint.mat * s.transpose();
  moved = 0.5 * (moved + moved.transpose()).eval();
  CHECK(std::abs(entropy(Covariance(moved)) - entropy(joint)) <= 1e-7);
  CHECK(entropy(Covariance::vacuum(3)) == 0.0);
}

TEST_CASE("mutual information") {
  // product states carry none
  const Covariance prod = direct_sum({thermal_single(2.0), thermal_single(3.0)});
  CHECK(mutual_information(prod, {{0}, {1}}) == doctest::Approx(0.0).epsilon(1e-12));
  // two-mode squeezed vacuum: pure joint state, I = 2 f(cosh 2r)
  for (double r : {0.2, 0.6}) {
    const Covariance tms = two_mode_squeezed(r);
    CHECK(mutual_information(tms, {{0}, {1}}) ==
          doctest::Approx(2 * entropy_via_occupation(std::cosh(2 * r))).epsilon(1e-9));
  }
}

TEST_CASE("effective temperature inverts the thermal map") {
  CHECK(effective_temperature(thermal_single(4.082988165073596), 2.0) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK(effective_temperature(thermal_single(1.3130352854993315), 1.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(effective_temperature(Covariance::vacuum(1), 2.0) == 0.0);
  // squeezed vacuum is pure (nu = 1) despite its large quadrature spread
  CHECK(effective_temperature(squeezed(0.5), 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(effective_temperature(Covariance::vacuum(2), 1.0), std::invalid_argument);
}

TEST_CASE("gaussian fidelity against density-matrix references") {
  // frozen values from a truncated-Fock-basis (dim 120) density matrix
  // computation of Tr sqrt(sqrt(r1) r2 sqrt(r1)) squared
  CHECK(gaussian_fidelity(Covariance::vacuum(1), thermal_single(3.0)) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gaussian_fidelity(thermal_single(1.5), thermal_single(3.0)) ==
        doctest::Approx(0.8555335960660125).epsilon(1e-12));
  CHECK(gaussian_fidelity(squeezed(0.3), thermal_single(2.0)) ==
        doctest::Approx(0.6407801353469263).epsilon(1e-7));
  CHECK(gaussian_fidelity(squeezed(0.3), squeezed(-0.2)) ==
        doctest::Approx(0.8868188998564208).epsilon(1e-6));
  // identity and symmetry
  for (const Covariance& s : {thermal_single(2.7), squeezed(0.4)}) {
    CHECK(gaussian_fidelity(s, s) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(gaussian_fidelity(squeezed(0.3), thermal_single(2.0)) ==
        doctest::Approx(gaussian_fidelity(thermal_single(2.0), squeezed(0.3))).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_fidelity(Covariance::vacuum(2), thermal_single(2.0)),
                  std::invalid_argument);
}

TEST_CASE("athermality vanishes exactly on thermal states") {
  CHECK(athermality(thermal_single(1.0)) == 0.0);
  CHECK(athermality(thermal_single(3.7)) <= 1e-12);
  const double a = athermality(squeezed(0.4));
  CHECK(a > 0.01);
  CHECK(a <= 1.0);
}

TEST_CASE("relative entropy to a thermal reference") {
  const Hamiltonian f = Hamiltonian::free_mode(2.0);
  const ThermalReference ref(f, 4.0);
  CHECK(ref.relative_entropy(thermal_state(f, 4.0)) == doctest::Approx(0.0).epsilon(1e-12));
  // nonnegativity on assorted states
  for (const Covariance& s : {thermal_single(2.0), squeezed(0.3), Covariance::vacuum(1)})
    CHECK(ref.relative_entropy(s) >= -1e-12);
  // free-energy form evaluated independently for a hotter thermal state
  const double nu_state = 1.0 + 2.0 / std::expm1(2.0 / 6.0);  // coth at T' = 6
  const double nu_ref = 1.0 + 2.0 / std::expm1(2.0 / 4.0);
  const double expected = (nu_state - nu_ref) / 4.0  // (E' - E0)/T with E = omega nu / 2
                          - entropy_via_occupation(nu_state) + entropy_via_occupation(nu_ref);
  CHECK(ref.relative_entropy(thermal_single(nu_state)) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(relative_entropy_to_initial_thermal(thermal_single(nu_state), f, 4.0) ==
        doctest::Approx(expected).epsilon(1e-10));
  CHECK_THROWS_AS(ThermalReference(f, 0.0), std::invalid_argument);
}
