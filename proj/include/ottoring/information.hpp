#pragma once

// Entropic and thermodynamic observables: von Neumann entropy, mutual
// information, effective temperature, Gaussian fidelity, athermality and
// relative entropy against a thermal reference. All entropies in nats.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ottoring/phase_space.hpp"

namespace ottoring {

/// Two disjoint mode sets; their union need not cover the system.
struct Partition {
  std::vector<int> side_a;
  std::vector<int> side_b;

  Partition(std::vector<int> a, std::vector<int> b) : side_a(std::move(a)), side_b(std::move(b)) {
    for (int i : side_a)
      for (int j : side_b)
        if (i == j) throw std::invalid_argument("Partition: sides overlap");
  }
};

/// Per-mode entropy contribution f(nu); f(1) = 0 at purity.
inline double entropy_of_eigenvalue(double nu) {
  if (nu < 1.0 - tol::phys) throw invalid_state("entropy: symplectic eigenvalue below 1");
  const double d = (nu - 1) / 2;
  if (d < 1e-12) return d <= 0 ? 0.0 : d * (1.0 - std::log(d));  // limit of -d*log(d) + d
  return (nu + 1) / 2 * std::log((nu + 1) / 2) - d * std::log(d);
}

inline double entropy(const Covariance& sigma) {
  double s = 0;
  for (double nu : symplectic_eigenvalues(sigma)) s += entropy_of_eigenvalue(nu);
  return s;
}

/// I(A,B) = S(A) + S(B) - S(AB), evaluated on the joint reduced state.
inline double mutual_information(const Covariance& sigma, const Partition& part) {
  std::vector<int> joint = part.side_a;
  joint.insert(joint.end(), part.side_b.begin(), part.side_b.end());
  const double sa = entropy(extract_block(sigma, part.side_a));
  const double sb = entropy(extract_block(sigma, part.side_b));
  const double sab = entropy(extract_block(sigma, joint));
  return sa + sb - sab;
}

/// Temperature whose thermal state at omega has the same symplectic
/// eigenvalue as sigma; 0 at purity.
inline double effective_temperature(const Covariance& sigma_m, double omega_m) {
  if (sigma_m.modes() != 1) throw std::invalid_argument("effective_temperature: need one mode");
  const double nu = symplectic_eigenvalues(sigma_m)[0];
  if (nu <= 1.0) return 0.0;
  return omega_m / std::log((nu + 1) / (nu - 1));
}

/// Uhlmann fidelity of two zero-mean single-mode Gaussian states, for the
/// vacuum-equals-identity covariance convention:
///   F = 2 / (sqrt(A+B) - sqrt(B)),
///   A = det(sigma1 + sigma2), B = (det sigma1 - 1)(det sigma2 - 1).
inline double gaussian_fidelity(const Covariance& sigma1, const Covariance& sigma2) {
  if (sigma1.modes() != 1 || sigma2.modes() != 1)
    throw std::invalid_argument("gaussian_fidelity: need single-mode states");
  const double a = (sigma1.mat + sigma2.mat).determinant();
  const double b = (sigma1.mat.determinant() - 1) * (sigma2.mat.determinant() - 1);
  return 2.0 / (std::sqrt(a + std::max(b, 0.0)) - std::sqrt(std::max(b, 0.0)));
}

/// 1 - F(sigma, thermal-equivalent of sigma); zero iff sigma is thermal.
inline double athermality(const Covariance& sigma_m) {
  if (sigma_m.modes() != 1) throw std::invalid_argument("athermality: need one mode");
  const double nu = symplectic_eigenvalues(sigma_m)[0];
  const Covariance thermal(Matrix::Identity(2, 2) * nu);
  const double f = gaussian_fidelity(sigma_m, thermal);
  return std::clamp(1.0 - f, 0.0, 1.0);
}

/// Cached reference data for relative-entropy distances to a thermal state.
struct ThermalReference {
  Hamiltonian f;
  double temperature = 0;
  double energy0 = 0;
  double entropy0 = 0;

  ThermalReference() = default;
  ThermalReference(Hamiltonian f_, double temp) : f(std::move(f_)), temperature(temp) {
    if (!(temp > 0)) throw std::invalid_argument("ThermalReference: T <= 0");
    const Covariance sigma0 = thermal_state(f, temp);
    energy0 = mean_energy(f, sigma0);
    entropy0 = entropy(sigma0);
  }

  /// S(rho || rho_T) = (E - E0)/T - S + S0 (free-energy difference over T).
  double relative_entropy(const Covariance& sigma) const {
    return (mean_energy(f, sigma) - energy0) / temperature - entropy(sigma) + entropy0;
  }
};

inline double relative_entropy_to_initial_thermal(const Covariance& sigma, const Hamiltonian& f,
                                                  double temperature) {
  return ThermalReference(f, temperature).relative_entropy(sigma);
}

}  // namespace ottoring
