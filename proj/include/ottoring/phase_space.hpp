#pragma once

// Symplectic linear algebra on the interleaved (q1,p1,...,qN,pN) phase space:
// covariance matrices, Williamson normal form, thermal states, block
// composition and mean energies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ottoring/common.hpp"

namespace ottoring {

/// 2Nx2N block-diagonal symplectic form, N copies of [[0,1],[-1,0]].
inline Matrix symplectic_form(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("symplectic_form: n_modes < 1");
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    omega(2 * i, 2 * i + 1) = 1.0;
    omega(2 * i + 1, 2 * i) = -1.0;
  }
  return omega;
}

/// State of an N-mode Gaussian system: sigma_ab = <x_a x_b + x_b x_a>,
/// zero-mean convention, vacuum = identity.
struct Covariance {
  Matrix mat;

  Covariance() = default;
  explicit Covariance(Matrix m) : mat(std::move(m)) {
    require_symmetric(mat, "Covariance");
  }

  int modes() const { return static_cast<int>(mat.rows()) / 2; }

  static Covariance vacuum(int n_modes) {
    return Covariance(Matrix::Identity(2 * n_modes, 2 * n_modes));
  }
};

/// Quadratic Hamiltonian H = x^T F x, stored symmetrized.
struct Hamiltonian {
  Matrix mat;

  Hamiltonian() = default;
  explicit Hamiltonian(Matrix m) : mat(std::move(m)) {
    require_symmetric(mat, "Hamiltonian");
  }

  int modes() const { return static_cast<int>(mat.rows()) / 2; }

  /// Free oscillator at frequency omega: F = diag(omega/2, omega/2).
  static Hamiltonian free_mode(double omega) {
    Matrix f(2, 2);
    f << omega / 2, 0, 0, omega / 2;
    return Hamiltonian(f);
  }
};

/// Phase-space evolution matrix; S Omega S^T = Omega within tolerance.
struct Propagator {
  Matrix mat;

  Propagator() = default;
  explicit Propagator(Matrix m) : mat(std::move(m)) {}

  int modes() const { return static_cast<int>(mat.rows()) / 2; }

  static Propagator identity(int n_modes) {
    return Propagator(Matrix::Identity(2 * n_modes, 2 * n_modes));
  }

  double symplecticity_defect() const {
    const Matrix omega = symplectic_form(modes());
    return max_abs(mat * omega * mat.transpose() - omega);
  }

  /// Exact inverse for symplectic matrices: S^-1 = -Omega S^T Omega.
  Propagator inverse() const {
    const Matrix omega = symplectic_form(modes());
    return Propagator(-omega * mat.transpose() * omega);
  }
};

/// Symplectic congruence S F S^T = (1/2) diag(W1,W1,...,WN,WN) with
/// frequencies ascending.
struct NormalForm {
  Propagator transform;
  std::vector<double> frequencies;
};

namespace detail {

// Symplectic spectrum of a positive definite symmetric matrix M, together
// with the orthogonal Schur basis of K = M^{-1/2} Omega M^{-1/2}, arranged
// so that O^T K O has +1/d_i on the superdiagonal of each 2x2 block and
// blocks sorted by ascending d_i.
struct SchurBlocks {
  Matrix basis;                 // orthogonal O
  std::vector<double> values;   // d_i > 0, ascending
};

inline SchurBlocks antisymmetric_blocks(const Matrix& k) {
  const int dim = static_cast<int>(k.rows());
  Eigen::RealSchur<Matrix> schur(k);
  Matrix o = schur.matrixU();
  Matrix t = schur.matrixT();

  const int n = dim / 2;
  std::vector<std::pair<double, int>> order;  // (1/b, block start)
  order.reserve(n);
  for (int i = 0; i < dim; i += 2) {
    double b = t(i, i + 1);
    if (b < 0) {  // flip the block to put +|b| above the diagonal
      o.col(i).swap(o.col(i + 1));
      b = -b;
    }
    if (b <= 0) throw invalid_state("williamson: degenerate Schur block");
    order.emplace_back(1.0 / b, i);
  }
  std::sort(order.begin(), order.end());

  SchurBlocks out;
  out.basis.resize(dim, dim);
  out.values.reserve(n);
  for (int j = 0; j < n; ++j) {
    out.values.push_back(order[j].first);
    out.basis.col(2 * j) = o.col(order[j].second);
    out.basis.col(2 * j + 1) = o.col(order[j].second + 1);
  }
  return out;
}

// M^{+/-1/2} of a symmetric positive definite matrix.
inline std::pair<Matrix, Matrix> sqrt_and_invsqrt(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw invalid_state(std::string(what) + ": eigensolver failed");
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0) throw invalid_state(std::string(what) + ": not positive definite");
  const Vector root = ev.cwiseSqrt();
  const Matrix& u = es.eigenvectors();
  return {u * root.asDiagonal() * u.transpose(),
          u * root.cwiseInverse().asDiagonal() * u.transpose()};
}

}  // namespace detail

/// The N values nu_i >= 0 such that the spectrum of i*Omega*sigma is
/// {+/-nu_i}, sorted descending.
inline std::vector<double> symplectic_eigenvalues(const Covariance& sigma) {
  require_symmetric(sigma.mat, "symplectic_eigenvalues");
  const int n = sigma.modes();
  const Matrix omega = symplectic_form(n);

  std::vector<double> doubled;
  doubled.reserve(2 * n);
  Eigen::LLT<Matrix> llt(sigma.mat);
  if (llt.info() == Eigen::Success) {
    // K = L^T Omega L is antisymmetric and similar to Omega*sigma, so the
    // symmetric matrix K^T K has eigenvalues nu_i^2, each twice.
    const Matrix l = llt.matrixL();
    const Matrix k = l.transpose() * omega * l;
    Eigen::SelfAdjointEigenSolver<Matrix> es(k.transpose() * k, Eigen::EigenvaluesOnly);
    for (double v : es.eigenvalues()) doubled.push_back(std::sqrt(std::max(v, 0.0)));
  } else {
    Eigen::EigenSolver<Matrix> es(omega * sigma.mat);
    for (const auto& ev : es.eigenvalues()) doubled.push_back(std::abs(ev.imag()));
  }
  std::sort(doubled.begin(), doubled.end(), std::greater<>());

  std::vector<double> nu(n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(doubled[2 * i] - doubled[2 * i + 1]) > tol::pair * std::max(1.0, doubled[2 * i]))
      throw invalid_state("symplectic_eigenvalues: +/- pairing failure");
    nu[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
  }
  return nu;
}

/// Physicality check: every symplectic eigenvalue >= 1 - tol_phys.
inline bool is_physical(const Covariance& sigma, double slack = tol::phys) {
  const auto nu = symplectic_eigenvalues(sigma);
  return nu.empty() || nu.back() >= 1.0 - slack;
}

/// Williamson normal form of a positive definite Hamiltonian matrix:
/// S F S^T = (1/2) diag(W1,W1,...), frequencies ascending.
inline NormalForm williamson(const Hamiltonian& f) {
  const int n = f.modes();
  auto [root, invroot] = detail::sqrt_and_invsqrt(f.mat, "williamson");
  const Matrix omega = symplectic_form(n);
  const Matrix k = invroot * omega * invroot;
  auto blocks = detail::antisymmetric_blocks(k);

  Vector dhalf(2 * n);
  NormalForm out;
  out.frequencies.resize(n);
  for (int i = 0; i < n; ++i) {
    const double d = blocks.values[i];  // symplectic eigenvalue of F
    out.frequencies[i] = 2.0 * d;
    dhalf(2 * i) = dhalf(2 * i + 1) = std::sqrt(d);
  }
  out.transform = Propagator(dhalf.asDiagonal() * blocks.basis.transpose() * invroot);
  return out;
}

/// Thermal covariance for H = x^T F x at temperature T >= 0.
inline Covariance thermal_state(const Hamiltonian& f, double temperature) {
  if (temperature < 0) throw std::invalid_argument("thermal_state: T < 0");
  const NormalForm nf = williamson(f);
  const int n = f.modes();
  Vector nu(2 * n);
  for (int i = 0; i < n; ++i) {
    const double x = temperature > 0 ? nf.frequencies[i] / temperature
                                     : std::numeric_limits<double>::infinity();
    const double v = x > 700 ? 1.0 : 1.0 + 2.0 / std::expm1(x);
    nu(2 * i) = nu(2 * i + 1) = v;
  }
  // SFS^T = D puts the normal coordinates at y = S^-T x, so the thermal
  // covariance diag(nu) in y pulls back to sigma = S^T diag(nu) S.
  const Matrix& s = nf.transform.mat;
  Matrix sigma = s.transpose() * nu.asDiagonal() * s;
  sigma = 0.5 * (sigma + sigma.transpose());
  return Covariance(std::move(sigma));
}

/// <H> = (1/2) tr(F sigma); includes zero-point energy.
inline double mean_energy(const Hamiltonian& f, const Covariance& sigma) {
  if (f.mat.rows() != sigma.mat.rows())
    throw std::invalid_argument("mean_energy: dimension mismatch");
  return 0.5 * f.mat.cwiseProduct(sigma.mat).sum();
}

/// Block-diagonal composition of uncorrelated parts.
inline Covariance direct_sum(const std::vector<Covariance>& parts) {
  if (parts.empty()) throw std::invalid_argument("direct_sum: empty list");
  int total = 0;
  for (const auto& p : parts) total += p.modes();
  Matrix out = Matrix::Zero(2 * total, 2 * total);
  int at = 0;
  for (const auto& p : parts) {
    const int d = 2 * p.modes();
    out.block(at, at, d, d) = p.mat;
    at += d;
  }
  return Covariance(std::move(out));
}

/// Reduced state on the selected modes (partial trace over the rest).
inline Covariance extract_block(const Covariance& sigma, const std::vector<int>& modes) {
  const int n = sigma.modes();
  std::vector<bool> seen(n, false);
  for (int m : modes) {
    if (m < 0 || m >= n) throw std::invalid_argument("extract_block: mode out of range");
    if (seen[m]) throw std::invalid_argument("extract_block: duplicate mode");
    seen[m] = true;
  }
  const int k = static_cast<int>(modes.size());
  Matrix out(2 * k, 2 * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      out.block<2, 2>(2 * i, 2 * j) = sigma.mat.block<2, 2>(2 * modes[i], 2 * modes[j]);
  return Covariance(std::move(out));
}

}  // namespace ottoring
