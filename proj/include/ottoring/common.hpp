#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ottoring {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when a propagator fails the symplecticity check; the caller
// should reduce the step size.
class integration_error : public std::runtime_error {
 public:
  explicit integration_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a covariance matrix violates the uncertainty principle
// or a Hamiltonian matrix is not positive definite.
class invalid_state : public std::runtime_error {
 public:
  explicit invalid_state(const std::string& what) : std::runtime_error(what) {}
};

namespace tol {
inline constexpr double sym = 1e-10;    // symmetry of stored matrices
inline constexpr double phys = 1e-8;    // slack on nu_i >= 1
inline constexpr double symp = 1e-8;    // default symplecticity defect
inline constexpr double pair = 1e-9;    // +/- nu pairing
}  // namespace tol

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": not square");
  if (max_abs(m - m.transpose()) > tol::sym)
    throw std::invalid_argument(std::string(what) + ": not symmetric");
}

}  // namespace ottoring
