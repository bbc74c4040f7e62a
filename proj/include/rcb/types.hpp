#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rcb {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdEigenvalueFloor = -1e-10;

/// Numerical failure (factorization breakdown, non-convergence, ...).
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A covariance that could not be factorized; carries a condition estimate.
class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Hermitian within `tol`, relative to the matrix scale (floor 1).
inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline void require_hermitian(const ComplexMatrix& m, const char* where,
                              double tol = kHermitianTol) {
  if (!is_hermitian(m, tol)) {
    throw std::invalid_argument(std::string(where) + ": matrix is not Hermitian");
  }
}

/// Exact Hermitian projection 0.5 (M + M^H); removes rounding skew after products.
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eigenvalues: eigenvalue iteration failed");
  }
  return solver.eigenvalues();
}

/// Eigenvalues >= floor, scaled to the matrix magnitude (floor 1).
inline bool is_psd(const ComplexMatrix& m, double floor = kPsdEigenvalueFloor) {
  const RealVector ev = hermitian_eigenvalues(hermitian_part(m));
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.minCoeff() >= floor * scale;
}

/// Quadratic form w^H M w for Hermitian M; the imaginary part is rounding noise.
inline double quadratic_form(const ComplexVector& w, const ComplexMatrix& m) {
  return std::real(Complex(w.dot(m * w)));
}

/// FNV-1a over the raw entry bytes; identifies a matrix realization exactly.
inline std::uint64_t matrix_hash(const ComplexMatrix& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      mix(m(r, c).real());
      mix(m(r, c).imag());
    }
  }
  return h;
}

}  // namespace rcb
