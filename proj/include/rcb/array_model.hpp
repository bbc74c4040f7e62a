#pragma once

#include "rcb/rng.hpp"
#include "rcb/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rcb {

/// Uniform linear array of omnidirectional elements.
struct ArrayGeometry {
  int n_elements = 0;
  double spacing_wavelengths = 0.5;

  void validate() const {
    if (n_elements < 2) throw std::invalid_argument("ArrayGeometry: need at least 2 elements");
    if (!(spacing_wavelengths > 0.0)) {
      throw std::invalid_argument("ArrayGeometry: spacing must be positive");
    }
  }
};

struct Source {
  double doa_rad = 0.0;
  double power = 1.0;
};

/// Ground-truth emitter scene: narrowband far-field sources in white noise.
/// A scene may carry zero sources (noise-only); operations that single out a
/// signal of interest require at least one.
struct SourceScenario {
  ArrayGeometry geometry;
  std::vector<Source> sources;
  double noise_power = 1.0;
  int soi_index = 0;

  int n_sources() const { return static_cast<int>(sources.size()); }

  void validate() const {
    geometry.validate();
    if (!(noise_power > 0.0)) {
      throw std::invalid_argument("SourceScenario: noise power must be positive");
    }
    if (n_sources() >= geometry.n_elements) {
      throw std::invalid_argument("SourceScenario: need fewer sources than elements");
    }
    for (const Source& s : sources) {
      if (!(s.power > 0.0)) {
        throw std::invalid_argument("SourceScenario: source powers must be positive");
      }
      if (!(s.doa_rad >= -pi / 2 && s.doa_rad <= pi / 2)) {
        throw std::invalid_argument("SourceScenario: DoA outside [-pi/2, pi/2]");
      }
    }
    if (!sources.empty() && (soi_index < 0 || soi_index >= n_sources())) {
      throw std::invalid_argument("SourceScenario: soi_index out of range");
    }
  }

  void require_soi() const {
    if (sources.empty()) {
      throw std::invalid_argument("SourceScenario: operation needs a signal of interest");
    }
  }
};

/// L array snapshots, one per column, plus the seed they were drawn from.
struct SnapshotSet {
  ComplexMatrix snapshots;  // N x L
  std::uint64_t seed = 0;

  Eigen::Index n_elements() const { return snapshots.rows(); }
  Eigen::Index n_snapshots() const { return snapshots.cols(); }
};

/// Complex weight vector serving direction `theta` (NaN when not tied to a
/// grid direction).
struct Beamformer {
  ComplexVector weights;
  double theta = std::numeric_limits<double>::quiet_NaN();
};

/// Phase response to a unit plane wave from `theta`; element n carries
/// exp(i 2 pi spacing n sin theta), n counted from 0.
inline ComplexVector steering_vector(const ArrayGeometry& geometry, double theta) {
  geometry.validate();
  if (!(theta >= -pi / 2 && theta <= pi / 2)) {
    throw std::domain_error("steering_vector: theta outside [-pi/2, pi/2]");
  }
  const double step = 2.0 * pi * geometry.spacing_wavelengths * std::sin(theta);
  ComplexVector a(geometry.n_elements);
  for (int n = 0; n < geometry.n_elements; ++n) a(n) = std::polar(1.0, step * n);
  return a;
}

/// Covariance of the full array output: sum_k p_k a_k a_k^H + noise I.
inline ComplexMatrix true_covariance(const SourceScenario& scenario) {
  scenario.validate();
  const int n = scenario.geometry.n_elements;
  ComplexMatrix r = scenario.noise_power * ComplexMatrix::Identity(n, n);
  for (const Source& s : scenario.sources) {
    const ComplexVector a = steering_vector(scenario.geometry, s.doa_rad);
    r.noalias() += s.power * (a * a.adjoint());
  }
  return hermitian_part(r);
}

/// Covariance of everything except the signal of interest.
inline ComplexMatrix interference_noise_covariance(const SourceScenario& scenario) {
  scenario.validate();
  scenario.require_soi();
  const int n = scenario.geometry.n_elements;
  ComplexMatrix r = scenario.noise_power * ComplexMatrix::Identity(n, n);
  for (int k = 0; k < scenario.n_sources(); ++k) {
    if (k == scenario.soi_index) continue;
    const ComplexVector a = steering_vector(scenario.geometry, scenario.sources[k].doa_rad);
    r.noalias() += scenario.sources[k].power * (a * a.adjoint());
  }
  return hermitian_part(r);
}

/// Draws L snapshots x = sum_k a_k s_k + v with CN source amplitudes and
/// noise. Pure function of (scenario, L, seed).
inline SnapshotSet generate_snapshots(const SourceScenario& scenario, int n_snapshots,
                                      std::uint64_t seed) {
  scenario.validate();
  if (n_snapshots < 1) throw std::invalid_argument("generate_snapshots: need L >= 1");
  const int n = scenario.geometry.n_elements;
  const int k = scenario.n_sources();

  ComplexMatrix steering(n, k);
  for (int j = 0; j < k; ++j) {
    steering.col(j) = steering_vector(scenario.geometry, scenario.sources[j].doa_rad);
  }

  Rng rng(seed);
  SnapshotSet out;
  out.seed = seed;
  out.snapshots.resize(n, n_snapshots);
  ComplexVector amplitudes(k);
  for (int l = 0; l < n_snapshots; ++l) {
    for (int j = 0; j < k; ++j) {
      amplitudes(j) = rng.complex_normal(scenario.sources[j].power);
    }
    ComplexVector x = k > 0 ? ComplexVector(steering * amplitudes)
                            : ComplexVector(ComplexVector::Zero(n));
    for (int i = 0; i < n; ++i) x(i) += rng.complex_normal(scenario.noise_power);
    out.snapshots.col(l) = x;
  }
  return out;
}

/// Output SINR p_soi |w^H a_soi|^2 / (w^H R_n w); invariant to scaling of w.
inline double output_sinr(const Beamformer& w, const SourceScenario& scenario) {
  scenario.validate();
  scenario.require_soi();
  if (w.weights.size() != scenario.geometry.n_elements) {
    throw std::invalid_argument("output_sinr: weight length does not match array");
  }
  if (w.weights.norm() == 0.0) throw std::domain_error("output_sinr: zero beamformer");
  const Source& soi = scenario.sources[scenario.soi_index];
  const ComplexVector a = steering_vector(scenario.geometry, soi.doa_rad);
  const double signal = soi.power * std::norm(Complex(w.weights.dot(a)));
  const double denom = quadratic_form(w.weights, interference_noise_covariance(scenario));
  return signal / denom;
}

namespace detail {

/// Shared Hermitian-positive-definite solve; throws with a condition estimate
/// when the Cholesky factorization breaks down.
class HpdSolver {
 public:
  explicit HpdSolver(const ComplexMatrix& r, const char* where = "HpdSolver") : llt_(r) {
    if (llt_.info() != Eigen::Success) {
      double cond = std::numeric_limits<double>::infinity();
      const RealVector ev = hermitian_eigenvalues(hermitian_part(r));
      const double lo = ev.minCoeff(), hi = ev.maxCoeff();
      if (lo > 0.0) cond = hi / lo;
      throw SingularMatrixError(std::string(where) +
                                    ": covariance is not numerically positive definite "
                                    "(condition estimate " +
                                    std::to_string(cond) + ")",
                                cond);
    }
  }

  ComplexVector solve(const ComplexVector& b) const { return llt_.solve(b); }

  /// a^H R^{-1} a (real and positive for HPD R).
  double inverse_quadratic(const ComplexVector& a) const {
    return std::real(Complex(a.dot(llt_.solve(a))));
  }

 private:
  Eigen::LLT<ComplexMatrix> llt_;
};

}  // namespace detail

/// Distortionless minimum-variance weights w = R^{-1} a / (a^H R^{-1} a).
/// Used with the interference-plus-noise covariance this is the MVDR
/// beamformer; with the full output covariance it is the Capon beamformer.
inline Beamformer mvdr_weights(const ComplexMatrix& noise_covariance, const ComplexVector& a,
                               double theta = std::numeric_limits<double>::quiet_NaN()) {
  if (noise_covariance.rows() != a.size()) {
    throw std::invalid_argument("mvdr_weights: dimension mismatch");
  }
  require_hermitian(noise_covariance, "mvdr_weights");
  const detail::HpdSolver solver(noise_covariance, "mvdr_weights");
  const ComplexVector ria = solver.solve(a);
  const double denom = std::real(Complex(a.dot(ria)));
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("mvdr_weights: a^H R^{-1} a is not positive");
  }
  return Beamformer{ria / denom, theta};
}

}  // namespace rcb
