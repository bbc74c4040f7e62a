#pragma once

#include "rcb/array_model.hpp"
#include "rcb/rng.hpp"
#include "rcb/types.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace rcb {

/// Eigenvalues in descending order; eigenvectors are the matching columns.
struct EigenDecomposition {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  Eigen::Index dimension() const { return eigenvalues.size(); }

  ComplexMatrix reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
  }
};

/// Split of an eigenbasis into the K strongest directions and the rest.
struct SubspacePartition {
  ComplexMatrix signal_basis;      // N x K
  ComplexMatrix noise_basis;       // N x (N-K)
  RealVector signal_eigenvalues;   // K
  RealVector noise_eigenvalues;    // N-K
};

/// Loading levels for the signal and noise subspaces.
struct GammaSpec {
  double delta_signal = 0.0;
  double delta_noise = 0.0;
  int n_sources = 0;

  void validate(Eigen::Index n) const {
    if (delta_signal < 0.0 || delta_noise < 0.0) {
      throw std::domain_error("GammaSpec: loading levels must be nonnegative");
    }
    if (n_sources <= 0 || n_sources >= n) {
      throw std::invalid_argument("GammaSpec: need 0 < n_sources < dimension");
    }
  }
};

/// (1/L) sum_l x_l x_l^H.
inline ComplexMatrix sample_covariance(const SnapshotSet& snapshots) {
  if (snapshots.n_snapshots() < 1) {
    throw std::invalid_argument("sample_covariance: empty snapshot set");
  }
  const double inv_l = 1.0 / static_cast<double>(snapshots.n_snapshots());
  ComplexMatrix r = inv_l * (snapshots.snapshots * snapshots.snapshots.adjoint());
  return hermitian_part(r);
}

inline EigenDecomposition eigendecompose(const ComplexMatrix& r) {
  require_hermitian(r, "eigendecompose");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(r));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecompose: eigenvalue iteration failed");
  }
  EigenDecomposition ed;
  ed.eigenvalues = solver.eigenvalues().reverse();
  ed.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return ed;
}

inline SubspacePartition partition_subspaces(const EigenDecomposition& ed, int n_sources) {
  const Eigen::Index n = ed.dimension();
  if (n_sources <= 0 || n_sources >= n) {
    throw std::invalid_argument("partition_subspaces: need 0 < K < N");
  }
  SubspacePartition p;
  p.signal_basis = ed.eigenvectors.leftCols(n_sources);
  p.noise_basis = ed.eigenvectors.rightCols(n - n_sources);
  p.signal_eigenvalues = ed.eigenvalues.head(n_sources);
  p.noise_eigenvalues = ed.eigenvalues.tail(n - n_sources);
  return p;
}

inline ComplexMatrix diagonal_load(const ComplexMatrix& r, double eps) {
  if (eps < 0.0) throw std::domain_error("diagonal_load: negative loading");
  require_hermitian(r, "diagonal_load");
  return r + eps * ComplexMatrix::Identity(r.rows(), r.cols());
}

/// Raises every eigenvalue below mu * lambda_max up to that threshold.
inline ComplexMatrix eigen_threshold(const ComplexMatrix& r, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::domain_error("eigen_threshold: mu outside [0,1]");
  if (mu == 0.0) return r;
  const EigenDecomposition ed = eigendecompose(r);
  RealVector lifted = ed.eigenvalues;
  const double threshold = mu * lifted(0);
  for (Eigen::Index i = 1; i < lifted.size(); ++i) lifted(i) = std::max(threshold, lifted(i));
  return hermitian_part(ed.eigenvectors * lifted.asDiagonal() * ed.eigenvectors.adjoint());
}

/// Subspace loading matrix: delta_signal on the K strongest eigendirections
/// of `ed`, delta_noise on the rest.
inline ComplexMatrix gamma_matrix(const EigenDecomposition& ed, const GammaSpec& spec) {
  spec.validate(ed.dimension());
  RealVector d(ed.dimension());
  d.head(spec.n_sources).setConstant(spec.delta_signal);
  d.tail(ed.dimension() - spec.n_sources).setConstant(spec.delta_noise);
  return hermitian_part(ed.eigenvectors * d.asDiagonal() * ed.eigenvectors.adjoint());
}

/// Convex mixture (1-beta) Rhat + beta Rbar.
inline ComplexMatrix bayesian_combine(const ComplexMatrix& rhat, const ComplexMatrix& rbar,
                                      double beta) {
  if (rhat.rows() != rbar.rows() || rhat.cols() != rbar.cols()) {
    throw std::invalid_argument("bayesian_combine: dimension mismatch");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::domain_error("bayesian_combine: beta outside [0,1]");
  }
  return (1.0 - beta) * rhat + beta * rbar;
}

/// Draws a PSD member R of {R : Rhat - Gamma <= R <= Rhat + Gamma} (Loewner
/// order) as Rhat + Gamma^{1/2} H Gamma^{1/2} with ||H||_2 <= 1. H is halved
/// until the draw is PSD; after `max_retries` halvings the center Rhat is
/// returned.
inline ComplexMatrix sample_interval_member(const ComplexMatrix& rhat,
                                            const ComplexMatrix& gamma, std::uint64_t seed,
                                            int max_retries = 30) {
  require_hermitian(rhat, "sample_interval_member");
  require_hermitian(gamma, "sample_interval_member");
  const EigenDecomposition eg = eigendecompose(gamma);
  if (eg.eigenvalues.minCoeff() < kPsdEigenvalueFloor * std::max(1.0, max_abs(gamma))) {
    throw std::invalid_argument("sample_interval_member: Gamma must be PSD");
  }
  RealVector roots = eg.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix half = eg.eigenvectors * roots.asDiagonal() * eg.eigenvectors.adjoint();

  Rng rng(seed);
  ComplexMatrix h = random_hermitian(rng, rhat.rows());
  const double spectral = hermitian_eigenvalues(h).cwiseAbs().maxCoeff();
  if (spectral > 0.0) h *= rng.uniform() / spectral;

  const double scale = std::max(1.0, max_abs(rhat) + max_abs(gamma));
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const ComplexMatrix member = hermitian_part(rhat + half * h * half);
    if (hermitian_eigenvalues(member).minCoeff() >= kPsdEigenvalueFloor * scale) {
      return member;
    }
    h *= 0.5;
  }
  return rhat;
}

}  // namespace rcb
