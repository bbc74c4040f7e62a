#pragma once

#include "rcb/array_model.hpp"
#include "rcb/covariance.hpp"
#include "rcb/types.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>

namespace rcb {

/// Feasible-set descriptor: the steering vector is either taken at face value
/// (constraint w^H a = 1) or guarded by a quadratic regularizer
/// (constraint w^H a a^H w - eps2 w^H reg w >= 1).
struct SingletonConstraint {
  ComplexVector steering;
};

struct QuadraticConstraint {
  ComplexVector steering;
  double eps2 = 0.0;
  ComplexMatrix reg;

  ComplexMatrix constraint_matrix() const {
    return hermitian_part(steering * steering.adjoint() - eps2 * reg);
  }
};

using ConstraintSet = std::variant<SingletonConstraint, QuadraticConstraint>;

inline const ComplexVector& constraint_steering(const ConstraintSet& cset) {
  return std::visit([](const auto& c) -> const ComplexVector& { return c.steering; }, cset);
}

/// Direction grid with one nonnegative power value per direction.
struct SpectrumGrid {
  RealVector thetas;
  RealVector values;

  void validate() const {
    if (thetas.size() != values.size()) {
      throw std::invalid_argument("SpectrumGrid: theta/value length mismatch");
    }
    if (thetas.size() < 2) throw std::invalid_argument("SpectrumGrid: need at least 2 points");
    for (Eigen::Index i = 1; i < thetas.size(); ++i) {
      if (!(thetas(i) > thetas(i - 1))) {
        throw std::invalid_argument("SpectrumGrid: thetas must be strictly increasing");
      }
    }
    if (values.minCoeff() < 0.0) {
      throw std::invalid_argument("SpectrumGrid: negative power value");
    }
  }
};

/// M points uniformly covering [-pi/2, pi/2], endpoints included.
inline RealVector uniform_grid(int n_points) {
  if (n_points < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  return RealVector::LinSpaced(n_points, -pi / 2, pi / 2);
}

/// Capon weights w = R^{-1} a / (a^H R^{-1} a) for HPD R.
inline Beamformer capon_weights(const ComplexMatrix& r, const ComplexVector& a,
                                double theta = std::numeric_limits<double>::quiet_NaN()) {
  if (r.rows() != a.size()) throw std::invalid_argument("capon_weights: dimension mismatch");
  require_hermitian(r, "capon_weights");
  const detail::HpdSolver solver(r, "capon_weights");
  const ComplexVector ria = solver.solve(a);
  const double denom = std::real(Complex(a.dot(ria)));
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("capon_weights: a^H R^{-1} a is not positive");
  }
  return Beamformer{ria / denom, theta};
}

/// w^H R w, clipped to zero from below (rounding floor 1e-10).
inline double beamformer_power(const Beamformer& w, const ComplexMatrix& r) {
  if (w.weights.size() != r.rows()) {
    throw std::invalid_argument("beamformer_power: dimension mismatch");
  }
  return std::max(0.0, quadratic_form(w.weights, r));
}

/// Capon spectrum P(theta) = 1 / (a(theta)^H R^{-1} a(theta)).
inline SpectrumGrid capon_spectrum(const ComplexMatrix& r, const RealVector& thetas,
                                   const ArrayGeometry& geometry) {
  require_hermitian(r, "capon_spectrum");
  const detail::HpdSolver solver(r, "capon_spectrum");
  SpectrumGrid grid;
  grid.thetas = thetas;
  grid.values.resize(thetas.size());
  for (Eigen::Index i = 0; i < thetas.size(); ++i) {
    const ComplexVector a = steering_vector(geometry, thetas(i));
    grid.values(i) = 1.0 / solver.inverse_quadratic(a);
  }
  grid.validate();
  return grid;
}

/// Capon spectrum of the subspace-loaded covariance Rhat + Gamma, with Gamma
/// built on Rhat's own eigenbasis. Equal loading levels reduce this to plain
/// diagonal loading; a huge signal loading with vanishing noise loading
/// approaches the MUSIC pseudo-spectrum.
inline SpectrumGrid udl_spectrum(const ComplexMatrix& rhat, const GammaSpec& spec,
                                 const RealVector& thetas, const ArrayGeometry& geometry) {
  require_hermitian(rhat, "udl_spectrum");
  const ComplexMatrix gamma = gamma_matrix(eigendecompose(rhat), spec);
  return capon_spectrum(hermitian_part(rhat + gamma), thetas, geometry);
}

/// MUSIC pseudo-spectrum 1 / (a^H U_v S_v^{-1} U_v^H a) from the noise
/// partition of R.
inline SpectrumGrid music_pseudospectrum(const ComplexMatrix& r, int n_sources,
                                         const RealVector& thetas,
                                         const ArrayGeometry& geometry) {
  const SubspacePartition part = partition_subspaces(eigendecompose(r), n_sources);
  if (part.noise_eigenvalues.minCoeff() <= 0.0) {
    throw NumericalError("music_pseudospectrum: rank-deficient covariance (zero noise eigenvalue)");
  }
  const ComplexMatrix whitened =
      part.noise_basis * part.noise_eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
  SpectrumGrid grid;
  grid.thetas = thetas;
  grid.values.resize(thetas.size());
  for (Eigen::Index i = 0; i < thetas.size(); ++i) {
    const ComplexVector a = steering_vector(geometry, thetas(i));
    grid.values(i) = 1.0 / (whitened.adjoint() * a).squaredNorm();
  }
  grid.validate();
  return grid;
}

/// Exact worst-case power over the two-sided covariance interval set:
/// the maximum of w^H R w over {Rhat - Gamma <= R <= Rhat + Gamma} is attained
/// at the dominant member Rhat + Gamma.
inline double worst_case_power(const Beamformer& w, const ComplexMatrix& rhat,
                               const ComplexMatrix& gamma) {
  if (w.weights.size() != rhat.rows() || gamma.rows() != rhat.rows()) {
    throw std::invalid_argument("worst_case_power: dimension mismatch");
  }
  return std::max(0.0, quadratic_form(w.weights, rhat) + quadratic_form(w.weights, gamma));
}

struct ConstrainedSolution {
  Beamformer beamformer;
  double objective = 0.0;
};

/// min w^H M w subject to w^H Q w >= 1 with Q = a a^H - eps2 reg, solved
/// through the pencil (Q, M): whiten by M^{-1/2}, take the top eigenpair.
/// Returns nothing when no w can meet the constraint (top eigenvalue <= 0).
inline std::optional<ConstrainedSolution> regularized_constraint_weights(
    const ComplexMatrix& m, const QuadraticConstraint& cset) {
  if (cset.steering.size() != m.rows() || cset.reg.rows() != m.rows()) {
    throw std::invalid_argument("regularized_constraint_weights: dimension mismatch");
  }
  if (cset.steering.norm() == 0.0) {
    throw std::invalid_argument("regularized_constraint_weights: zero steering vector");
  }
  if (cset.eps2 < 0.0) {
    throw std::domain_error("regularized_constraint_weights: negative eps2");
  }
  require_hermitian(m, "regularized_constraint_weights");
  require_hermitian(cset.reg, "regularized_constraint_weights (regularizer)");

  const EigenDecomposition em = eigendecompose(m);
  const double scale = std::max(1.0, em.eigenvalues.cwiseAbs().maxCoeff());
  if (em.eigenvalues.minCoeff() <= 1e-14 * scale) {
    throw SingularMatrixError(
        "regularized_constraint_weights: objective matrix is numerically singular",
        em.eigenvalues.maxCoeff() / std::max(em.eigenvalues.minCoeff(), 0.0));
  }
  const RealVector inv_roots = em.eigenvalues.cwiseSqrt().cwiseInverse();
  const ComplexMatrix m_inv_half =
      em.eigenvectors * inv_roots.asDiagonal() * em.eigenvectors.adjoint();

  const ComplexMatrix q = cset.constraint_matrix();
  const ComplexMatrix whitened = hermitian_part(m_inv_half * q * m_inv_half);
  const EigenDecomposition eb = eigendecompose(whitened);
  const double lambda_max = eb.eigenvalues(0);
  if (!(lambda_max > 0.0)) return std::nullopt;

  ComplexVector w = m_inv_half * eb.eigenvectors.col(0);
  const double attained = quadratic_form(w, q);
  if (!(attained > 0.0)) return std::nullopt;  // rounding at the feasibility edge
  w /= std::sqrt(attained);
  return ConstrainedSolution{Beamformer{w}, quadratic_form(w, m)};
}

namespace detail {
inline double inverse_quadratic_value(const ComplexMatrix& m, const ComplexVector& a,
                                      const char* where) {
  const HpdSolver solver(m, where);
  return solver.inverse_quadratic(a);
}
}  // namespace detail

/// min w^H M w over the feasible set described by `cset`. Singleton steering
/// reduces to the Capon solution; the quadratic form goes through the pencil
/// solver and may be infeasible.
inline std::optional<ConstrainedSolution> constrained_min_power(const ComplexMatrix& m,
                                                                const ConstraintSet& cset) {
  if (const auto* singleton = std::get_if<SingletonConstraint>(&cset)) {
    const double denom = detail::inverse_quadratic_value(m, singleton->steering,
                                                         "constrained_min_power");
    Beamformer w = capon_weights(m, singleton->steering);
    return ConstrainedSolution{std::move(w), 1.0 / denom};
  }
  return regularized_constraint_weights(m, std::get<QuadraticConstraint>(cset));
}

struct GlobalLoadingResult {
  bool unbounded = false;  // no finite loading needed: tau equals the unloaded optimum
  double k = std::numeric_limits<double>::infinity();
  Beamformer beamformer;
  double objective = 0.0;  // achieved min power at the returned loading
};

/// Budgeted loading: finds k so that the optimal power of
/// min_{w in cset} w^H (Rhat + C/(4k)) w meets the prescribed budget tau.
/// The optimal power is continuous and strictly decreasing in k, so the root
/// is isolated by geometric bracketing plus bisection. tau equal to the
/// unloaded optimum yields the unbounded tag (zero loading); tau below it has
/// no solution.
inline GlobalLoadingResult globally_robust_loading(const ComplexMatrix& rhat,
                                                   const ConstraintSet& cset, double tau,
                                                   const ComplexMatrix& weight) {
  require_hermitian(rhat, "globally_robust_loading");
  require_hermitian(weight, "globally_robust_loading (weight)");
  if (weight.rows() != rhat.rows()) {
    throw std::invalid_argument("globally_robust_loading: weight dimension mismatch");
  }

  const auto unloaded = constrained_min_power(rhat, cset);
  if (!unloaded) {
    throw std::invalid_argument("globally_robust_loading: constraint set is infeasible");
  }
  const double p0 = unloaded->objective;
  const double slack = 1e-12 * std::max(1.0, p0);
  if (tau < p0 - slack) {
    throw std::domain_error(
        "globally_robust_loading: tau below the unloaded optimum, no loading can reach it");
  }
  if (tau <= p0 + slack) {
    GlobalLoadingResult res;
    res.unbounded = true;
    res.beamformer = unloaded->beamformer;
    res.objective = p0;
    return res;
  }

  const auto loaded_min = [&](double k) -> ConstrainedSolution {
    const ComplexMatrix m = hermitian_part(rhat + weight / (4.0 * k));
    auto sol = constrained_min_power(m, cset);
    if (!sol) {
      throw NumericalError("globally_robust_loading: loaded problem became infeasible");
    }
    return *sol;
  };
  const auto phi = [&](double k) { return loaded_min(k).objective; };

  double k_lo = 1e-12, k_hi = 1e12;
  int guard = 0;
  while (phi(k_lo) < tau && guard++ < 60) k_lo *= 1e-3;
  guard = 0;
  while (phi(k_hi) > tau && guard++ < 60) k_hi *= 1e3;
  if (!(phi(k_lo) >= tau && phi(k_hi) <= tau)) {
    throw NumericalError("globally_robust_loading: failed to bracket the loading level");
  }

  double k_mid = std::sqrt(k_lo * k_hi);
  for (int iter = 0; iter < 400; ++iter) {
    k_mid = std::sqrt(k_lo * k_hi);
    const double f = phi(k_mid);
    if (std::abs(f - tau) <= 1e-12 * tau) break;
    if (f > tau) {
      k_lo = k_mid;
    } else {
      k_hi = k_mid;
    }
    if (k_hi - k_lo <= 1e-15 * k_lo) break;
  }

  GlobalLoadingResult res;
  res.unbounded = false;
  res.k = k_mid;
  ConstrainedSolution sol = loaded_min(k_mid);
  res.beamformer = std::move(sol.beamformer);
  res.objective = sol.objective;
  return res;
}

struct QuarticSolution {
  Beamformer beamformer;
  double multiplier = 0.0;    // lambda in Rhat w + (w^H w / 2k) w = lambda a
  double squared_norm = 0.0;  // fixed point s* = w^H w
};

/// min w^H Rhat w + (w^H w)^2 / (4k) subject to a^H w = 1. The stationarity
/// condition makes the solution a loaded-Capon weight at self-consistent
/// loading s/(2k) with s = w^H w; the scalar s is found by bisection on
/// g(s) = ||w(s)||^2 - s, which starts positive and decreases.
inline QuarticSolution quartic_regularized_weights(const ComplexMatrix& rhat,
                                                   const SingletonConstraint& cset, double k) {
  if (!(k > 0.0)) throw std::domain_error("quartic_regularized_weights: k must be positive");
  require_hermitian(rhat, "quartic_regularized_weights");
  const ComplexVector& a = cset.steering;
  if (a.size() != rhat.rows()) {
    throw std::invalid_argument("quartic_regularized_weights: dimension mismatch");
  }

  const ComplexMatrix eye = ComplexMatrix::Identity(rhat.rows(), rhat.cols());
  const auto weights_at = [&](double s) {
    return capon_weights(rhat + (s / (2.0 * k)) * eye, a);
  };
  const auto g = [&](double s) { return weights_at(s).weights.squaredNorm() - s; };

  double s_hi = weights_at(0.0).weights.squaredNorm();
  int guard = 0;
  while (g(s_hi) > 0.0) {
    s_hi *= 1.5;
    if (++guard > 200) {
      throw NumericalError("quartic_regularized_weights: failed to bracket the fixed point");
    }
  }
  double s_lo = 0.0;
  for (int iter = 0; iter < 200 && (s_hi - s_lo) > 1e-16 * std::max(1.0, s_hi); ++iter) {
    const double mid = 0.5 * (s_lo + s_hi);
    (g(mid) > 0.0 ? s_lo : s_hi) = mid;
  }

  const double s = 0.5 * (s_lo + s_hi);
  Beamformer w = weights_at(s);
  const double attained_norm = w.weights.squaredNorm();
  const double lambda =
      1.0 / detail::inverse_quadratic_value(rhat + (s / (2.0 * k)) * eye, a,
                                            "quartic_regularized_weights");
  return QuarticSolution{std::move(w), lambda, attained_norm};
}

}  // namespace rcb
