#pragma once

#include "rcb/covariance.hpp"
#include "rcb/rng.hpp"
#include "rcb/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rcb::oracle {

/// Brute-force minimizers used to cross-check the closed-form and fixed-point
/// solvers. They only evaluate objectives on randomly generated feasible
/// points (stochastic search with a shrink-on-stagnation step rule), so they
/// share no machinery with the solvers they validate.

struct SearchResult {
  ComplexVector weights;
  double objective = 0.0;
};

/// min w^H M w over {w : w^H Q w >= 1}, searched on the active boundary
/// w^H Q w = 1. Spends `n_feasible` objective evaluations.
inline SearchResult random_search_min_power(const ComplexMatrix& m, const ComplexMatrix& q,
                                            std::uint64_t n_feasible, std::uint64_t seed) {
  const Eigen::Index n = m.rows();
  Rng rng(seed);

  const auto normalize_to_boundary = [&](const ComplexVector& v) -> std::optional<ComplexVector> {
    const double qv = quadratic_form(v, q);
    if (!(qv > 1e-14)) return std::nullopt;
    return ComplexVector(v / std::sqrt(qv));
  };

  ComplexVector best;
  double best_objective = std::numeric_limits<double>::infinity();
  std::uint64_t used = 0, attempts = 0;
  const std::uint64_t global_phase = std::max<std::uint64_t>(n_feasible / 10, 100);
  // Local refinement on a fixed geometric step schedule down to ~1e-8.
  const int rounds = 64;
  const double decay = std::pow(1e-8, 1.0 / rounds);
  const std::uint64_t per_round =
      std::max<std::uint64_t>((n_feasible - std::min(global_phase, n_feasible)) / rounds, 1);
  while (used < n_feasible) {
    if (++attempts > 40 * n_feasible + 1000) {
      throw NumericalError("random_search_min_power: feasible directions too rare");
    }
    ComplexVector v;
    if (best.size() == 0 || used < global_phase) {
      v = random_complex_vector(rng, n);
    } else {
      const auto round = std::min<std::uint64_t>((used - global_phase) / per_round, rounds - 1);
      const double step = std::pow(decay, static_cast<double>(round));
      v = best + step * std::max(best.norm(), 1.0) * random_complex_vector(rng, n);
    }
    const auto w = normalize_to_boundary(v);
    if (!w) continue;
    ++used;
    const double objective = quadratic_form(*w, m);
    if (objective < best_objective) {
      best_objective = objective;
      best = *w;
    }
  }
  if (best.size() == 0) throw NumericalError("random_search_min_power: no feasible point found");
  return {best, best_objective};
}

/// A random point of the affine feasible set {w : a^H w = 1}; `spread` scales
/// the component orthogonal to a.
inline ComplexVector random_distortionless_point(Rng& rng, const ComplexVector& a,
                                                 double spread = 1.0) {
  const ComplexVector v = random_complex_vector(rng, a.size());
  const ComplexVector orthogonal = v - a * (a.dot(v) / a.squaredNorm());
  return a / a.squaredNorm() + spread * orthogonal;
}

/// min w^H Rhat w + (w^H w)^2 / (4k) over {w : a^H w = 1}, spending
/// `n_samples` objective evaluations.
inline SearchResult random_search_quartic(const ComplexMatrix& rhat, const ComplexVector& a,
                                          double k, std::uint64_t n_samples,
                                          std::uint64_t seed) {
  Rng rng(seed);
  const auto project_out = [&](const ComplexVector& v) -> ComplexVector {
    return v - a * (a.dot(v) / a.squaredNorm());
  };
  const auto objective = [&](const ComplexVector& w) {
    const double nn = w.squaredNorm();
    return quadratic_form(w, rhat) + nn * nn / (4.0 * k);
  };

  ComplexVector best = a / a.squaredNorm();
  double best_objective = objective(best);
  const std::uint64_t global_phase = std::max<std::uint64_t>(n_samples / 10, 100);
  const int rounds = 64;
  const double decay = std::pow(1e-8, 1.0 / rounds);
  const std::uint64_t per_round =
      std::max<std::uint64_t>((n_samples - std::min(global_phase, n_samples)) / rounds, 1);
  for (std::uint64_t i = 1; i < n_samples; ++i) {
    ComplexVector w;
    if (i < global_phase) {
      w = random_distortionless_point(rng, a, 2.0 * rng.uniform());
    } else {
      const auto round = std::min<std::uint64_t>((i - global_phase) / per_round, rounds - 1);
      const double step = std::pow(decay, static_cast<double>(round));
      w = best + step * std::max(best.norm(), 1.0) *
                    project_out(random_complex_vector(rng, a.size()));
    }
    const double o = objective(w);
    if (o < best_objective) {
      best_objective = o;
      best = std::move(w);
    }
  }
  return {best, best_objective};
}

/// Largest violation of w^H R w <= w^H (Rhat + Gamma) w over sampled interval
/// members R and random w, scaled by ||w||^2 ||Gamma||_2. Nonpositive means
/// the dominant member really dominates.
inline double max_interval_dominance_violation(const ComplexMatrix& rhat,
                                               const ComplexMatrix& gamma, int n_members,
                                               int n_weights, std::uint64_t seed) {
  const double gamma_norm = hermitian_eigenvalues(gamma).cwiseAbs().maxCoeff();
  const ComplexMatrix dominant = hermitian_part(rhat + gamma);
  Rng rng(seed);
  std::vector<ComplexVector> weights;
  weights.reserve(n_weights);
  for (int i = 0; i < n_weights; ++i) weights.push_back(random_complex_vector(rng, rhat.rows()));

  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_members; ++s) {
    const ComplexMatrix member =
        sample_interval_member(rhat, gamma, substream_seed(seed, static_cast<std::uint64_t>(s)));
    const ComplexMatrix excess = dominant - member;
    for (const ComplexVector& w : weights) {
      const double violation = -quadratic_form(w, excess) / (w.squaredNorm() * gamma_norm);
      worst = std::max(worst, violation);
    }
  }
  return worst;
}

}  // namespace rcb::oracle
