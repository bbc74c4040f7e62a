#pragma once

#include "rcb/beamformers.hpp"
#include "rcb/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rcb {

/// Per-trial power patterns sharing one direction grid.
struct PatternEnsemble {
  RealVector thetas;
  std::vector<RealVector> patterns;

  void validate() const {
    if (patterns.empty()) throw std::invalid_argument("PatternEnsemble: no patterns");
    for (const RealVector& p : patterns) {
      if (p.size() != thetas.size()) {
        throw std::invalid_argument("PatternEnsemble: pattern/grid length mismatch");
      }
    }
  }

  RealVector mean_pattern() const {
    validate();
    RealVector mean = RealVector::Zero(thetas.size());
    for (const RealVector& p : patterns) mean += p;
    return mean / static_cast<double>(patterns.size());
  }
};

/// Scales a pattern so its maximum is exactly 1.
inline RealVector normalize_pattern(const RealVector& values) {
  if (values.size() == 0) throw std::invalid_argument("normalize_pattern: empty pattern");
  const double peak = values.maxCoeff();
  if (!(peak > 0.0)) throw std::domain_error("normalize_pattern: pattern has no positive value");
  return values / peak;
}

/// Mean l2 distance of the patterns from their ensemble mean,
/// (1/T) sum_i ||P_i - Pbar||_2. Patterns are expected pre-normalized.
inline double dispersion(const PatternEnsemble& ensemble) {
  ensemble.validate();
  const RealVector mean = ensemble.mean_pattern();
  double total = 0.0;
  for (const RealVector& p : ensemble.patterns) total += (p - mean).norm();
  return total / static_cast<double>(ensemble.patterns.size());
}

/// Smallest uniform bound on the excess power of `w` over the reference
/// optimum `p0` across the covariance interval set: the worst case is
/// attained at Rhat + Gamma, so the bound is max(0, w^H (Rhat+Gamma) w - p0).
inline double one_sided_robustness_measure(const Beamformer& w, const ComplexMatrix& rhat,
                                           const ComplexMatrix& gamma, double p0) {
  if (p0 < 0.0) throw std::invalid_argument("one_sided_robustness_measure: negative reference");
  return std::max(0.0, worst_case_power(w, rhat, gamma) - p0);
}

/// Directions of the strict interior local maxima, strongest first, at most
/// `count` of them. A flat spectrum has none.
inline std::vector<double> find_peaks(const SpectrumGrid& spectrum, int count) {
  if (count < 1) throw std::invalid_argument("find_peaks: count must be >= 1");
  spectrum.validate();
  std::vector<std::pair<double, double>> peaks;  // (value, theta)
  for (Eigen::Index i = 1; i + 1 < spectrum.values.size(); ++i) {
    if (spectrum.values(i) > spectrum.values(i - 1) &&
        spectrum.values(i) > spectrum.values(i + 1)) {
      peaks.emplace_back(spectrum.values(i), spectrum.thetas(i));
    }
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  if (static_cast<int>(peaks.size()) > count) peaks.resize(count);
  std::vector<double> out;
  out.reserve(peaks.size());
  for (const auto& [value, theta] : peaks) out.push_back(theta);
  return out;
}

/// True when the spectrum separates the two target directions: it has two
/// distinct local maxima that can be matched one-to-one to the targets
/// within tol_deg.
inline bool resolution_check(const SpectrumGrid& spectrum, double doa_a, double doa_b,
                             double tol_deg) {
  if (doa_a == doa_b) throw std::invalid_argument("resolution_check: identical targets");
  const int max_peaks = static_cast<int>(spectrum.values.size());
  const std::vector<double> peaks = find_peaks(spectrum, max_peaks);
  const double tol = tol_deg * pi / 180.0;
  for (double p : peaks) {
    for (double q : peaks) {
      if (p == q) continue;
      if (std::abs(p - doa_a) <= tol && std::abs(q - doa_b) <= tol) return true;
    }
  }
  return false;
}

}  // namespace rcb
