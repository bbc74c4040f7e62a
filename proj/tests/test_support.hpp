#pragma once

#include "rcb/rcb.hpp"

#include <cmath>

namespace rcb::test {

/// The default simulation scene used throughout the suite: 10-element
/// half-wavelength array, unit-power sources at -30/-26/+30 degrees,
/// 1/32 W noise.
inline SourceScenario reference_scenario() {
  SourceScenario sc;
  sc.geometry = ArrayGeometry{10, 0.5};
  sc.sources = {Source{-30.0 * pi / 180.0, 1.0}, Source{-26.0 * pi / 180.0, 1.0},
                Source{30.0 * pi / 180.0, 1.0}};
  sc.noise_power = 1.0 / 32.0;
  sc.soi_index = 0;
  return sc;
}

inline double frobenius_relative(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

/// Grid step of the M-point uniform grid on [-pi/2, pi/2].
inline double grid_step(int n_points) { return pi / (n_points - 1); }

}  // namespace rcb::test
