#pragma once

#include "rcb/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace rcb {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Seed of the `index`-th substream of `master_seed`. Substreams are
/// independent of evaluation order, so per-trial work can run in parallel.
inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t s = master_seed;
  splitmix64(s);
  s ^= 0xd1b54a32d192ed03ull * (index + 1);
  splitmix64(s);
  return splitmix64(s);
}

/// Deterministic random stream. Gaussian variates come from an explicit
/// Box-Muller transform rather than std::normal_distribution, whose output
/// sequence differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const auto [z0, z1] = normal_pair();
    spare_ = z1;
    has_spare_ = true;
    return z0;
  }

  /// Circularly symmetric CN(0, variance): independent real/imaginary parts,
  /// each with variance/2; pseudo-covariance zero.
  Complex complex_normal(double variance) {
    const auto [z0, z1] = normal_pair();
    const double s = std::sqrt(0.5 * variance);
    return {s * z0, s * z1};
  }

 private:
  std::pair<double, double> normal_pair() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2)};
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline ComplexVector random_complex_vector(Rng& rng, Eigen::Index n) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.complex_normal(1.0);
  return v;
}

inline ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n) {
  ComplexMatrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = rng.complex_normal(1.0);
  }
  return hermitian_part(g);
}

/// G G^H + ridge I: Hermitian positive definite test matrix.
inline ComplexMatrix random_hpd(Rng& rng, Eigen::Index n, double ridge = 0.1) {
  ComplexMatrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = rng.complex_normal(1.0);
  }
  ComplexMatrix m = g * g.adjoint() / static_cast<double>(n);
  m += ridge * ComplexMatrix::Identity(n, n);
  return hermitian_part(m);
}

}  // namespace rcb
