#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace rcb;
using Catch::Approx;

TEST_CASE("sample covariance", "[covariance]") {
  SECTION("a single snapshot gives its rank-one outer product") {
    SnapshotSet s;
    s.snapshots.resize(3, 1);
    s.snapshots.col(0) << Complex(1, 2), Complex(0, -1), Complex(2, 0);
    const ComplexMatrix r = sample_covariance(s);
    const ComplexVector x = s.snapshots.col(0);
    REQUIRE((r - x * x.adjoint()).norm() < 1e-14);
    const RealVector ev = hermitian_eigenvalues(r);
    REQUIRE(ev(ev.size() - 2) < 1e-12);
  }

  SECTION("orthonormal snapshots average to a scaled identity") {
    SnapshotSet s;
    s.snapshots = ComplexMatrix::Identity(2, 2);
    const ComplexMatrix r = sample_covariance(s);
    REQUIRE((r - 0.5 * ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
  }

  SECTION("trace equals the mean squared snapshot norm") {
    const SnapshotSet s = generate_snapshots(test::reference_scenario(), 50, 9);
    const double trace = sample_covariance(s).trace().real();
    REQUIRE(trace == Approx(s.snapshots.squaredNorm() / 50.0).epsilon(1e-12));
  }

  SECTION("empty snapshot set is rejected") {
    REQUIRE_THROWS_AS(sample_covariance(SnapshotSet{}), std::invalid_argument);
  }
}

TEST_CASE("eigendecomposition", "[covariance]") {
  SECTION("identity has unit eigenvalues") {
    const EigenDecomposition ed = eigendecompose(ComplexMatrix::Identity(5, 5));
    REQUIRE((ed.eigenvalues - RealVector::Ones(5)).norm() < 1e-14);
  }

  SECTION("steering outer product has one eigenvalue N") {
    const ComplexVector a = steering_vector(ArrayGeometry{6, 0.5}, 0.4);
    const EigenDecomposition ed = eigendecompose(a * a.adjoint());
    REQUIRE(ed.eigenvalues(0) == Approx(6.0).margin(1e-12));
    REQUIRE(std::abs(ed.eigenvalues.tail(5).maxCoeff()) < 1e-12);
  }

  SECTION("reconstruction, orthonormality and descending order on random input") {
    Rng rng(21);
    for (int i = 0; i < 10; ++i) {
      const ComplexMatrix h = random_hermitian(rng, 7);
      const EigenDecomposition ed = eigendecompose(h);
      REQUIRE(test::frobenius_relative(ed.reconstruct(), h) < 1e-8);
      REQUIRE((ed.eigenvectors.adjoint() * ed.eigenvectors -
               ComplexMatrix::Identity(7, 7)).norm() < 1e-8);
      REQUIRE(std::is_sorted(ed.eigenvalues.begin(), ed.eigenvalues.end(),
                             std::greater<double>()));
    }
  }

  SECTION("markedly non-Hermitian input is rejected") {
    ComplexMatrix m = ComplexMatrix::Identity(3, 3);
    m(0, 1) = Complex(1.0, 0.0);
    REQUIRE_THROWS_AS(eigendecompose(m), std::invalid_argument);
  }
}

TEST_CASE("subspace partition", "[covariance]") {
  const SourceScenario sc = test::reference_scenario();
  const EigenDecomposition ed = eigendecompose(true_covariance(sc));

  SECTION("noise eigenvalues of the exact covariance all equal the noise power") {
    const SubspacePartition p = partition_subspaces(ed, 3);
    REQUIRE(p.signal_eigenvalues.size() == 3);
    for (Eigen::Index i = 0; i < p.noise_eigenvalues.size(); ++i) {
      REQUIRE(p.noise_eigenvalues(i) == Approx(sc.noise_power).margin(1e-10));
    }
  }

  SECTION("K = N-1 leaves a single noise direction") {
    const SubspacePartition p = partition_subspaces(ed, 9);
    REQUIRE(p.noise_basis.cols() == 1);
  }

  SECTION("signal and noise projectors sum to the identity") {
    const SubspacePartition p = partition_subspaces(ed, 3);
    const ComplexMatrix sum = p.signal_basis * p.signal_basis.adjoint() +
                              p.noise_basis * p.noise_basis.adjoint();
    REQUIRE((sum - ComplexMatrix::Identity(10, 10)).norm() < 1e-8);
  }

  SECTION("source count outside (0, N) is rejected") {
    REQUIRE_THROWS_AS(partition_subspaces(ed, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(partition_subspaces(ed, 10), std::invalid_argument);
  }
}

TEST_CASE("diagonal loading", "[covariance]") {
  Rng rng(31);
  const ComplexMatrix r = random_hpd(rng, 5);

  SECTION("zero loading is the identity transform") {
    REQUIRE((diagonal_load(r, 0.0) - r).norm() == 0.0);
  }

  SECTION("loading the identity scales it") {
    const ComplexMatrix loaded = diagonal_load(ComplexMatrix::Identity(4, 4), 0.5);
    REQUIRE((loaded - 1.5 * ComplexMatrix::Identity(4, 4)).norm() < 1e-15);
  }

  SECTION("eigenvalues shift uniformly") {
    const RealVector before = eigendecompose(r).eigenvalues;
    const RealVector after = eigendecompose(diagonal_load(r, 0.3)).eigenvalues;
    REQUIRE((after - before - 0.3 * RealVector::Ones(5)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("negative loading is rejected") {
    REQUIRE_THROWS_AS(diagonal_load(r, -0.1), std::domain_error);
  }
}

TEST_CASE("eigenvalue thresholding", "[covariance]") {
  Rng rng(32);
  const ComplexMatrix r = random_hpd(rng, 5);

  SECTION("mu = 0 leaves the matrix unchanged") {
    REQUIRE(test::frobenius_relative(eigen_threshold(r, 0.0), r) < 1e-10);
  }

  SECTION("mu = 1 flattens the spectrum to lambda_max I") {
    const double top = eigendecompose(r).eigenvalues(0);
    REQUIRE((eigen_threshold(r, 1.0) - top * ComplexMatrix::Identity(5, 5)).norm() < 1e-10);
  }

  SECTION("spectrum (4,2,1) at mu=0.5 becomes (4,2,2)") {
    RealVector d(3);
    d << 4.0, 2.0, 1.0;
    const ComplexMatrix m = d.asDiagonal().toDenseMatrix().cast<Complex>();
    const RealVector lifted = eigendecompose(eigen_threshold(m, 0.5)).eigenvalues;
    REQUIRE(lifted(0) == Approx(4.0).margin(1e-12));
    REQUIRE(lifted(1) == Approx(2.0).margin(1e-12));
    REQUIRE(lifted(2) == Approx(2.0).margin(1e-12));
  }

  SECTION("no eigenvalue ever decreases") {
    for (double mu : {0.1, 0.3, 0.7, 0.9}) {
      const RealVector before = eigendecompose(r).eigenvalues;
      const RealVector after = eigendecompose(eigen_threshold(r, mu)).eigenvalues;
      for (Eigen::Index i = 0; i < 5; ++i) REQUIRE(after(i) >= before(i) - 1e-12);
    }
  }

  SECTION("mu outside [0,1] is rejected") {
    REQUIRE_THROWS_AS(eigen_threshold(r, -0.1), std::domain_error);
    REQUIRE_THROWS_AS(eigen_threshold(r, 1.1), std::domain_error);
  }
}

TEST_CASE("subspace loading matrix", "[covariance]") {
  Rng rng(33);
  const ComplexMatrix r = random_hpd(rng, 6);
  const EigenDecomposition ed = eigendecompose(r);

  SECTION("equal levels collapse to scaled identity") {
    const ComplexMatrix g = gamma_matrix(ed, GammaSpec{0.07, 0.07, 2});
    REQUIRE(test::frobenius_relative(g, 0.07 * ComplexMatrix::Identity(6, 6)) < 1e-12);
  }

  SECTION("zero levels give the zero matrix") {
    REQUIRE(gamma_matrix(ed, GammaSpec{0.0, 0.0, 2}).norm() < 1e-14);
  }

  SECTION("trace and eigenvalues count the levels with multiplicity") {
    const ComplexMatrix g = gamma_matrix(ed, GammaSpec{2.0, 0.5, 2});
    REQUIRE(g.trace().real() == Approx(2 * 2.0 + 4 * 0.5).margin(1e-12));
    const RealVector ev = eigendecompose(g).eigenvalues;
    REQUIRE(ev(0) == Approx(2.0).margin(1e-12));
    REQUIRE(ev(1) == Approx(2.0).margin(1e-12));
    for (int i = 2; i < 6; ++i) REQUIRE(ev(i) == Approx(0.5).margin(1e-12));
  }

  SECTION("source count must be valid for the dimension") {
    REQUIRE_THROWS_AS(gamma_matrix(ed, GammaSpec{1.0, 0.1, 6}), std::invalid_argument);
    REQUIRE_THROWS_AS(gamma_matrix(ed, GammaSpec{-1.0, 0.1, 2}), std::domain_error);
  }
}

TEST_CASE("bayesian covariance mixing", "[covariance]") {
  Rng rng(34);
  const ComplexMatrix rhat = random_hpd(rng, 5);
  const ComplexMatrix rbar = random_hpd(rng, 5);

  SECTION("beta 0 and 1 return the endpoints") {
    REQUIRE((bayesian_combine(rhat, rbar, 0.0) - rhat).norm() == 0.0);
    REQUIRE((bayesian_combine(rhat, rbar, 1.0) - rbar).norm() == 0.0);
  }

  SECTION("mixing toward the identity is diagonal loading of the shrunk matrix") {
    const ComplexMatrix mixed =
        bayesian_combine(rhat, ComplexMatrix::Identity(5, 5), 0.5);
    REQUIRE((mixed - diagonal_load(0.5 * rhat, 0.5)).norm() < 1e-14);
  }

  SECTION("PSD inputs stay PSD") {
    for (double beta : {0.2, 0.5, 0.9}) {
      REQUIRE(is_psd(bayesian_combine(rhat, rbar, beta)));
    }
  }

  SECTION("mixture and additive-regularizer minimizers coincide") {
    const ComplexVector a = random_complex_vector(rng, 5);
    for (double beta : {0.1, 0.4, 0.8}) {
      const double eps = beta / (1.0 - beta);
      const Beamformer w_mix = capon_weights(bayesian_combine(rhat, rbar, beta), a);
      const Beamformer w_reg = capon_weights(hermitian_part(rhat + eps * rbar), a);
      REQUIRE((w_mix.weights - w_reg.weights).norm() < 1e-10);
    }
  }

  SECTION("dimension mismatch is rejected") {
    REQUIRE_THROWS_AS(bayesian_combine(rhat, ComplexMatrix::Identity(4, 4), 0.5),
                      std::invalid_argument);
  }
}

TEST_CASE("interval member sampling", "[covariance]") {
  const SourceScenario sc = test::reference_scenario();
  const ComplexMatrix rhat = sample_covariance(generate_snapshots(sc, 25, 17));
  const ComplexMatrix gamma =
      gamma_matrix(eigendecompose(rhat), GammaSpec{0.5, 0.05, 3});

  SECTION("zero width returns the center") {
    const ComplexMatrix zero = ComplexMatrix::Zero(10, 10);
    REQUIRE((sample_interval_member(rhat, zero, 5) - rhat).norm() == 0.0);
  }

  SECTION("members respect both interval bounds and stay Hermitian PSD") {
    const double scale = std::max(1.0, max_abs(rhat) + max_abs(gamma));
    for (int s = 0; s < 300; ++s) {
      const ComplexMatrix r = sample_interval_member(rhat, gamma, 1000 + s);
      REQUIRE(is_hermitian(r));
      const ComplexMatrix upper = rhat + gamma - r;
      const ComplexMatrix lower = r - rhat + gamma;
      REQUIRE(hermitian_eigenvalues(upper).minCoeff() >= -1e-10 * scale);
      REQUIRE(hermitian_eigenvalues(lower).minCoeff() >= -1e-10 * scale);
      REQUIRE(hermitian_eigenvalues(r).minCoeff() >= -1e-10 * scale);
    }
  }

  SECTION("no member can beat the dominant member on any quadratic form") {
    Rng rng(35);
    const ComplexMatrix dominant = hermitian_part(rhat + gamma);
    for (int s = 0; s < 50; ++s) {
      const ComplexMatrix r = sample_interval_member(rhat, gamma, 5000 + s);
      for (int i = 0; i < 100; ++i) {
        const ComplexVector w = random_complex_vector(rng, 10);
        REQUIRE(quadratic_form(w, r) <=
                quadratic_form(w, dominant) + 1e-10 * w.squaredNorm() * max_abs(gamma));
      }
    }
  }

  SECTION("an indefinite width matrix is rejected") {
    ComplexMatrix bad = -0.1 * ComplexMatrix::Identity(10, 10);
    REQUIRE_THROWS_AS(sample_interval_member(rhat, bad, 1), std::invalid_argument);
  }
}

TEST_CASE("covariance transforms preserve Hermitian symmetry", "[covariance]") {
  Rng rng(36);
  for (int i = 0; i < 5; ++i) {
    const ComplexMatrix r = random_hpd(rng, 6);
    const EigenDecomposition ed = eigendecompose(r);
    REQUIRE(is_hermitian(diagonal_load(r, 0.2)));
    REQUIRE(is_hermitian(eigen_threshold(r, 0.4)));
    REQUIRE(is_hermitian(gamma_matrix(ed, GammaSpec{1.0, 0.1, 2})));
    REQUIRE(is_hermitian(bayesian_combine(r, ComplexMatrix::Identity(6, 6), 0.3)));
  }
}
