#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace rcb;
using Catch::Approx;

TEST_CASE("steering vector phase convention", "[array]") {
  const ArrayGeometry geom{4, 0.5};

  SECTION("broadside gives the all-ones vector") {
    const ComplexVector a = steering_vector(geom, 0.0);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(a(i).real() == Approx(1.0).margin(1e-15));
      REQUIRE(a(i).imag() == Approx(0.0).margin(1e-15));
    }
  }

  SECTION("endfire on a 2-element array alternates sign") {
    const ComplexVector a = steering_vector(ArrayGeometry{2, 0.5}, pi / 2);
    REQUIRE(std::abs(a(0) - Complex(1.0, 0.0)) < 1e-12);
    REQUIRE(std::abs(a(1) - Complex(-1.0, 0.0)) < 1e-12);
  }

  SECTION("unit-modulus entries and squared norm N across the grid") {
    const ArrayGeometry ten{10, 0.5};
    for (double theta : {-pi / 2, -1.1, -0.3, 0.0, 0.7, pi / 2}) {
      const ComplexVector a = steering_vector(ten, theta);
      REQUIRE(a.squaredNorm() == Approx(10.0).margin(1e-12));
      for (int i = 0; i < 10; ++i) REQUIRE(std::abs(a(i)) == Approx(1.0).margin(1e-13));
    }
  }

  SECTION("directions outside [-pi/2, pi/2] are rejected") {
    REQUIRE_THROWS_AS(steering_vector(geom, 1.6), std::domain_error);
    REQUIRE_THROWS_AS(steering_vector(geom, -2.0), std::domain_error);
  }
}

TEST_CASE("true covariance of the reference scene", "[array]") {
  const SourceScenario sc = test::reference_scenario();
  const ComplexMatrix r0 = true_covariance(sc);

  SECTION("trace counts source and noise power") {
    REQUIRE(r0.trace().real() == Approx(30.3125).margin(1e-9));
    REQUIRE(is_hermitian(r0));
  }

  SECTION("smallest eigenvalue is at least the noise power") {
    REQUIRE(hermitian_eigenvalues(r0).minCoeff() >= sc.noise_power - 1e-10);
  }

  SECTION("noise-only scene gives sigma^2 I") {
    SourceScenario noise = sc;
    noise.sources.clear();
    const ComplexMatrix r = true_covariance(noise);
    REQUIRE((r - sc.noise_power * ComplexMatrix::Identity(10, 10)).norm() < 1e-14);
  }

  SECTION("single strong source with vanishing noise is essentially rank one") {
    SourceScenario one = sc;
    one.sources = {Source{0.4, 2.0}};
    one.noise_power = 1e-12;
    const ComplexMatrix r = true_covariance(one);
    REQUIRE(r.trace().real() == Approx(10 * 2.0).margin(1e-9));
    const RealVector ev = hermitian_eigenvalues(r);
    REQUIRE(ev(ev.size() - 1) == Approx(20.0).margin(1e-9));
    REQUIRE(ev(ev.size() - 2) < 1e-10);
  }
}

TEST_CASE("interference-plus-noise covariance", "[array]") {
  const SourceScenario sc = test::reference_scenario();

  SECTION("one-source scene leaves only the noise floor") {
    SourceScenario one = sc;
    one.sources = {Source{0.1, 1.0}};
    const ComplexMatrix rn = interference_noise_covariance(one);
    REQUIRE((rn - one.noise_power * ComplexMatrix::Identity(10, 10)).norm() < 1e-14);
  }

  SECTION("reference scene trace drops by one source's contribution") {
    REQUIRE(interference_noise_covariance(sc).trace().real() == Approx(20.3125).margin(1e-9));
  }

  SECTION("full covariance is the soi term plus the rest") {
    const ComplexVector a = steering_vector(sc.geometry, sc.sources[0].doa_rad);
    const ComplexMatrix diff = true_covariance(sc) - interference_noise_covariance(sc);
    REQUIRE((diff - sc.sources[0].power * (a * a.adjoint())).norm() < 1e-10);
  }
}

TEST_CASE("output power splits into soi and interference parts", "[array]") {
  const SourceScenario sc = test::reference_scenario();
  const ComplexMatrix r0 = true_covariance(sc);
  const ComplexMatrix rn = interference_noise_covariance(sc);
  const ComplexVector a1 = steering_vector(sc.geometry, sc.sources[0].doa_rad);
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    const ComplexVector w = random_complex_vector(rng, 10);
    const double lhs = quadratic_form(w, r0);
    const double rhs =
        sc.sources[0].power * std::norm(Complex(w.dot(a1))) + quadratic_form(w, rn);
    REQUIRE(lhs == Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("snapshot generation", "[array]") {
  const SourceScenario sc = test::reference_scenario();

  SECTION("pure function of scenario, count and seed") {
    const SnapshotSet s1 = generate_snapshots(sc, 64, 12345);
    const SnapshotSet s2 = generate_snapshots(sc, 64, 12345);
    REQUIRE(s1.snapshots == s2.snapshots);
    const SnapshotSet s3 = generate_snapshots(sc, 64, 12346);
    REQUIRE(s1.snapshots != s3.snapshots);
  }

  SECTION("large-sample covariance approaches the true covariance") {
    const SnapshotSet snaps = generate_snapshots(sc, 100000, 7);
    const ComplexMatrix rhat = sample_covariance(snaps);
    REQUIRE(test::frobenius_relative(rhat, true_covariance(sc)) < 0.05);
  }

  SECTION("noise-only scene has unit per-element variance") {
    SourceScenario noise = sc;
    noise.sources.clear();
    noise.noise_power = 1.0;
    const SnapshotSet snaps = generate_snapshots(noise, 100000, 11);
    for (int i = 0; i < 10; ++i) {
      const double var = snaps.snapshots.row(i).squaredNorm() / 100000.0;
      REQUIRE(var == Approx(1.0).epsilon(0.05));
    }
  }

  SECTION("snapshot count must be positive") {
    REQUIRE_THROWS_AS(generate_snapshots(sc, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("output SINR", "[array]") {
  SECTION("matched weights on a single source in white noise") {
    SourceScenario sc;
    sc.geometry = ArrayGeometry{10, 0.5};
    sc.sources = {Source{0.25, 2.0}};
    sc.noise_power = 0.5;
    const ComplexVector a = steering_vector(sc.geometry, 0.25);
    const double sinr = output_sinr(Beamformer{a, 0.25}, sc);
    REQUIRE(sinr == Approx(2.0 * 10 / 0.5).epsilon(1e-12));
  }

  SECTION("invariant to complex scaling of the weights") {
    const SourceScenario sc = test::reference_scenario();
    Rng rng(3);
    const ComplexVector w = random_complex_vector(rng, 10);
    const double base = output_sinr(Beamformer{w}, sc);
    const Complex c(0.3, -1.7);
    REQUIRE(output_sinr(Beamformer{c * w}, sc) == Approx(base).epsilon(1e-12));
  }

  SECTION("weights orthogonal to the soi steering give zero") {
    const SourceScenario sc = test::reference_scenario();
    const ComplexVector a = steering_vector(sc.geometry, sc.sources[0].doa_rad);
    Rng rng(4);
    ComplexVector w = random_complex_vector(rng, 10);
    w -= a * (a.dot(w) / a.squaredNorm());
    REQUIRE(output_sinr(Beamformer{w}, sc) < 1e-20);
  }

  SECTION("zero weights are rejected") {
    const SourceScenario sc = test::reference_scenario();
    REQUIRE_THROWS_AS(output_sinr(Beamformer{ComplexVector::Zero(10)}, sc),
                      std::domain_error);
  }
}

TEST_CASE("mvdr weights", "[array]") {
  SECTION("white noise reduces to a matched filter") {
    const ArrayGeometry geom{8, 0.5};
    const ComplexVector a = steering_vector(geom, 0.3);
    const Beamformer w = mvdr_weights(ComplexMatrix::Identity(8, 8), a);
    REQUIRE((w.weights - a / 8.0).norm() < 1e-12);
  }

  SECTION("distortionless response on random HPD covariances") {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
      const ComplexMatrix rn = random_hpd(rng, 6);
      const ComplexVector a = random_complex_vector(rng, 6);
      const Beamformer w = mvdr_weights(rn, a);
      REQUIRE(std::abs(Complex(w.weights.dot(a)) - Complex(1.0, 0.0)) < 1e-10);
    }
  }

  SECTION("mvdr and capon agree at the true covariance and beat random weights") {
    const SourceScenario sc = test::reference_scenario();
    const ComplexVector a = steering_vector(sc.geometry, sc.sources[0].doa_rad);
    const Beamformer mvdr = mvdr_weights(interference_noise_covariance(sc), a);
    const Beamformer capon = capon_weights(true_covariance(sc), a);
    const double h_mvdr = output_sinr(mvdr, sc);
    const double h_capon = output_sinr(capon, sc);
    REQUIRE(h_mvdr >= h_capon - 1e-10);
    REQUIRE(h_capon >= h_mvdr - 1e-10);
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
      const ComplexVector w = random_complex_vector(rng, 10);
      REQUIRE(output_sinr(Beamformer{w}, sc) <= h_mvdr + 1e-10);
    }
  }

  SECTION("singular covariance raises an error carrying a condition estimate") {
    ComplexMatrix singular = ComplexMatrix::Zero(4, 4);
    singular(0, 0) = 1.0;
    const ComplexVector a = ComplexVector::Ones(4);
    REQUIRE_THROWS_AS(mvdr_weights(singular, a), SingularMatrixError);
  }
}

TEST_CASE("scenario validation", "[array]") {
  SourceScenario sc = test::reference_scenario();

  SECTION("source count must stay below the element count") {
    sc.sources.assign(10, Source{0.0, 1.0});
    REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
  }

  SECTION("powers must be positive") {
    sc.sources[1].power = 0.0;
    REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
  }

  SECTION("DoAs must lie in [-pi/2, pi/2]") {
    sc.sources[0].doa_rad = 2.0;
    REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
  }

  SECTION("soi index must address a source") {
    sc.soi_index = 3;
    REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
  }
}
