#include "doctest.h"
#include "oracles.hpp"

#include "mhsplit/model.hpp"

using namespace mhsplit;

TEST_SUITE("model") {

TEST_CASE("SpdMatrix rejects asymmetric and indefinite input") {
  MatrixXd a(2, 2);
  a << 2, 1, 0, 2;
  CHECK_THROWS_AS(SpdMatrix{a}, NotSpd);
  a << 1, 2, 2, 1;
  CHECK_THROWS_AS(SpdMatrix{a}, NotSpd);
  a << 2, 1, 1, 2;
  CHECK(SpdMatrix(a).dim() == 2);
}

TEST_CASE("decomposition reconstructs the matrix and sorts ascending") {
  Rng rng(3);
  const MatrixXd B = MatrixXd::Random(6, 6);
  const MatrixXd A = B * B.transpose() + MatrixXd::Identity(6, 6);
  const SpdSpectrum s = SpdSpectrum::decompose(SpdMatrix(A));
  CHECK((s.reconstruct() - A).norm() < 1e-10 * A.norm());
  for (int i = 1; i < 6; ++i) CHECK(s.eigenvalues()[i] >= s.eigenvalues()[i - 1]);
  const VectorXd x = oracle::normals(6, rng);
  CHECK((s.from_eigen(s.to_eigen(x)) - x).norm() < 1e-12);
}

TEST_CASE("from_parts validates the basis") {
  MatrixXd q = MatrixXd::Identity(3, 3);
  q(0, 1) = 0.1;
  CHECK_THROWS_AS(SpdSpectrum::from_parts(VectorXd::Ones(3), q), InvalidArgument);
  VectorXd ev(3);
  ev << 1, -1, 2;
  CHECK_THROWS(SpdSpectrum::from_parts(ev, MatrixXd::Identity(3, 3)));
}

TEST_CASE("random_orthogonal is orthogonal and seeded") {
  const MatrixXd q = random_orthogonal(10, 42);
  CHECK((q.transpose() * q - MatrixXd::Identity(10, 10)).norm() < 1e-12);
  CHECK((random_orthogonal(10, 42) - q).norm() == 0.0);
  CHECK((random_orthogonal(10, 43) - q).norm() > 0.1);
}

TEST_CASE("test target spectrum follows scale * i^kappa squared") {
  const GaussianTarget t = make_test_target(5, {0.5, 2.0}, 1, true, ShiftLaw::zero);
  for (int i = 0; i < 5; ++i)
    CHECK(t.spectrum().eigenvalues()[i] == doctest::Approx(4.0 * (i + 1)).epsilon(1e-12));
  CHECK(t.shift().norm() == 0.0);
  const GaussianTarget r = make_test_target(5, {0.5, 2.0}, 1, true, ShiftLaw::random);
  CHECK(r.shift().norm() > 0.0);
  CHECK((r.precision() * r.mean() - r.shift()).norm() < 1e-10);
}

TEST_CASE("log density differences match the quadratic form") {
  Rng rng(5);
  const GaussianTarget t = make_test_target(4, {0.3, 1.0}, 9, true, ShiftLaw::random);
  const VectorXd x = oracle::normals(4, rng);
  const VectorXd y = oracle::normals(4, rng);
  const MatrixXd cov = t.precision().inverse();
  const double want = oracle::mvn_logpdf(y, t.mean(), cov) - oracle::mvn_logpdf(x, t.mean(), cov);
  CHECK(t.log_density(y) - t.log_density(x) == doctest::Approx(want).epsilon(1e-10));
  CHECK(t.log_density_eigen(t.spectrum().to_eigen(y)) - t.log_density_eigen(t.spectrum().to_eigen(x)) ==
        doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("exact samples have the target moments") {
  Rng rng(11);
  const GaussianTarget t = make_test_target(3, {0.5, 1.0}, 2, true, ShiftLaw::random);
  const int n = 200000;
  VectorXd sum = VectorXd::Zero(3);
  MatrixXd sum2 = MatrixXd::Zero(3, 3);
  for (int k = 0; k < n; ++k) {
    const VectorXd x = exact_gaussian_sample(t, rng);
    sum += x;
    sum2 += x * x.transpose();
  }
  const VectorXd mean = sum / n;
  const MatrixXd cov = sum2 / n - mean * mean.transpose();
  CHECK((mean - t.mean()).norm() < 0.01);
  CHECK((cov - t.precision().inverse()).norm() < 0.02);
}

TEST_CASE("tau statistic of the flat spectrum") {
  const VectorXd ev = VectorXd::Constant(10, 4.0);
  CHECK(tau_statistic(ev, 6, 0.0) == doctest::Approx(64.0));
  CHECK(tau_statistic(ev, 4, 0.0) == doctest::Approx(16.0));
  CHECK(tau_statistic(ev, 4, 0.0, [](double) { return 0.5; }) == doctest::Approx(8.0));
}

TEST_CASE("bounded cosine potential") {
  const Phi p = builtin_phi(PhiKind::bounded_cosine, 1.0);
  CHECK(p(VectorXd::Zero(3)) == doctest::Approx(1.0));
  REQUIRE(p.bound);
  CHECK(*p.bound == doctest::Approx(1.0));
  CHECK(builtin_phi(PhiKind::zero, 0.0).is_zero());
  CHECK_THROWS_AS(parse_phi_kind("quartic"), InvalidArgument);
}

TEST_CASE("derived seeds differ by index") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

}
