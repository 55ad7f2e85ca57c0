#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qcast/states.hpp>

#include <random>

#include "oracles.hpp"

using Mat = Eigen::MatrixXcd;
using Cx = std::complex<double>;

TEST_CASE("validate_density accepts the maximally mixed qubit") {
  const auto rho = qcast::validate_density(Mat::Identity(2, 2) / 2.0);
  CHECK(rho.dim() == 2);
  CHECK((rho.matrix() - Mat::Identity(2, 2) / 2.0).norm() == 0.0);
}

TEST_CASE("validate_density names the violated axiom") {
  Mat wrong_trace = Mat::Zero(2, 2);
  wrong_trace(0, 0) = 0.7;
  wrong_trace(1, 1) = 0.4;
  CHECK_THROWS_AS(qcast::validate_density(wrong_trace), qcast::TraceNotOne);

  Mat indefinite(2, 2);
  indefinite << Cx(0.5, 0), Cx(0.6, 0), Cx(0.6, 0), Cx(0.5, 0);
  CHECK_THROWS_AS(qcast::validate_density(indefinite), qcast::NotPositive);

  Mat skew(2, 2);
  skew << Cx(0.5, 0), Cx(0.3, 0), Cx(0.1, 0), Cx(0.5, 0);
  CHECK_THROWS_AS(qcast::validate_density(skew), qcast::NotHermitian);

  CHECK_THROWS_AS(qcast::validate_density(Mat::Zero(2, 3)), qcast::ShapeMismatch);
}

TEST_CASE("indefinite example has eigenvalues 1.1 and -0.1") {
  Mat indefinite(2, 2);
  indefinite << Cx(0.5, 0), Cx(0.6, 0), Cx(0.6, 0), Cx(0.5, 0);
  const auto sys = qcast::hermitian_eig(indefinite);
  CHECK(std::abs(sys.eigenvalues(0) - (-0.1)) < 1e-14);
  CHECK(std::abs(sys.eigenvalues(1) - 1.1) < 1e-14);
}

TEST_CASE("random_density produces valid states deterministically") {
  const auto a = qcast::random_density(3, 2, std::uint64_t(42));
  const auto b = qcast::random_density(3, 2, std::uint64_t(42));
  CHECK((a.matrix() - b.matrix()).norm() == 0.0);
  const auto c = qcast::random_density(3, 2, std::uint64_t(43));
  CHECK((a.matrix() - c.matrix()).norm() > 1e-3);
}

TEST_CASE("random_density with rank 1 is pure") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto rho = qcast::random_density(4, 1, rng);
    const auto sys = qcast::hermitian_eig(rho.matrix());
    CHECK(std::abs(sys.eigenvalues(3) - 1.0) < 1e-12);
  }
}

TEST_CASE("random_density rejects out-of-range ranks") {
  std::mt19937_64 rng(8);
  CHECK_THROWS_AS(qcast::random_density(3, 0, rng), qcast::InvalidRank);
  CHECK_THROWS_AS(qcast::random_density(3, 4, rng), qcast::InvalidRank);
}

TEST_CASE("random_density samples average to the maximally mixed state") {
  std::mt19937_64 rng(9);
  Mat mean = Mat::Zero(2, 2);
  const int samples = 10000;
  for (int i = 0; i < samples; ++i) {
    mean += qcast::random_density(2, 2, rng).matrix();
  }
  mean /= double(samples);
  CHECK((mean - Mat::Identity(2, 2) / 2.0).norm() < 0.02);
}

TEST_CASE("spectral decomposes and reconstructs") {
  const auto mixed = qcast::validate_density(Mat::Identity(2, 2) / 2.0);
  const auto dec_mixed = qcast::spectral(mixed);
  CHECK(std::abs(dec_mixed.eigenvalues(0) - 0.5) < 1e-14);
  CHECK(std::abs(dec_mixed.eigenvalues(1) - 0.5) < 1e-14);

  const auto pure = qcast::pure_basis_state<double>(2, 1);
  const auto dec_pure = qcast::spectral(pure);
  CHECK(std::abs(dec_pure.eigenvalues(0)) < 1e-14);
  CHECK(std::abs(dec_pure.eigenvalues(1) - 1.0) < 1e-14);

  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const auto rho = qcast::random_density(4, 4, rng);
    const auto dec = qcast::spectral(rho);
    const Mat rebuilt =
        dec.basis * dec.eigenvalues.cast<Cx>().asDiagonal() * dec.basis.adjoint();
    CHECK((rebuilt - rho.matrix()).norm() < 1e-10);
    CHECK(dec.eigenvalues.minCoeff() >= 0.0);
    CHECK(std::abs(dec.eigenvalues.sum() - 1.0) < 1e-10);
  }
}

TEST_CASE("random_unitary is unitary and deterministic per seed") {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3, 5}) {
    const Mat u = qcast::random_unitary(dim, rng);
    CHECK((u.adjoint() * u - Mat::Identity(dim, dim)).norm() < 1e-12);
  }
  const Mat a = qcast::random_unitary(4, std::uint64_t(5));
  const Mat b = qcast::random_unitary(4, std::uint64_t(5));
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("pure_basis_state selects the requested basis vector") {
  const auto e1 = qcast::pure_basis_state<double>(3, 1);
  CHECK(std::abs(e1.matrix()(1, 1).real() - 1.0) < 1e-15);
  CHECK(std::abs(e1.matrix().trace().real() - 1.0) < 1e-15);
  CHECK_THROWS_AS(qcast::pure_basis_state<double>(3, 3), qcast::ShapeMismatch);
}
