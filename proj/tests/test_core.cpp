#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qcast/core.hpp>

#include <random>

#include "oracles.hpp"

using qcast::ComplexMatrix;
using Mat = Eigen::MatrixXcd;
using Cx = std::complex<double>;

namespace {

Mat pauli_x() {
  Mat m(2, 2);
  m << Cx(0, 0), Cx(1, 0), Cx(1, 0), Cx(0, 0);
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << Cx(1, 0), Cx(0, 0), Cx(0, 0), Cx(-1, 0);
  return m;
}

}  // namespace

TEST_CASE("hermitian_eig reconstructs random Hermitian matrices") {
  std::mt19937_64 rng(11);
  for (int dim = 2; dim <= 6; ++dim) {
    for (int rep = 0; rep < 20; ++rep) {
      const Mat a = oracle::random_hermitian(dim, rng);
      const auto sys = qcast::hermitian_eig(a);
      const Mat v = sys.eigenvectors;
      const Mat rebuilt =
          v * sys.eigenvalues.cast<Cx>().asDiagonal() * v.adjoint();
      CHECK((rebuilt - a).norm() < 1e-11 * std::max(1.0, a.norm()));
      CHECK((v.adjoint() * v - Mat::Identity(dim, dim)).norm() < 1e-12);
      for (int i = 0; i + 1 < dim; ++i) {
        CHECK(sys.eigenvalues(i) <= sys.eigenvalues(i + 1));
      }
    }
  }
}

TEST_CASE("hermitian_eig pins eigenvector phases deterministically") {
  std::mt19937_64 rng(12);
  const Mat a = oracle::random_hermitian(5, rng);
  const auto first = qcast::hermitian_eig(a);
  const auto second = qcast::hermitian_eig(a);
  CHECK((first.eigenvectors - second.eigenvectors).norm() == 0.0);
  for (int j = 0; j < 5; ++j) {
    Eigen::Index imax = 0;
    first.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
    const Cx pivot = first.eigenvectors(imax, j);
    CHECK(pivot.real() > 0.0);
    CHECK(std::abs(pivot.imag()) < 1e-14);
  }
}

TEST_CASE("hermitian_eig rejects bad inputs") {
  Mat off(2, 2);
  off << Cx(0, 0), Cx(1, 0), Cx(0, 0), Cx(0, 0);
  CHECK_THROWS_AS(qcast::hermitian_eig(off), qcast::NotHermitian);
  CHECK_THROWS_AS(qcast::hermitian_eig(Mat::Zero(2, 3)), qcast::ShapeMismatch);
}

TEST_CASE("positive_sqrt matches diagonal values") {
  Eigen::Vector2d d(4.0, 9.0);
  const Mat root = qcast::positive_sqrt(d.cast<Cx>().asDiagonal().toDenseMatrix());
  Mat expected = Mat::Zero(2, 2);
  expected(0, 0) = 2.0;
  expected(1, 1) = 3.0;
  CHECK((root - expected).norm() < 1e-14);
}

TEST_CASE("positive_sqrt squares back to the input") {
  std::mt19937_64 rng(13);
  for (int dim = 2; dim <= 5; ++dim) {
    for (int rep = 0; rep < 10; ++rep) {
      const Mat a = oracle::random_psd(dim, dim, rng);
      const Mat root = qcast::positive_sqrt(a);
      CHECK((root * root - a).norm() < 1e-10 * std::max(1.0, a.norm()));
      CHECK((root - root.adjoint()).norm() < 1e-12 * std::max(1.0, a.norm()));
    }
  }
}

TEST_CASE("positive_sqrt clamps eigenvalues in [-tol, 0] and rejects below") {
  Eigen::Vector2d tiny(1.0, -1e-12);
  const Mat root = qcast::positive_sqrt(tiny.cast<Cx>().asDiagonal().toDenseMatrix());
  CHECK(std::abs(root(1, 1)) == 0.0);
  Eigen::Vector2d bad(1.0, -1.0);
  CHECK_THROWS_AS(qcast::positive_sqrt(bad.cast<Cx>().asDiagonal().toDenseMatrix()),
                  qcast::NotPositive);
}

TEST_CASE("pseudo_inverse_sqrt inverts on the support and kills the kernel") {
  Eigen::Vector2d d(4.0, 0.0);
  const Mat pinv = qcast::pseudo_inverse_sqrt(d.cast<Cx>().asDiagonal().toDenseMatrix(), 1e-12);
  CHECK(std::abs(pinv(0, 0).real() - 0.5) < 1e-14);
  CHECK(std::abs(pinv(1, 1)) == 0.0);

  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat a = oracle::random_psd(4, 2, rng);
    const Mat pis = qcast::pseudo_inverse_sqrt(a, 1e-10);
    const Mat support = pis * qcast::positive_sqrt(a);
    CHECK((support * a - a).norm() < 1e-9 * std::max(1.0, a.norm()));
    CHECK((pis * a - a * pis).norm() < 1e-9 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("polar_unitary flips the sign block of diag(-2, 3)") {
  Eigen::Vector2d d(-2.0, 3.0);
  const Mat v = qcast::polar_unitary(d.cast<Cx>().asDiagonal().toDenseMatrix());
  Mat expected = Mat::Identity(2, 2);
  expected(0, 0) = -1.0;
  CHECK((v - expected).norm() < 1e-14);
}

TEST_CASE("polar_unitary maximizes Re tr(U O) over unitaries") {
  std::mt19937_64 rng(15);
  for (int dim = 2; dim <= 4; ++dim) {
    for (int rep = 0; rep < 10; ++rep) {
      const Mat o = oracle::random_ginibre(dim, dim, rng);
      const Mat v = qcast::polar_unitary(o);
      CHECK((v.adjoint() * v - Mat::Identity(dim, dim)).norm() < 1e-12);
      const Mat gram_root = qcast::positive_sqrt((o.adjoint() * o).eval());
      CHECK((v * o - gram_root).norm() < 1e-10 * std::max(1.0, o.norm()));
      const double best = (v * o).trace().real();
      for (int trial = 0; trial < 20; ++trial) {
        const Mat u = oracle::random_unitary(dim, rng);
        CHECK((u * o).trace().real() <= best + 1e-12);
      }
    }
  }
}

TEST_CASE("polar_unitary completes rank-deficient inputs deterministically") {
  std::mt19937_64 rng(16);
  const Mat o = oracle::random_ginibre(4, 2, rng) * oracle::random_ginibre(2, 4, rng);
  const Mat v1 = qcast::polar_unitary(o);
  const Mat v2 = qcast::polar_unitary(o);
  CHECK((v1 - v2).norm() == 0.0);
  CHECK((v1.adjoint() * v1 - Mat::Identity(4, 4)).norm() < 1e-12);
  const Mat gram_root = qcast::positive_sqrt((o.adjoint() * o).eval());
  CHECK((v1 * o - gram_root).norm() < 1e-10 * std::max(1.0, o.norm()));
}

TEST_CASE("tensor agrees with the reference Kronecker product") {
  std::mt19937_64 rng(17);
  const Mat a = oracle::random_ginibre(2, 3, rng);
  const Mat b = oracle::random_ginibre(4, 2, rng);
  CHECK((qcast::tensor(a, b) - oracle::kron(a, b)).norm() < 1e-14);

  const Mat xz = qcast::tensor(pauli_x(), pauli_z());
  CHECK(std::abs(xz(0, 2) - Cx(1, 0)) < 1e-15);
  CHECK(std::abs(xz(1, 3) - Cx(-1, 0)) < 1e-15);
  CHECK(std::abs(xz(2, 0) - Cx(1, 0)) < 1e-15);
  CHECK(std::abs(xz(0, 0)) == 0.0);
}

TEST_CASE("partial_trace reduces the Bell projector to a maximally mixed qubit") {
  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
  bell(0) = 1.0 / std::sqrt(2.0);
  bell(3) = 1.0 / std::sqrt(2.0);
  const Mat proj = bell * bell.adjoint();
  const Mat reduced = qcast::partial_trace(proj, qcast::SubsystemShape{{2, 2}}, {1});
  CHECK((reduced - Mat::Identity(2, 2) / 2.0).norm() < 1e-14);
}

TEST_CASE("partial_trace matches explicit sums on bipartite inputs") {
  std::mt19937_64 rng(18);
  for (int da : {2, 3}) {
    for (int db : {2, 4}) {
      const Mat m = oracle::random_ginibre(da * db, da * db, rng);
      const qcast::SubsystemShape shape{{da, db}};
      CHECK((qcast::partial_trace(m, shape, {0}) - oracle::trace_out_second(m, da, db)).norm() <
            1e-13);
      CHECK((qcast::partial_trace(m, shape, {1}) - oracle::trace_out_first(m, da, db)).norm() <
            1e-13);
    }
  }
}

TEST_CASE("partial_trace handles three factors and degenerate keep sets") {
  std::mt19937_64 rng(19);
  const Mat a = oracle::random_ginibre(2, 2, rng);
  const Mat b = oracle::random_ginibre(3, 3, rng);
  const Mat c = oracle::random_ginibre(2, 2, rng);
  const Mat full = oracle::kron(oracle::kron(a, b), c);
  const qcast::SubsystemShape shape{{2, 3, 2}};

  const Mat keep_ac = qcast::partial_trace(full, shape, {0, 2});
  CHECK((keep_ac - b.trace() * oracle::kron(a, c)).norm() < 1e-12);

  const Mat keep_b = qcast::partial_trace(full, shape, {1});
  CHECK((keep_b - (a.trace() * c.trace()) * b).norm() < 1e-12);

  const Mat keep_all = qcast::partial_trace(full, shape, {0, 1, 2});
  CHECK((keep_all - full).norm() == 0.0);

  const Mat keep_none = qcast::partial_trace(full, shape, {});
  CHECK(std::abs(keep_none(0, 0) - full.trace()) < 1e-12);
}

TEST_CASE("partial_trace validates shapes and keep indices") {
  const Mat m = Mat::Identity(4, 4);
  CHECK_THROWS_AS(qcast::partial_trace(m, qcast::SubsystemShape{{3, 2}}, {0}),
                  qcast::ShapeMismatch);
  CHECK_THROWS_AS(qcast::partial_trace(m, qcast::SubsystemShape{{2, 2}}, {2}),
                  qcast::ShapeMismatch);
  CHECK_THROWS_AS(qcast::partial_trace(m, qcast::SubsystemShape{{2, 2}}, {0, 0}),
                  qcast::ShapeMismatch);
}

TEST_CASE("commutator_norm of the Pauli pair is 2 sqrt 2") {
  const double norm = qcast::commutator_norm(pauli_x(), pauli_z());
  CHECK(std::abs(norm - 2.8284271247461903) < 1e-14);
  const double same = qcast::commutator_norm(pauli_z(), (2.0 * pauli_z()).eval());
  CHECK(same == 0.0);
}

TEST_CASE("fix_column_phases is idempotent and preserves unitarity") {
  std::mt19937_64 rng(20);
  Mat u = oracle::random_unitary(4, rng);
  qcast::fix_column_phases(u);
  CHECK((u.adjoint() * u - Mat::Identity(4, 4)).norm() < 1e-12);
  Mat again = u;
  qcast::fix_column_phases(again);
  CHECK((again - u).norm() < 1e-15);
}
