#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <utility>

#include "qcast/core.hpp"
#include "qcast/errors.hpp"

namespace qcast {

// Validated mixed state: Hermitian, positive semidefinite, unit trace,
// each within an absolute tolerance fixed at construction.
template <typename T = double>
class DensityOperator {
 public:
  using Real = T;
  using Matrix = ComplexMatrix<T>;

  explicit DensityOperator(Matrix m, T tol = T(1e-10)) : mat_(std::move(m)) {
    detail::require_square(mat_, "DensityOperator");
    const T herm_defect = (mat_ - mat_.adjoint()).norm();
    if (herm_defect > tol) {
      std::ostringstream msg;
      msg << "DensityOperator: Hermiticity defect " << herm_defect << " exceeds " << tol;
      throw NotHermitian(msg.str());
    }
    const T trace_defect = std::abs(mat_.trace().real() - T(1)) + std::abs(mat_.trace().imag());
    if (trace_defect > tol) {
      std::ostringstream msg;
      msg << "DensityOperator: trace deviates from one by " << trace_defect;
      throw TraceNotOne(msg.str());
    }
    const auto sys = hermitian_eig(mat_, tol);
    const T min_eig = sys.eigenvalues.minCoeff();
    if (min_eig < -tol) {
      std::ostringstream msg;
      msg << "DensityOperator: eigenvalue " << min_eig << " below -" << tol;
      throw NotPositive(msg.str());
    }
  }

  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

template <typename Derived>
DensityOperator<detail::RealScalarOf<Derived>> validate_density(
    const Eigen::MatrixBase<Derived>& m,
    detail::RealScalarOf<Derived> tol = detail::RealScalarOf<Derived>(1e-10)) {
  return DensityOperator<detail::RealScalarOf<Derived>>(detail::as_complex(m), tol);
}

template <typename T>
struct SpectralDecomposition {
  RealVector<T> eigenvalues;  // ascending, clamped to be nonnegative
  ComplexMatrix<T> basis;     // unitary columns, phase-fixed
};

// Spectral decomposition of a state; tiny negative eigenvalues within the
// construction tolerance are clamped to zero.
template <typename T>
SpectralDecomposition<T> spectral(const DensityOperator<T>& rho, T tol = T(1e-10)) {
  auto sys = hermitian_eig(rho.matrix(), tol);
  SpectralDecomposition<T> dec{sys.eigenvalues.cwiseMax(T(0)), std::move(sys.eigenvectors)};
  return dec;
}

// Pure state |index><index| in the computational basis.
template <typename T = double>
DensityOperator<T> pure_basis_state(Eigen::Index dim, Eigen::Index index = 0) {
  if (index < 0 || index >= dim) {
    throw ShapeMismatch("pure_basis_state: index out of range");
  }
  ComplexMatrix<T> m = ComplexMatrix<T>::Zero(dim, dim);
  m(index, index) = T(1);
  return DensityOperator<T>(std::move(m));
}

template <typename T = double>
ComplexMatrix<T> ginibre(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<T> gauss(T(0), T(1));
  ComplexMatrix<T> g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const T re = gauss(rng);
      const T im = gauss(rng);
      g(i, j) = std::complex<T>(re, im);
    }
  }
  return g;
}

// Random state GG^dag / tr(GG^dag) with G a dim x rank complex Ginibre
// matrix drawn from the supplied generator.
template <typename T = double>
DensityOperator<T> random_density(Eigen::Index dim, Eigen::Index rank, std::mt19937_64& rng) {
  if (rank < 1 || rank > dim) {
    std::ostringstream msg;
    msg << "random_density: rank " << rank << " outside [1, " << dim << "]";
    throw InvalidRank(msg.str());
  }
  const ComplexMatrix<T> g = ginibre<T>(dim, rank, rng);
  ComplexMatrix<T> m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOperator<T>(std::move(m));
}

template <typename T = double>
DensityOperator<T> random_density(Eigen::Index dim, Eigen::Index rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_density<T>(dim, rank, rng);
}

// Haar-distributed unitary: QR of a Ginibre matrix, with the R diagonal's
// phases absorbed into Q so the factor is unique, then column phases fixed.
template <typename T = double>
ComplexMatrix<T> random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  const ComplexMatrix<T> g = ginibre<T>(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix<T>> qr(g);
  ComplexMatrix<T> q = qr.householderQ();
  const ComplexMatrix<T> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < dim; ++k) {
    const std::complex<T> d = r(k, k);
    const T mag = std::abs(d);
    q.col(k) *= mag > T(0) ? d / mag : std::complex<T>(1, 0);
  }
  return q;
}

template <typename T = double>
ComplexMatrix<T> random_unitary(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_unitary<T>(dim, rng);
}

}  // namespace qcast
