#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qcast/errors.hpp"

namespace qcast {

template <typename T>
using ComplexMatrix = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
using ComplexVector = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;

template <typename T>
using RealVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

namespace detail {

template <typename Derived>
using RealScalarOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

// Materialize an expression as a dense complex matrix so real-valued
// inputs flow through the same code paths as complex ones.
template <typename Derived>
ComplexMatrix<RealScalarOf<Derived>> as_complex(const Eigen::MatrixBase<Derived>& a) {
  using T = RealScalarOf<Derived>;
  return a.derived().template cast<std::complex<T>>();
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << what << ": matrix must be square, got " << a.rows() << "x" << a.cols();
    throw ShapeMismatch(msg.str());
  }
}

}  // namespace detail

// Rotate each column so its largest-magnitude entry is real and positive.
// Pins the arbitrary phase of eigenvectors and makes decompositions
// reproducible across runs.
template <typename T>
void fix_column_phases(ComplexMatrix<T>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index imax = 0;
    m.col(j).cwiseAbs().maxCoeff(&imax);
    const std::complex<T> pivot = m(imax, j);
    const T mag = std::abs(pivot);
    if (mag > T(0)) {
      m.col(j) *= std::conj(pivot) / mag;
    }
  }
}

template <typename T>
struct HermitianEigenSystem {
  RealVector<T> eigenvalues;     // ascending
  ComplexMatrix<T> eigenvectors; // unitary, columns phase-fixed
};

// Eigendecomposition of a Hermitian matrix with a deterministic basis:
// eigenvalues ascending, each eigenvector's largest entry real positive.
// Throws NotHermitian when ||A - A^dag||_F > tol * max(1, ||A||_F).
template <typename Derived>
HermitianEigenSystem<detail::RealScalarOf<Derived>> hermitian_eig(
    const Eigen::MatrixBase<Derived>& a,
    detail::RealScalarOf<Derived> tol = detail::RealScalarOf<Derived>(1e-10)) {
  using T = detail::RealScalarOf<Derived>;
  ComplexMatrix<T> m = detail::as_complex(a);
  detail::require_square(m, "hermitian_eig");
  const T scale = std::max(T(1), m.norm());
  const T herm_defect = (m - m.adjoint()).norm();
  if (herm_defect > tol * scale) {
    std::ostringstream msg;
    msg << "hermitian_eig: Hermiticity defect " << herm_defect << " exceeds " << tol * scale;
    throw NotHermitian(msg.str());
  }
  const ComplexMatrix<T> sym = (m + m.adjoint()) / T(2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<T>> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("hermitian_eig: eigensolver failed to converge");
  }
  HermitianEigenSystem<T> sys{solver.eigenvalues(), solver.eigenvectors()};
  fix_column_phases(sys.eigenvectors);
  return sys;
}

namespace detail {

// Eigenvalues below this fraction of the spectral radius sit at the noise
// floor of the eigensolver; rooting them would amplify O(eps) noise to
// O(sqrt(eps)), so callers snap them to zero first.
template <typename T>
T spectral_noise_cut(const RealVector<T>& eigenvalues) {
  const T top = eigenvalues.size() > 0 ? eigenvalues.cwiseAbs().maxCoeff() : T(0);
  return T(32) * T(eigenvalues.size()) * Eigen::NumTraits<T>::epsilon() * top;
}

}  // namespace detail

// Principal square root of a positive semidefinite matrix. Eigenvalues in
// [-tol, 0] are clamped to zero; anything below -tol throws NotPositive.
template <typename Derived>
ComplexMatrix<detail::RealScalarOf<Derived>> positive_sqrt(
    const Eigen::MatrixBase<Derived>& a,
    detail::RealScalarOf<Derived> tol = detail::RealScalarOf<Derived>(1e-10)) {
  using T = detail::RealScalarOf<Derived>;
  auto sys = hermitian_eig(a, tol);
  const T min_eig = sys.eigenvalues.minCoeff();
  if (min_eig < -tol) {
    std::ostringstream msg;
    msg << "positive_sqrt: eigenvalue " << min_eig << " below -" << tol;
    throw NotPositive(msg.str());
  }
  const T cut = detail::spectral_noise_cut(sys.eigenvalues);
  RealVector<T> roots = sys.eigenvalues;
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    roots(i) = roots(i) > cut ? std::sqrt(roots(i)) : T(0);
  }
  return sys.eigenvectors *
         roots.template cast<std::complex<T>>().asDiagonal() *
         sys.eigenvectors.adjoint();
}

// Moore-Penrose inverse square root: eigenvalues above rank_tol map to
// 1/sqrt(lambda), the rest to zero. The result acts as the inverse of
// positive_sqrt on the support and annihilates the kernel.
template <typename Derived>
ComplexMatrix<detail::RealScalarOf<Derived>> pseudo_inverse_sqrt(
    const Eigen::MatrixBase<Derived>& a,
    detail::RealScalarOf<Derived> rank_tol = detail::RealScalarOf<Derived>(1e-12)) {
  using T = detail::RealScalarOf<Derived>;
  auto sys = hermitian_eig(a);
  const T min_eig = sys.eigenvalues.minCoeff();
  if (min_eig < -std::max(rank_tol, T(1e-10))) {
    std::ostringstream msg;
    msg << "pseudo_inverse_sqrt: eigenvalue " << min_eig << " is negative";
    throw NotPositive(msg.str());
  }
  RealVector<T> inv = sys.eigenvalues;
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    inv(i) = sys.eigenvalues(i) > rank_tol ? T(1) / std::sqrt(sys.eigenvalues(i)) : T(0);
  }
  return sys.eigenvectors *
         inv.template cast<std::complex<T>>().asDiagonal() *
         sys.eigenvectors.adjoint();
}

// Unitary factor V of the polar decomposition O = V sqrt(O^dag O), i.e.
// the maximizer of Re tr(U O) over unitaries. Computed from a full SVD
// O = W S X^dag as V = X W^dag. On a rank-deficient O the null directions
// of W and X are phase-fixed independently, which pins one deterministic
// completion among the valid ones.
template <typename Derived>
ComplexMatrix<detail::RealScalarOf<Derived>> polar_unitary(const Eigen::MatrixBase<Derived>& o) {
  using T = detail::RealScalarOf<Derived>;
  ComplexMatrix<T> m = detail::as_complex(o);
  detail::require_square(m, "polar_unitary");
  Eigen::JacobiSVD<ComplexMatrix<T>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw ConvergenceFailure("polar_unitary: SVD failed to converge");
  }
  ComplexMatrix<T> w = svd.matrixU();
  ComplexMatrix<T> x = svd.matrixV();
  const RealVector<T>& s = svd.singularValues();
  const T cutoff =
      s.size() > 0 ? s(0) * T(m.rows()) * Eigen::NumTraits<T>::epsilon() : T(0);
  for (Eigen::Index k = 0; k < w.cols(); ++k) {
    if (k < s.size() && s(k) > cutoff) {
      // Rotating both factors by the same phase leaves O invariant.
      Eigen::Index imax = 0;
      w.col(k).cwiseAbs().maxCoeff(&imax);
      const std::complex<T> pivot = w(imax, k);
      const T mag = std::abs(pivot);
      if (mag > T(0)) {
        const std::complex<T> phase = std::conj(pivot) / mag;
        w.col(k) *= phase;
        x.col(k) *= phase;
      }
    } else {
      ComplexMatrix<T> wc = w.col(k);
      ComplexMatrix<T> xc = x.col(k);
      fix_column_phases(wc);
      fix_column_phases(xc);
      w.col(k) = wc;
      x.col(k) = xc;
    }
  }
  return x * w.adjoint();
}

// Kronecker product with the row-major index convention
// (i_a, i_b) -> i_a * rows(b) + i_b.
template <typename DA, typename DB>
ComplexMatrix<detail::RealScalarOf<DA>> tensor(const Eigen::MatrixBase<DA>& a,
                                               const Eigen::MatrixBase<DB>& b) {
  using T = detail::RealScalarOf<DA>;
  ComplexMatrix<T> ma = detail::as_complex(a);
  ComplexMatrix<T> mb = detail::as_complex(b);
  ComplexMatrix<T> out(ma.rows() * mb.rows(), ma.cols() * mb.cols());
  for (Eigen::Index i = 0; i < ma.rows(); ++i) {
    for (Eigen::Index j = 0; j < ma.cols(); ++j) {
      out.block(i * mb.rows(), j * mb.cols(), mb.rows(), mb.cols()) = ma(i, j) * mb;
    }
  }
  return out;
}

// Factor dimensions of a tensor-product space, slowest index first.
struct SubsystemShape {
  std::vector<Eigen::Index> dims;

  Eigen::Index total() const {
    return std::accumulate(dims.begin(), dims.end(), Eigen::Index(1),
                           std::multiplies<Eigen::Index>());
  }
};

// Partial trace over the factors not listed in keep. The kept factors
// retain their original relative order; keep indices must be distinct
// and in range.
template <typename Derived>
ComplexMatrix<detail::RealScalarOf<Derived>> partial_trace(
    const Eigen::MatrixBase<Derived>& m, const SubsystemShape& shape,
    const std::vector<std::size_t>& keep) {
  using T = detail::RealScalarOf<Derived>;
  ComplexMatrix<T> mat = detail::as_complex(m);
  detail::require_square(mat, "partial_trace");
  if (shape.dims.empty() || shape.total() != mat.rows()) {
    std::ostringstream msg;
    msg << "partial_trace: shape product " << (shape.dims.empty() ? 0 : shape.total())
        << " does not match matrix dimension " << mat.rows();
    throw ShapeMismatch(msg.str());
  }
  for (Eigen::Index d : shape.dims) {
    if (d < 1) throw ShapeMismatch("partial_trace: factor dimensions must be positive");
  }
  const std::size_t n_factors = shape.dims.size();
  std::vector<bool> kept(n_factors, false);
  for (std::size_t k : keep) {
    if (k >= n_factors) throw ShapeMismatch("partial_trace: keep index out of range");
    if (kept[k]) throw ShapeMismatch("partial_trace: duplicate keep index");
    kept[k] = true;
  }

  std::vector<Eigen::Index> strides(n_factors, 1);
  for (std::size_t i = n_factors; i-- > 1;) {
    strides[i - 1] = strides[i] * shape.dims[i];
  }
  std::vector<std::size_t> keep_idx;
  std::vector<std::size_t> traced_idx;
  for (std::size_t i = 0; i < n_factors; ++i) {
    (kept[i] ? keep_idx : traced_idx).push_back(i);
  }

  // Offsets of every multi-index combination within the kept factors and
  // within the traced factors, so the sum below is a flat double loop.
  auto offsets = [&](const std::vector<std::size_t>& factors) {
    std::vector<Eigen::Index> out{0};
    for (std::size_t f : factors) {
      std::vector<Eigen::Index> next;
      next.reserve(out.size() * shape.dims[f]);
      for (Eigen::Index base : out) {
        for (Eigen::Index v = 0; v < shape.dims[f]; ++v) {
          next.push_back(base + v * strides[f]);
        }
      }
      out = std::move(next);
    }
    return out;
  };
  const std::vector<Eigen::Index> keep_off = offsets(keep_idx);
  const std::vector<Eigen::Index> trace_off = offsets(traced_idx);

  const Eigen::Index dim_keep = static_cast<Eigen::Index>(keep_off.size());
  ComplexMatrix<T> out = ComplexMatrix<T>::Zero(dim_keep, dim_keep);
  for (Eigen::Index r = 0; r < dim_keep; ++r) {
    for (Eigen::Index c = 0; c < dim_keep; ++c) {
      std::complex<T> acc(0, 0);
      for (Eigen::Index t : trace_off) {
        acc += mat(keep_off[r] + t, keep_off[c] + t);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

// Frobenius norm of the commutator [A, B].
template <typename DA, typename DB>
detail::RealScalarOf<DA> commutator_norm(const Eigen::MatrixBase<DA>& a,
                                         const Eigen::MatrixBase<DB>& b) {
  using T = detail::RealScalarOf<DA>;
  ComplexMatrix<T> ma = detail::as_complex(a);
  ComplexMatrix<T> mb = detail::as_complex(b);
  detail::require_square(ma, "commutator_norm");
  if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) {
    throw ShapeMismatch("commutator_norm: operands must share dimensions");
  }
  return (ma * mb - mb * ma).norm();
}

}  // namespace qcast
