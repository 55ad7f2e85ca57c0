#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "qcast/core.hpp"
#include "qcast/errors.hpp"
#include "qcast/states.hpp"

namespace qcast {

// Positive operator-valued measure: Hermitian elements with eigenvalues
// >= -1e-10 summing to the identity within 1e-9, plus optional eigenvalue
// labels mu_b carried over from the construction of an optimal measurement.
template <typename T = double>
class Povm {
 public:
  Povm(std::vector<ComplexMatrix<T>> elements, RealVector<T> mu = RealVector<T>())
      : elements_(std::move(elements)), mu_(std::move(mu)) {
    if (elements_.empty()) {
      throw InvalidPovm("Povm: element list is empty");
    }
    const Eigen::Index dim = elements_.front().rows();
    ComplexMatrix<T> sum = ComplexMatrix<T>::Zero(dim, dim);
    for (std::size_t b = 0; b < elements_.size(); ++b) {
      const auto& e = elements_[b];
      if (e.rows() != dim || e.cols() != dim) {
        throw InvalidPovm("Povm: elements must be square and share dimensions");
      }
      if ((e - e.adjoint()).norm() > T(1e-10)) {
        std::ostringstream msg;
        msg << "Povm: element " << b << " is not Hermitian within 1e-10";
        throw InvalidPovm(msg.str());
      }
      Eigen::SelfAdjointEigenSolver<ComplexMatrix<T>> solver((e + e.adjoint()) / T(2),
                                                             Eigen::EigenvaluesOnly);
      if (solver.eigenvalues().minCoeff() < T(-1e-10)) {
        std::ostringstream msg;
        msg << "Povm: element " << b << " has eigenvalue " << solver.eigenvalues().minCoeff();
        throw InvalidPovm(msg.str());
      }
      sum += e;
    }
    const T defect = (sum - ComplexMatrix<T>::Identity(dim, dim)).norm();
    if (defect > T(1e-9)) {
      std::ostringstream msg;
      msg << "Povm: completeness defect " << defect << " exceeds 1e-9";
      throw InvalidPovm(msg.str());
    }
    if (mu_.size() != 0 && mu_.size() != static_cast<Eigen::Index>(elements_.size())) {
      throw InvalidPovm("Povm: label array length does not match element count");
    }
  }

  const std::vector<ComplexMatrix<T>>& elements() const { return elements_; }
  const RealVector<T>& mu() const { return mu_; }
  bool has_mu() const { return mu_.size() != 0; }
  Eigen::Index dim() const { return elements_.front().rows(); }
  std::size_t size() const { return elements_.size(); }

 private:
  std::vector<ComplexMatrix<T>> elements_;
  RealVector<T> mu_;
};

// F(rho0, rho1) = tr sqrt(rho0^{1/2} rho1 rho0^{1/2}), evaluated by summing
// the square roots of the clamped eigenvalues of the sandwiched product.
template <typename T>
T fidelity(const DensityOperator<T>& rho0, const DensityOperator<T>& rho1) {
  if (rho0.dim() != rho1.dim()) {
    throw ShapeMismatch("fidelity: states must share dimension");
  }
  const ComplexMatrix<T> root0 = positive_sqrt(rho0.matrix());
  const ComplexMatrix<T> sandwich = root0 * rho1.matrix() * root0;
  const auto sys = hermitian_eig(sandwich, T(1e-8));
  const T cut = detail::spectral_noise_cut(sys.eigenvalues);
  T sum(0);
  for (Eigen::Index i = 0; i < sys.eigenvalues.size(); ++i) {
    if (sys.eigenvalues(i) > cut) sum += std::sqrt(sys.eigenvalues(i));
  }
  return std::clamp(sum, T(0), T(1));
}

// Sum_b sqrt(tr(rho0 E_b)) sqrt(tr(rho1 E_b)); tiny negative traces are
// clamped to zero before rooting.
template <typename T>
T povm_overlap(const DensityOperator<T>& rho0, const DensityOperator<T>& rho1,
               const Povm<T>& povm) {
  if (rho0.dim() != rho1.dim() || rho0.dim() != povm.dim()) {
    throw ShapeMismatch("povm_overlap: dimensions must match");
  }
  auto weight = [](const ComplexMatrix<T>& rho, const ComplexMatrix<T>& e) {
    const T t = (rho * e).trace().real();
    if (t < T(-1e-12)) {
      std::ostringstream msg;
      msg << "povm_overlap: measurement weight " << t << " is negative";
      throw InvalidPovm(msg.str());
    }
    // Weights at the rounding floor are structural zeros; rooting them
    // would inject O(sqrt(eps)) noise into the sum.
    return t > T(1e-14) ? t : T(0);
  };
  T sum(0);
  for (const auto& e : povm.elements()) {
    sum += std::sqrt(weight(rho0.matrix(), e)) * std::sqrt(weight(rho1.matrix(), e));
  }
  return sum;
}

// The unitary attaining max_U |tr(U rho0^{1/2} rho1^{1/2})|, i.e. the one
// with U rho0^{1/2} rho1^{1/2} = sqrt(rho1^{1/2} rho0 rho1^{1/2}).
template <typename T>
ComplexMatrix<T> fidelity_unitary(const DensityOperator<T>& rho0,
                                  const DensityOperator<T>& rho1) {
  if (rho0.dim() != rho1.dim()) {
    throw ShapeMismatch("fidelity_unitary: states must share dimension");
  }
  const ComplexMatrix<T> product =
      positive_sqrt(rho0.matrix()) * positive_sqrt(rho1.matrix());
  return polar_unitary(product);
}

// Optimal measurement bundle: the minimal overlap value, the measurement
// attaining it, the operator M whose eigenbasis defines it, and the
// canonical unitary. basis holds the rank-1 measurement vectors (columns)
// with their labels in basis_mu; for a singular rho1 the element list
// additionally starts with the projector onto the null subspace, labeled 0.
template <typename T = double>
struct FidelityWitness {
  T value;
  Povm<T> povm;
  ComplexMatrix<T> m_operator;
  ComplexMatrix<T> unitary_u;
  ComplexMatrix<T> basis;
  RealVector<T> basis_mu;
};

template <typename T>
FidelityWitness<T> optimal_povm(const DensityOperator<T>& rho0, const DensityOperator<T>& rho1,
                                T rank_tol = T(1e-10)) {
  if (rho0.dim() != rho1.dim()) {
    throw ShapeMismatch("optimal_povm: states must share dimension");
  }
  const Eigen::Index dim = rho0.dim();
  const auto dec1 = spectral(rho1);

  std::vector<ComplexMatrix<T>> elements;
  ComplexMatrix<T> m_full;
  ComplexMatrix<T> basis;
  RealVector<T> basis_mu;
  RealVector<T> labels;

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (dec1.eigenvalues(i) > rank_tol) ++rank;
  }

  if (rank == dim) {
    const ComplexMatrix<T> root1 = positive_sqrt(rho1.matrix());
    const ComplexMatrix<T> inv_root1 = pseudo_inverse_sqrt(rho1.matrix(), rank_tol);
    const ComplexMatrix<T> inner = positive_sqrt((root1 * rho0.matrix() * root1).eval());
    m_full = inv_root1 * inner * inv_root1;
    const auto msys = hermitian_eig(((m_full + m_full.adjoint()) / T(2)).eval());
    m_full = (m_full + m_full.adjoint()) / T(2);
    basis = msys.eigenvectors;
    basis_mu = msys.eigenvalues.cwiseMax(T(0));
    labels = basis_mu;
    elements.reserve(dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
      elements.push_back(basis.col(b) * basis.col(b).adjoint());
    }
  } else {
    // Two-block recipe: eigenvalues of rho1 are ascending, so the first
    // dim - rank columns span the null subspace and the rest the support.
    const ComplexMatrix<T> null_basis = dec1.basis.leftCols(dim - rank);
    const ComplexMatrix<T> support = dec1.basis.rightCols(rank);
    const RealVector<T> lam1 = dec1.eigenvalues.tail(rank);

    const ComplexMatrix<T> rho0_s = support.adjoint() * rho0.matrix() * support;
    const ComplexMatrix<T> root1_s =
        lam1.cwiseSqrt().template cast<std::complex<T>>().asDiagonal();
    const ComplexMatrix<T> inv_root1_s =
        lam1.cwiseSqrt().cwiseInverse().template cast<std::complex<T>>().asDiagonal();
    const ComplexMatrix<T> inner_s = positive_sqrt((root1_s * rho0_s * root1_s).eval());
    ComplexMatrix<T> m_s = inv_root1_s * inner_s * inv_root1_s;
    m_s = (m_s + m_s.adjoint()) / T(2);
    const auto msys = hermitian_eig(m_s);

    basis = support * msys.eigenvectors;
    basis_mu = msys.eigenvalues.cwiseMax(T(0));
    m_full = basis * basis_mu.template cast<std::complex<T>>().asDiagonal() * basis.adjoint();

    elements.reserve(rank + 1);
    elements.push_back(null_basis * null_basis.adjoint());
    labels = RealVector<T>(rank + 1);
    labels(0) = T(0);
    for (Eigen::Index b = 0; b < rank; ++b) {
      elements.push_back(basis.col(b) * basis.col(b).adjoint());
      labels(b + 1) = basis_mu(b);
    }
  }

  FidelityWitness<T> witness{T(0), Povm<T>(std::move(elements), std::move(labels)),
                             std::move(m_full), fidelity_unitary(rho0, rho1),
                             std::move(basis), std::move(basis_mu)};
  witness.value = povm_overlap(rho0, rho1, witness.povm);
  return witness;
}

// Least-squares diagnosis of the equality conditions, one row per element:
// the scalar mu_b minimizing ||U rho0^{1/2} E_b^{1/2} - mu_b rho1^{1/2}
// E_b^{1/2}||_F, the residual at the minimum, and whether the element
// carries no weight under rho1 (in which case the condition is vacuous).
template <typename T = double>
struct ElementOptimality {
  T mu;
  T residual;
  bool null_weight;
};

template <typename T = double>
struct OptimalityReport {
  std::vector<ElementOptimality<T>> elements;
  T scale;
  bool optimal;
};

template <typename T>
OptimalityReport<T> check_povm_optimality(const DensityOperator<T>& rho0,
                                          const DensityOperator<T>& rho1, const Povm<T>& povm,
                                          T tol = T(1e-8)) {
  if (rho0.dim() != rho1.dim() || rho0.dim() != povm.dim()) {
    throw InvalidPovm("check_povm_optimality: dimensions must match");
  }
  const ComplexMatrix<T> u = fidelity_unitary(rho0, rho1);
  const ComplexMatrix<T> root0 = positive_sqrt(rho0.matrix());
  const ComplexMatrix<T> root1 = positive_sqrt(rho1.matrix());

  OptimalityReport<T> report;
  report.scale = std::max(T(1), std::max(root0.norm(), root1.norm()));
  report.optimal = true;
  const T null_tol = T(1e-10) * report.scale;

  for (const auto& e : povm.elements()) {
    const ComplexMatrix<T> root_e = positive_sqrt(e);
    const ComplexMatrix<T> lhs = u * root0 * root_e;
    const ComplexMatrix<T> rhs = root1 * root_e;
    ElementOptimality<T> row{T(0), T(0), false};
    const T rhs_norm = rhs.norm();
    if (rhs_norm <= null_tol) {
      row.null_weight = true;
    } else {
      row.mu = (rhs.adjoint() * lhs).trace().real() / (rhs_norm * rhs_norm);
      row.residual = (lhs - row.mu * rhs).norm();
      if (row.residual > tol * report.scale || row.mu < -tol) {
        report.optimal = false;
      }
    }
    report.elements.push_back(row);
  }
  return report;
}

// Exhaustive projective-measurement oracle for qubits: minimizes the
// overlap over {P(theta, phi), I - P(theta, phi)} on a grid with theta in
// [0, pi] and phi in [0, 2 pi).
template <typename T>
T brute_force_min_overlap(const DensityOperator<T>& rho0, const DensityOperator<T>& rho1,
                          int grid) {
  if (rho0.dim() != 2 || rho1.dim() != 2) {
    throw ShapeMismatch("brute_force_min_overlap: qubit states required");
  }
  if (grid < 2) {
    throw InvalidConfig("brute_force_min_overlap: grid must be at least 2");
  }
  const T a0 = rho0.matrix()(0, 0).real();
  const T a1 = rho1.matrix()(0, 0).real();
  const T x0 = rho0.matrix()(0, 1).real();
  const T y0 = rho0.matrix()(0, 1).imag();
  const T x1 = rho1.matrix()(0, 1).real();
  const T y1 = rho1.matrix()(0, 1).imag();

  const T pi = std::acos(T(-1));
  auto clamp01 = [](T t) { return std::clamp(t, T(0), T(1)); };
  T best = std::numeric_limits<T>::max();
  for (int i = 0; i < grid; ++i) {
    const T theta = pi * T(i) / T(grid - 1);
    const T c = std::cos(theta / 2);
    const T s = std::sin(theta / 2);
    const T cc = c * c;
    const T ss = s * s;
    const T cs2 = 2 * c * s;
    for (int j = 0; j < grid; ++j) {
      const T phi = 2 * pi * T(j) / T(grid);
      const T cp = std::cos(phi);
      const T sp = std::sin(phi);
      // tr(rho P) for P = |psi><psi|, psi = (cos t/2, e^{i phi} sin t/2).
      const T t0 = clamp01(a0 * cc + (1 - a0) * ss + cs2 * (x0 * cp - y0 * sp));
      const T t1 = clamp01(a1 * cc + (1 - a1) * ss + cs2 * (x1 * cp - y1 * sp));
      const T value = std::sqrt(t0 * t1) + std::sqrt((1 - t0) * (1 - t1));
      best = std::min(best, value);
    }
  }
  return best;
}

}  // namespace qcast
