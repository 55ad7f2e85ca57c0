#pragma once

#include <sstream>
#include <utility>
#include <vector>

#include "qcast/core.hpp"
#include "qcast/errors.hpp"
#include "qcast/states.hpp"

namespace qcast {

// Trace-preserving operation in unitary-dilation form: the input on A is
// joined with a standard state Sigma on B and an ancilla state Upsilon on
// C, rotated by U on A x B x C, and C is traced out. With dim_C = 1 the
// ancilla is trivial and the map is a plain Stinespring dilation on A x B.
template <typename T = double>
class DilationChannel {
 public:
  using Real = T;

  DilationChannel(Eigen::Index dim_a, Eigen::Index dim_b, Eigen::Index dim_c,
                  ComplexMatrix<T> unitary, DensityOperator<T> sigma,
                  DensityOperator<T> upsilon, T tol = T(1e-10))
      : dim_a_(dim_a),
        dim_b_(dim_b),
        dim_c_(dim_c),
        unitary_(std::move(unitary)),
        sigma_(std::move(sigma)),
        upsilon_(std::move(upsilon)) {
    if (dim_a_ < 1 || dim_b_ < 1 || dim_c_ < 1) {
      throw ShapeMismatch("DilationChannel: dimensions must be positive");
    }
    const Eigen::Index total = dim_a_ * dim_b_ * dim_c_;
    if (unitary_.rows() != total || unitary_.cols() != total) {
      std::ostringstream msg;
      msg << "DilationChannel: unitary is " << unitary_.rows() << "x" << unitary_.cols()
          << " but dims multiply to " << total;
      throw ShapeMismatch(msg.str());
    }
    if (sigma_.dim() != dim_b_ || upsilon_.dim() != dim_c_) {
      throw ShapeMismatch("DilationChannel: sigma or upsilon dimension mismatch");
    }
    const T defect =
        (unitary_.adjoint() * unitary_ - ComplexMatrix<T>::Identity(total, total)).norm();
    if (defect > tol) {
      std::ostringstream msg;
      msg << "DilationChannel: unitarity defect " << defect << " exceeds " << tol;
      throw NotUnitary(msg.str());
    }
  }

  // Dilation with the default standard states: Sigma and Upsilon both pure
  // on the first basis vector.
  DilationChannel(Eigen::Index dim_a, Eigen::Index dim_b, Eigen::Index dim_c,
                  ComplexMatrix<T> unitary, T tol = T(1e-10))
      : DilationChannel(dim_a, dim_b, dim_c, std::move(unitary), pure_basis_state<T>(dim_b),
                        pure_basis_state<T>(dim_c), tol) {}

  Eigen::Index dim_a() const { return dim_a_; }
  Eigen::Index dim_b() const { return dim_b_; }
  Eigen::Index dim_c() const { return dim_c_; }
  const ComplexMatrix<T>& unitary() const { return unitary_; }
  const DensityOperator<T>& sigma() const { return sigma_; }
  const DensityOperator<T>& upsilon() const { return upsilon_; }

 private:
  Eigen::Index dim_a_;
  Eigen::Index dim_b_;
  Eigen::Index dim_c_;
  ComplexMatrix<T> unitary_;
  DensityOperator<T> sigma_;
  DensityOperator<T> upsilon_;
};

// E(rho) = tr_C(U (rho x Sigma x Upsilon) U^dag), a state on A x B.
template <typename T>
DensityOperator<T> apply_channel(const DilationChannel<T>& ch, const DensityOperator<T>& rho) {
  if (rho.dim() != ch.dim_a()) {
    std::ostringstream msg;
    msg << "apply_channel: state dimension " << rho.dim() << " does not match dim_A "
        << ch.dim_a();
    throw ShapeMismatch(msg.str());
  }
  const ComplexMatrix<T> joined =
      tensor(tensor(rho.matrix(), ch.sigma().matrix()), ch.upsilon().matrix());
  const ComplexMatrix<T> rotated = ch.unitary() * joined * ch.unitary().adjoint();
  ComplexMatrix<T> out =
      partial_trace(rotated, SubsystemShape{{ch.dim_a(), ch.dim_b(), ch.dim_c()}}, {0, 1});
  const T trace_defect = std::abs(out.trace().real() - T(1)) + std::abs(out.trace().imag());
  if (trace_defect > T(1e-10)) {
    std::ostringstream msg;
    msg << "apply_channel: output trace deviates by " << trace_defect;
    throw TraceNotOne(msg.str());
  }
  return DensityOperator<T>(std::move(out), T(1e-9));
}

// Both reductions of a joint state, ordered as (tr_A result on B,
// tr_B result on A).
template <typename T>
struct Marginals {
  DensityOperator<T> on_b;
  DensityOperator<T> on_a;
};

template <typename T>
Marginals<T> marginals(const DensityOperator<T>& joint, Eigen::Index dim_a, Eigen::Index dim_b) {
  if (dim_a < 1 || dim_b < 1 || joint.dim() != dim_a * dim_b) {
    std::ostringstream msg;
    msg << "marginals: joint dimension " << joint.dim() << " does not factor as " << dim_a
        << "*" << dim_b;
    throw ShapeMismatch(msg.str());
  }
  const SubsystemShape shape{{dim_a, dim_b}};
  ComplexMatrix<T> on_b = partial_trace(joint.matrix(), shape, {1});
  ComplexMatrix<T> on_a = partial_trace(joint.matrix(), shape, {0});
  return Marginals<T>{DensityOperator<T>(std::move(on_b), T(1e-9)),
                      DensityOperator<T>(std::move(on_a), T(1e-9))};
}

// Kraus operators A -> A x B of a channel; completeness is validated at
// construction.
template <typename T = double>
class KrausSet {
 public:
  explicit KrausSet(std::vector<ComplexMatrix<T>> operators, T tol = T(1e-9))
      : operators_(std::move(operators)) {
    if (operators_.empty()) {
      throw NotTracePreserving("KrausSet: empty operator list");
    }
    const Eigen::Index in_dim = operators_.front().cols();
    ComplexMatrix<T> sum = ComplexMatrix<T>::Zero(in_dim, in_dim);
    for (const auto& k : operators_) {
      if (k.cols() != in_dim || k.rows() != operators_.front().rows()) {
        throw ShapeMismatch("KrausSet: operators must share dimensions");
      }
      sum += k.adjoint() * k;
    }
    const T defect = (sum - ComplexMatrix<T>::Identity(in_dim, in_dim)).norm();
    if (defect > tol) {
      std::ostringstream msg;
      msg << "KrausSet: completeness defect " << defect << " exceeds " << tol;
      throw NotTracePreserving(msg.str());
    }
  }

  const std::vector<ComplexMatrix<T>>& operators() const { return operators_; }

 private:
  std::vector<ComplexMatrix<T>> operators_;
};

// Kraus form of the dilation: one operator per ancilla output index c and
// per spectral component (j, k) of Sigma and Upsilon,
// K = sqrt(s_j u_k) (I_AB x <c|) U (I_A x |sigma_j> x |upsilon_k>).
// Components with weight below rank_tol and operators that vanish are
// dropped.
template <typename T>
KrausSet<T> kraus_from_dilation(const DilationChannel<T>& ch, T rank_tol = T(1e-10)) {
  const Eigen::Index da = ch.dim_a();
  const Eigen::Index db = ch.dim_b();
  const Eigen::Index dc = ch.dim_c();
  const auto sig = spectral(ch.sigma());
  const auto ups = spectral(ch.upsilon());

  std::vector<ComplexMatrix<T>> ops;
  const ComplexMatrix<T> eye_a = ComplexMatrix<T>::Identity(da, da);
  const ComplexMatrix<T> eye_ab = ComplexMatrix<T>::Identity(da * db, da * db);
  for (Eigen::Index j = 0; j < db; ++j) {
    if (sig.eigenvalues(j) <= rank_tol) continue;
    for (Eigen::Index k = 0; k < dc; ++k) {
      if (ups.eigenvalues(k) <= rank_tol) continue;
      const ComplexMatrix<T> inject =
          tensor(eye_a, tensor(ComplexMatrix<T>(sig.basis.col(j)),
                               ComplexMatrix<T>(ups.basis.col(k))));
      const T weight = std::sqrt(sig.eigenvalues(j) * ups.eigenvalues(k));
      for (Eigen::Index c = 0; c < dc; ++c) {
        ComplexMatrix<T> bra_c = ComplexMatrix<T>::Zero(1, dc);
        bra_c(0, c) = T(1);
        ComplexMatrix<T> op = weight * tensor(eye_ab, bra_c) * ch.unitary() * inject;
        if (op.norm() > T(1e-12)) {
          ops.push_back(std::move(op));
        }
      }
    }
  }
  return KrausSet<T>(std::move(ops));
}

// Sum_i K rho K^dag, a state on A x B.
template <typename T>
DensityOperator<T> apply_kraus(const KrausSet<T>& kraus, const DensityOperator<T>& rho) {
  const auto& ops = kraus.operators();
  if (ops.front().cols() != rho.dim()) {
    throw ShapeMismatch("apply_kraus: state dimension does not match operators");
  }
  ComplexMatrix<T> out = ComplexMatrix<T>::Zero(ops.front().rows(), ops.front().rows());
  for (const auto& k : ops) {
    out += k * rho.matrix() * k.adjoint();
  }
  return DensityOperator<T>(std::move(out), T(1e-9));
}

}  // namespace qcast
