#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qcast/broadcasting.hpp"
#include "qcast/channels.hpp"
#include "qcast/core.hpp"
#include "qcast/errors.hpp"
#include "qcast/fidelity.hpp"
#include "qcast/states.hpp"

namespace qcast {

enum class SearchObjective { min_marginal_fidelity, mean_marginal_fidelity };

// Knobs of the variational broadcast search. The objective defaults to the
// minimum marginal fidelity so that an objective value of one is exactly
// the broadcast condition; the mean variant trades that sharpness for a
// smoother landscape.
template <typename T = double>
struct SearchConfig {
  Eigen::Index ancilla_dim = 1;
  int restarts = 8;
  int max_iters = 400;
  T step_init = T(0.5);
  T step_min = T(1e-4);
  std::uint64_t seed = 0;
  SearchObjective objective = SearchObjective::min_marginal_fidelity;

  void validate() const {
    if (ancilla_dim < 1) throw InvalidConfig("SearchConfig: ancilla_dim must be at least 1");
    if (restarts < 1) throw InvalidConfig("SearchConfig: restarts must be positive");
    if (max_iters < 1) throw InvalidConfig("SearchConfig: max_iters must be positive");
    if (!(step_init > T(0)) || !(step_min > T(0))) {
      throw InvalidConfig("SearchConfig: step sizes must be positive");
    }
    if (!(step_min < step_init)) {
      throw InvalidConfig("SearchConfig: step_min must be smaller than step_init");
    }
  }
};

template <typename T = double>
struct RestartTracePoint {
  int iteration;
  T quality;
};

template <typename T = double>
struct SearchResult {
  DilationChannel<T> best_channel;
  T quality;
  std::vector<std::vector<RestartTracePoint<T>>> per_restart_trace;
  ChainReport<T> chain;
  bool certified;
  long total_iterations;
  std::string caveat;
};

// Hermitian matrix from a real vector of dim^2 parameters: the first dim
// entries fill the diagonal, the rest supply (re, im) for the strictly
// upper triangle in row-major order.
template <typename T>
ComplexMatrix<T> hermitian_from_params(const RealVector<T>& theta, Eigen::Index dim) {
  if (dim < 1 || theta.size() != dim * dim) {
    std::ostringstream msg;
    msg << "hermitian_from_params: expected " << dim * dim << " parameters, got "
        << theta.size();
    throw ShapeMismatch(msg.str());
  }
  ComplexMatrix<T> h(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) h(i, i) = theta(i);
  Eigen::Index k = dim;
  for (Eigen::Index p = 0; p < dim; ++p) {
    for (Eigen::Index q = p + 1; q < dim; ++q) {
      h(p, q) = std::complex<T>(theta(k), theta(k + 1));
      h(q, p) = std::conj(h(p, q));
      k += 2;
    }
  }
  return h;
}

template <typename T>
RealVector<T> params_from_hermitian(const ComplexMatrix<T>& h) {
  detail::require_square(h, "params_from_hermitian");
  const Eigen::Index dim = h.rows();
  RealVector<T> theta(dim * dim);
  for (Eigen::Index i = 0; i < dim; ++i) theta(i) = h(i, i).real();
  Eigen::Index k = dim;
  for (Eigen::Index p = 0; p < dim; ++p) {
    for (Eigen::Index q = p + 1; q < dim; ++q) {
      theta(k) = h(p, q).real();
      theta(k + 1) = h(p, q).imag();
      k += 2;
    }
  }
  return theta;
}

// U = exp(iH); unitary by construction for any parameter vector.
template <typename T>
ComplexMatrix<T> unitary_from_params(const RealVector<T>& theta, Eigen::Index dim) {
  const ComplexMatrix<T> h = hermitian_from_params(theta, dim);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<T>> solver(h);
  ComplexVector<T> phases(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    phases(i) = std::exp(std::complex<T>(T(0), solver.eigenvalues()(i)));
  }
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

// Principal-branch generator of a unitary, H = -i log U, recovered from
// the Schur form; exp(i hermitian_from_params(...)) reproduces u.
template <typename T>
RealVector<T> params_from_unitary(const ComplexMatrix<T>& u) {
  detail::require_square(u, "params_from_unitary");
  const Eigen::Index dim = u.rows();
  const T defect =
      (u.adjoint() * u - ComplexMatrix<T>::Identity(dim, dim)).norm();
  if (defect > T(1e-8)) {
    std::ostringstream msg;
    msg << "params_from_unitary: unitarity defect " << defect;
    throw NotUnitary(msg.str());
  }
  Eigen::ComplexSchur<ComplexMatrix<T>> schur(u);
  RealVector<T> angles(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    angles(i) = std::arg(schur.matrixT()(i, i));
  }
  ComplexMatrix<T> h = schur.matrixU() * angles.template cast<std::complex<T>>().asDiagonal() *
                       schur.matrixU().adjoint();
  h = ((h + h.adjoint()) / T(2)).eval();
  return params_from_hermitian(h);
}

namespace detail {

// Generator parameters of the commuting-style cloner in the eigenbasis of
// the average state, extended trivially to the ancilla; for commuting
// inputs this start is already an exact broadcaster.
template <typename T>
RealVector<T> seeded_start(const DensityOperator<T>& rho0, const DensityOperator<T>& rho1,
                           Eigen::Index ancilla_dim) {
  const Eigen::Index n = rho0.dim();
  const ComplexMatrix<T> avg = ((rho0.matrix() + rho1.matrix()) / T(2)).eval();
  const auto sys = hermitian_eig(avg);
  const ComplexMatrix<T> eye = ComplexMatrix<T>::Identity(n, n);
  const ComplexMatrix<T> cloner = tensor(sys.eigenvectors, sys.eigenvectors) *
                                  controlled_shift_unitary<T>(n) *
                                  tensor(sys.eigenvectors.adjoint(), eye);
  const ComplexMatrix<T> eye_c =
      ComplexMatrix<T>::Identity(ancilla_dim, ancilla_dim);
  return params_from_unitary<T>(tensor(cloner, eye_c));
}

}  // namespace detail

// Random-restart hill climbing over dilation unitaries U = exp(iH) on
// A x B x C. Restart 0 starts from the commuting construction on the
// eigenbasis of (rho0 + rho1)/2; the rest start from seeded Haar unitaries.
// Steps are accepted on strict objective improvement with the step length
// scaled by 1.2 on success and 0.5 on failure. The run is deterministic
// given cfg.seed: each restart derives its own generator from (seed,
// restart index). certified records that the partial-trace and channel
// monotonicity inequalities held at every accepted iterate; see the
// caveat on the result.
template <typename T>
SearchResult<T> search_broadcast(const DensityOperator<T>& rho0, const DensityOperator<T>& rho1,
                                 const SearchConfig<T>& cfg) {
  cfg.validate();
  if (rho0.dim() != rho1.dim()) {
    throw ShapeMismatch("search_broadcast: states must share dimension");
  }
  const Eigen::Index n = rho0.dim();
  const Eigen::Index big = n * n * cfg.ancilla_dim;
  const Eigen::Index param_count = big * big;

  const auto witness = optimal_povm(rho0, rho1);
  const T f_in = fidelity(rho0, rho1);
  const ComplexMatrix<T> eye = ComplexMatrix<T>::Identity(n, n);
  const T cert_tol = T(1e-6);

  struct Eval {
    T objective;
    T quality;
    bool violates;
  };
  auto evaluate = [&](const RealVector<T>& theta) {
    const DilationChannel<T> ch(n, n, cfg.ancilla_dim, unitary_from_params(theta, big));
    const auto joint0 = apply_channel(ch, rho0);
    const auto joint1 = apply_channel(ch, rho1);
    const auto parts0 = marginals(joint0, n, n);
    const auto parts1 = marginals(joint1, n, n);
    const T f0a = fidelity(parts0.on_a, rho0);
    const T f0b = fidelity(parts0.on_b, rho0);
    const T f1a = fidelity(parts1.on_a, rho1);
    const T f1b = fidelity(parts1.on_b, rho1);
    Eval out;
    out.quality = std::min(std::min(f0a, f0b), std::min(f1a, f1b));
    out.objective = cfg.objective == SearchObjective::min_marginal_fidelity
                        ? out.quality
                        : (f0a + f0b + f1a + f1b) / T(4);
    const T f_joint = fidelity(joint0, joint1);
    T f_a(0);
    T f_b(0);
    for (const auto& e : witness.povm.elements()) {
      const ComplexMatrix<T> on_a = tensor(e, eye);
      const ComplexMatrix<T> on_b = tensor(eye, e);
      f_a += std::sqrt(detail::clamped_weight(joint0.matrix(), on_a)) *
             std::sqrt(detail::clamped_weight(joint1.matrix(), on_a));
      f_b += std::sqrt(detail::clamped_weight(joint0.matrix(), on_b)) *
             std::sqrt(detail::clamped_weight(joint1.matrix(), on_b));
    }
    out.violates = f_a < f_joint - cert_tol || f_b < f_joint - cert_tol ||
                   f_joint < f_in - cert_tol;
    return out;
  };

  const RealVector<T> seeded = detail::seeded_start(rho0, rho1, cfg.ancilla_dim);

  bool violated = false;
  long total_iterations = 0;
  std::vector<std::vector<RestartTracePoint<T>>> traces;
  traces.reserve(std::size_t(cfg.restarts));
  RealVector<T> best_theta;
  T best_objective = T(-1);

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<T> gauss;

    RealVector<T> theta =
        restart == 0 ? seeded : params_from_unitary(random_unitary<T>(big, rng));
    Eval current = evaluate(theta);
    violated = violated || current.violates;
    std::vector<RestartTracePoint<T>> trace{{0, current.quality}};

    T step = cfg.step_init;
    for (int iter = 1; iter <= cfg.max_iters && step >= cfg.step_min; ++iter) {
      RealVector<T> direction(param_count);
      for (Eigen::Index i = 0; i < param_count; ++i) direction(i) = gauss(rng);
      direction.normalize();
      const RealVector<T> probe = theta + step * direction;
      const Eval candidate = evaluate(probe);
      ++total_iterations;
      if (candidate.objective > current.objective) {
        theta = probe;
        current = candidate;
        violated = violated || candidate.violates;
        trace.push_back({iter, current.quality});
        step *= T(1.2);
      } else {
        step *= T(0.5);
      }
    }

    traces.push_back(std::move(trace));
    if (current.objective > best_objective) {
      best_objective = current.objective;
      best_theta = theta;
    }
  }

  DilationChannel<T> best(n, n, cfg.ancilla_dim, unitary_from_params(best_theta, big));
  const auto joint0 = apply_channel(best, rho0);
  const auto joint1 = apply_channel(best, rho1);
  const auto chain = verify_chain(BroadcastCandidate<T>(rho0, rho1, joint0, joint1));
  const T quality = broadcast_quality(best, rho0, rho1);
  return SearchResult<T>{
      std::move(best),
      quality,
      std::move(traces),
      chain,
      !violated,
      total_iterations,
      "certified means no accepted iterate violated the partial-trace or channel "
      "monotonicity inequalities; the search exhibits the broadcasting gap but cannot "
      "prove impossibility"};
}

template <typename T = double>
struct SweepRow {
  T theta;
  T commutator_norm;
  T quality;
  bool certified;
  long iters;
};

// Qubit family interpolating from a commuting pair to maximal
// noncommutativity: rho0 = (I + r sigma_z)/2 fixed, rho1 rotated by theta
// toward sigma_x at the same purity r. Each row runs its own search with a
// row-indexed seed so rows are independent yet reproducible.
template <typename T>
std::vector<SweepRow<T>> sweep_noncommutativity(const std::vector<T>& base_angle_grid,
                                                T purity, const SearchConfig<T>& cfg) {
  cfg.validate();
  if (base_angle_grid.empty()) {
    throw InvalidConfig("sweep_noncommutativity: angle grid is empty");
  }
  const T half_pi = std::acos(T(-1)) / T(2);
  for (T angle : base_angle_grid) {
    if (angle < T(0) || angle > half_pi + T(1e-12)) {
      throw InvalidConfig("sweep_noncommutativity: angles must lie in [0, pi/2]");
    }
  }
  if (!(purity > T(0)) || purity > T(1)) {
    throw InvalidConfig("sweep_noncommutativity: purity must lie in (0, 1]");
  }

  std::vector<SweepRow<T>> rows;
  rows.reserve(base_angle_grid.size());
  for (std::size_t i = 0; i < base_angle_grid.size(); ++i) {
    const T angle = base_angle_grid[i];
    ComplexMatrix<T> m0(2, 2);
    m0 << std::complex<T>((T(1) + purity) / 2), std::complex<T>(0), std::complex<T>(0),
        std::complex<T>((T(1) - purity) / 2);
    ComplexMatrix<T> m1(2, 2);
    const T rc = purity * std::cos(angle);
    const T rs = purity * std::sin(angle);
    m1 << std::complex<T>((T(1) + rc) / 2), std::complex<T>(rs / 2),
        std::complex<T>(rs / 2), std::complex<T>((T(1) - rc) / 2);
    const auto rho0 = validate_density(m0);
    const auto rho1 = validate_density(m1);

    SearchConfig<T> row_cfg = cfg;
    row_cfg.seed = cfg.seed + i;
    const auto result = search_broadcast(rho0, rho1, row_cfg);
    rows.push_back(SweepRow<T>{angle, commutator_norm(rho0.matrix(), rho1.matrix()),
                               result.quality, result.certified, result.total_iterations});
  }
  return rows;
}

}  // namespace qcast
