// Copyright 2026 The grwsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRWSIM_DYNAMICS_HPP
#define GRWSIM_DYNAMICS_HPP

// Deterministic evolution: exact Schrödinger propagation (ħ = 1), von Neumann
// measurement couplings, and single-interaction environment decoherence.

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grwsim/hilbert.hpp"

namespace grwsim {

/// Hermitian generator. The spectral decomposition is computed once at
/// construction so every propagator is exactly unitary up to rounding.
class Hamiltonian {
 public:
  Hamiltonian(SpaceSpec space, Matrix matrix) : space_(std::move(space)), h_(std::move(matrix)) {
    if (static_cast<std::size_t>(h_.rows()) != space_.total_dim() || h_.rows() != h_.cols())
      throw std::invalid_argument("Hamiltonian shape does not match space dimension");
    if (!is_hermitian(h_)) throw std::invalid_argument("Hamiltonian is not Hermitian");
    zero_ = max_abs(h_) == 0.0;
    if (!zero_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h_ + h_.adjoint()));
      spec_ = std::make_shared<const Spectrum>(Spectrum{es.eigenvalues(), es.eigenvectors()});
    }
  }

  static Hamiltonian zero(const SpaceSpec& space) {
    const auto d = static_cast<Eigen::Index>(space.total_dim());
    return Hamiltonian(space, Matrix::Zero(d, d));
  }

  const SpaceSpec& space() const { return space_; }
  const Matrix& matrix() const { return h_; }
  bool is_zero() const { return zero_; }

  /// exp(−i·H·dt).
  Matrix propagator(double dt) const {
    const auto d = static_cast<Eigen::Index>(space_.total_dim());
    if (zero_ || dt == 0.0) return Matrix::Identity(d, d);
    return spec_->vectors * phases(dt).asDiagonal() * spec_->vectors.adjoint();
  }

  /// exp(−i·H·dt)·v in O(d²).
  Vector evolve(const Vector& v, double dt) const {
    if (zero_ || dt == 0.0) return v;
    Vector c = spec_->vectors.adjoint() * v;
    c = c.cwiseProduct(phases(dt));
    return spec_->vectors * c;
  }

 private:
  struct Spectrum {
    RealVector values;
    Matrix vectors;
  };

  Vector phases(double dt) const {
    Vector ph(spec_->values.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(-kI * (spec_->values(k) * dt));
    return ph;
  }

  SpaceSpec space_;
  Matrix h_;
  bool zero_ = true;
  std::shared_ptr<const Spectrum> spec_;
};

inline StateVector schrodinger_step(const StateVector& state, const Hamiltonian& h, double dt) {
  if (!std::isfinite(dt)) throw std::invalid_argument("schrodinger_step: dt is not finite");
  if (!(state.space() == h.space())) throw std::invalid_argument("schrodinger_step: space mismatch");
  return StateVector(state.space(), h.evolve(state.amplitudes(), dt));
}

/// Evolves only the subsystems the Hamiltonian acts on.
inline StateVector evolve_local(const StateVector& state, const Hamiltonian& h, double dt) {
  if (state.space() == h.space()) return schrodinger_step(state, h, dt);
  if (h.is_zero()) return state;
  return StateVector(state.space(), apply_local(h.propagator(dt), h.space(), state.space(), state.amplitudes()));
}

namespace detail {
/// Permutation matrix exchanging basis states a and b.
inline Matrix swap_matrix(std::size_t dim, std::size_t a, std::size_t b) {
  Matrix s = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  if (a != b) {
    s(a, a) = s(b, b) = 0.0;
    s(a, b) = s(b, a) = 1.0;
  }
  return s;
}
}  // namespace detail

/// Index of the pointer ready state.
inline constexpr std::size_t kReadyIndex = 0;

/// Von Neumann coupling between `system_obs` and a pointer subsystem appended
/// after the system's subsystems:
///
///   H = strength · Σ_k P_k ⊗ (π/2)(1 − S_k),
///
/// where P_k is the k-th eigenprojector (ascending eigenvalues) and S_k swaps
/// the pointer's ready state with `targets[k]`. Evolving for unit time at
/// unit strength maps Σ μ_k |s_k⟩|ready⟩ to Σ μ_k |s_k⟩|targets[k]⟩. With no
/// targets given, eigenvalue k is recorded at pointer index k.
inline Hamiltonian measurement_coupling(const Observable& system_obs, const Subsystem& pointer, double strength,
                                        std::optional<std::vector<std::size_t>> targets = std::nullopt) {
  const auto& es = system_obs.eigensystem();
  const std::size_t n = es.values.size();
  if (pointer.dim < n) throw std::invalid_argument("measurement_coupling: pointer has fewer states than outcomes");
  std::vector<std::size_t> t = targets.value_or(std::vector<std::size_t>{});
  if (!targets) {
    for (std::size_t k = 0; k < n; ++k) t.push_back(k);
  }
  if (t.size() != n) throw std::invalid_argument("measurement_coupling: need one pointer target per eigenvalue");
  for (std::size_t a = 0; a < n; ++a) {
    if (t[a] >= pointer.dim) throw std::invalid_argument("measurement_coupling: pointer target out of range");
    for (std::size_t b = a + 1; b < n; ++b)
      if (t[a] == t[b]) throw std::invalid_argument("measurement_coupling: pointer targets must be distinct");
  }
  const SpaceSpec space = system_obs.space().concat(SpaceSpec({pointer}));
  const auto pd = static_cast<Eigen::Index>(pointer.dim);
  const auto d = static_cast<Eigen::Index>(space.total_dim());
  Matrix h = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < n; ++k) {
    if (t[k] == kReadyIndex) continue;
    const Matrix gen = (std::numbers::pi / 2.0) * (Matrix::Identity(pd, pd) - detail::swap_matrix(pointer.dim, kReadyIndex, t[k]));
    h += kron(es.projectors[k], gen);
  }
  return Hamiltonian(space, strength * h);
}

/// Preferred-basis environment coupling. `overlap` is ⟨e_j|e_k⟩ for the
/// environment records of distinct pointer eigenvalues: 0 is perfect
/// (orthogonal records), 1 leaves no which-path information.
struct DecoherenceSpec {
  Observable pointer_obs;
  std::string env_label;
  double overlap = 0.0;

  static DecoherenceSpec perfect(Observable obs, std::string env) { return {std::move(obs), std::move(env), 0.0}; }
  static DecoherenceSpec partial(Observable obs, std::string env, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("decoherence overlap must lie in [0, 1]");
    return {std::move(obs), std::move(env), eps};
  }
};

namespace detail {
/// Unitary W with W|0⟩ = e (Householder reflection times a phase).
inline Matrix unitary_from_ready(const Vector& e) {
  const auto d = e.size();
  const cplx e0 = e(0);
  const cplx phase = std::abs(e0) > 0.0 ? e0 / std::abs(e0) : cplx(1.0);
  Vector u = -e / phase;
  u(0) += 1.0;
  const double un2 = u.squaredNorm();
  Matrix w = Matrix::Identity(d, d);
  if (un2 > 1e-30) w -= (2.0 / un2) * u * u.adjoint();
  return phase * w;
}
}  // namespace detail

/// Environment records e_k with Gram matrix ε·J + (1−ε)·1; e_0 is the ready
/// state. Returned as columns.
inline Matrix decoherence_records(std::size_t n_outcomes, std::size_t env_dim, double eps) {
  const auto n = static_cast<Eigen::Index>(n_outcomes);
  Matrix records = Matrix::Zero(static_cast<Eigen::Index>(env_dim), n);
  if (eps >= 1.0) {
    records.row(0).setOnes();
    return records;
  }
  Matrix gram = Matrix::Constant(n, n, cplx(eps)) + Matrix::Identity(n, n) * (1.0 - eps);
  const Matrix l = gram.llt().matrixL();
  // Row k of L holds the coordinates of e_k.
  records.topRows(n) = l.transpose();
  return records;
}

/// Entangles the environment subsystem with the eigenspaces of
/// `spec.pointer_obs`. The global state stays pure.
inline StateVector decohere(const StateVector& state, const DecoherenceSpec& spec) {
  const SpaceSpec& space = state.space();
  const std::size_t env_dim = space.dim(spec.env_label);
  if (spec.pointer_obs.space().contains(spec.env_label))
    throw std::invalid_argument("decohere: pointer observable acts on the environment");
  const auto& es = spec.pointer_obs.eigensystem();
  const std::size_t n = es.values.size();
  if (env_dim < n) throw std::invalid_argument("decohere: environment smaller than number of pointer outcomes");
  const DensityOperator env = reduced_state(state, {spec.env_label});
  if (env.matrix()(kReadyIndex, kReadyIndex).real() < 1.0 - tol::spectral)
    throw std::invalid_argument("decohere: environment is not in its ready state");

  const Matrix records = decoherence_records(n, env_dim, spec.overlap);
  const SpaceSpec op_space = spec.pointer_obs.space().concat(SpaceSpec({{spec.env_label, env_dim}}));
  const auto d = static_cast<Eigen::Index>(op_space.total_dim());
  Matrix u = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < n; ++k)
    u += kron(es.projectors[k], detail::unitary_from_ready(records.col(static_cast<Eigen::Index>(k))));
  return StateVector(space, apply_local(u, op_space, space, state.amplitudes()));
}

}  // namespace grwsim

#endif  // GRWSIM_DYNAMICS_HPP
