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

#ifndef GRWSIM_CHANNELS_HPP
#define GRWSIM_CHANNELS_HPP

// Kraus-form channels and their Stinespring isometries.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grwsim/hilbert.hpp"

namespace grwsim {

class Channel {
 public:
  Channel(SpaceSpec space, std::vector<Matrix> kraus) : space_(std::move(space)), kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
    const auto d = static_cast<Eigen::Index>(space_.total_dim());
    for (const auto& k : kraus_)
      if (k.rows() != d || k.cols() != d) throw std::invalid_argument("Kraus operator shape does not match space");
    if (completeness_error() > tol::spectral) throw std::invalid_argument("Kraus operators are not complete (Σ K†K ≠ 1)");
  }

  static Channel identity(const SpaceSpec& space) {
    const auto d = static_cast<Eigen::Index>(space.total_dim());
    return Channel(space, {Matrix::Identity(d, d)});
  }

  /// Unitary channel ρ ↦ UρU†.
  static Channel unitary(const SpaceSpec& space, const Matrix& u) { return Channel(space, {u}); }

  /// Non-selective projective measurement ρ ↦ Σ P_k ρ P_k.
  static Channel dephasing(const Observable& obs) { return Channel(obs.space(), obs.eigensystem().projectors); }

  const SpaceSpec& space() const { return space_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  std::size_t dim() const { return space_.total_dim(); }

  double completeness_error() const {
    const auto d = static_cast<Eigen::Index>(space_.total_dim());
    Matrix s = Matrix::Zero(d, d);
    for (const auto& k : kraus_) s += k.adjoint() * k;
    return max_abs(s - Matrix::Identity(d, d));
  }

 private:
  SpaceSpec space_;
  std::vector<Matrix> kraus_;
};

inline Matrix apply_channel(const Channel& ch, const Matrix& rho) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus()) out.noalias() += k * rho * k.adjoint();
  return out;
}

inline DensityOperator apply_channel(const Channel& ch, const DensityOperator& rho) {
  if (!(ch.space() == rho.space())) throw std::invalid_argument("apply_channel: space mismatch");
  return DensityOperator::trusted(rho.space(), apply_channel(ch, rho.matrix()));
}

/// Lifts a channel on some subsystems to `full` (identity elsewhere).
inline Channel embed(const Channel& ch, const SpaceSpec& full) {
  if (ch.space() == full) return ch;
  std::vector<Matrix> ks;
  for (const auto& k : ch.kraus()) ks.push_back(embed_operator(k, ch.space(), full));
  return Channel(full, std::move(ks));
}

/// Sequential composition: `first`, then `second`.
inline Channel compose(const Channel& first, const Channel& second) {
  if (!(first.space() == second.space())) throw std::invalid_argument("compose: space mismatch");
  std::vector<Matrix> ks;
  for (const auto& b : second.kraus())
    for (const auto& a : first.kraus()) ks.push_back(b * a);
  return Channel(first.space(), std::move(ks));
}

/// Equivalent Kraus set of minimal size (at most d²), from the Choi matrix.
inline Channel minimal_kraus(const Channel& ch) {
  const auto d = static_cast<Eigen::Index>(ch.dim());
  // Choi vector of K: vec(K) with row-major input index pairing.
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (const auto& k : ch.kraus()) {
    const Eigen::Map<const Vector> v(k.data(), d * d);
    choi.noalias() += v * v.adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (choi + choi.adjoint()));
  const double cutoff = 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
  std::vector<Matrix> ks;
  for (Eigen::Index j = d * d; j-- > 0;) {
    const double lam = es.eigenvalues()(j);
    if (lam <= cutoff) break;
    const Vector v = std::sqrt(lam) * es.eigenvectors().col(j);
    ks.push_back(Eigen::Map<const Matrix>(v.data(), d, d));
  }
  return Channel(ch.space(), std::move(ks));
}

// ---------------------------------------------------------------------------
// Stinespring dilation

/// Isometry V : H → H ⊗ E with V|ψ⟩ = Σ_i K_i|ψ⟩ ⊗ |i⟩. Output indices are
/// system-major: row s·env_dim + i.
struct Dilation {
  SpaceSpec space;
  Matrix isometry;
  std::size_t env_dim = 1;
  std::size_t env_ready_index = 0;
};

inline Dilation stinespring_dilate(const Channel& ch) {
  if (ch.completeness_error() > tol::spectral) throw std::invalid_argument("stinespring_dilate: channel is not complete");
  const auto d = static_cast<Eigen::Index>(ch.dim());
  const auto e = static_cast<Eigen::Index>(ch.kraus().size());
  Matrix v = Matrix::Zero(d * e, d);
  for (Eigen::Index i = 0; i < e; ++i) {
    const Matrix& k = ch.kraus()[static_cast<std::size_t>(i)];
    for (Eigen::Index s = 0; s < d; ++s) v.row(s * e + i) = k.row(s);
  }
  if (!is_isometry(v)) throw std::logic_error("stinespring_dilate: constructed map is not an isometry");
  return {ch.space(), std::move(v), static_cast<std::size_t>(e), 0};
}

/// Tr_E[V ρ V†].
inline Matrix reduced_dilated(const Dilation& dil, const Matrix& rho) {
  const auto d = static_cast<Eigen::Index>(dil.space.total_dim());
  const auto e = static_cast<Eigen::Index>(dil.env_dim);
  const Matrix big = dil.isometry * rho * dil.isometry.adjoint();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s)
    for (Eigen::Index t = 0; t < d; ++t)
      for (Eigen::Index i = 0; i < e; ++i) out(s, t) += big(s * e + i, t * e + i);
  return out;
}

/// max over test states of ½‖Tr_E[VρV†] − Σ KρK†‖₁.
inline double verify_dilation(const Channel& ch, const Dilation& dil, std::span<const DensityOperator> test_states) {
  double worst = 0.0;
  for (const auto& rho : test_states) {
    if (!(rho.space() == ch.space())) throw std::invalid_argument("verify_dilation: test state space mismatch");
    worst = std::max(worst, trace_distance(reduced_dilated(dil, rho.matrix()), apply_channel(ch, rho.matrix())));
  }
  return worst;
}

/// Applies the dilation `steps` times to a pure system state, adding a fresh
/// environment factor each time. Environment labels are "<prefix>1" ...
/// "<prefix>n"; the newest factor sits directly after the system.
inline StateVector iterate_dilation(const Dilation& dil, const StateVector& psi, std::size_t steps,
                                    const std::string& env_prefix = "anc") {
  if (!(psi.space() == dil.space)) throw std::invalid_argument("iterate_dilation: space mismatch");
  const auto d = static_cast<Eigen::Index>(dil.space.total_dim());
  Vector amps = psi.amplitudes();
  std::vector<Subsystem> envs;
  for (std::size_t n = 1; n <= steps; ++n) {
    const Eigen::Index rest = amps.size() / d;
    // System is the slowest index: amps reshaped as (rest × d) in column-major
    // storage has column s = system index.
    const Eigen::Map<const Matrix> m(amps.data(), rest, d);
    const Matrix out = m * dil.isometry.transpose();  // rest × (d·e)
    amps = Eigen::Map<const Vector>(out.data(), out.size());
    envs.insert(envs.begin(), Subsystem{env_prefix + std::to_string(n), dil.env_dim});
  }
  std::vector<Subsystem> subs = dil.space.subsystems();
  subs.insert(subs.end(), envs.begin(), envs.end());
  return StateVector(SpaceSpec(std::move(subs)), std::move(amps));
}

}  // namespace grwsim

#endif  // GRWSIM_CHANNELS_HPP
