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

#ifndef GRWSIM_RANDOM_HPP
#define GRWSIM_RANDOM_HPP

// Haar-ish random states, Ginibre density operators and random channels for
// property sweeps.

#include <vector>

#include "grwsim/channels.hpp"
#include "grwsim/hilbert.hpp"
#include "grwsim/rng.hpp"

namespace grwsim {

inline Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = cplx(rng.normal(), rng.normal());
  return g;
}

/// Unit vector drawn from the unitarily invariant measure.
inline StateVector random_state(const SpaceSpec& space, Rng& rng) {
  return StateVector(space, ginibre(static_cast<Eigen::Index>(space.total_dim()), 1, rng).col(0));
}

/// Induced-measure mixed state; rank ≤ `rank` (full rank when 0).
inline DensityOperator random_density(const SpaceSpec& space, Rng& rng, std::size_t rank = 0) {
  const auto d = static_cast<Eigen::Index>(space.total_dim());
  const Eigen::Index k = rank == 0 ? d : static_cast<Eigen::Index>(rank);
  const Matrix g = ginibre(d, k, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityOperator(space, 0.5 * (rho + rho.adjoint()));
}

/// Isometry with `cols` orthonormal columns in dimension `rows`.
inline Matrix random_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const Matrix g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

inline Matrix random_unitary(Eigen::Index d, Rng& rng) { return random_isometry(d, d, rng); }

/// Channel with `n_kraus` operators sliced from a random isometry d → d·n.
inline Channel random_channel(const SpaceSpec& space, std::size_t n_kraus, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(space.total_dim());
  const auto n = static_cast<Eigen::Index>(n_kraus);
  const Matrix v = random_isometry(d * n, d, rng);
  std::vector<Matrix> ks;
  for (Eigen::Index i = 0; i < n; ++i) ks.push_back(v.middleRows(i * d, d));
  return Channel(space, std::move(ks));
}

/// Random Hermitian matrix (GUE-like).
inline Matrix random_hermitian(Eigen::Index d, Rng& rng) {
  const Matrix g = ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

}  // namespace grwsim

#endif  // GRWSIM_RANDOM_HPP
