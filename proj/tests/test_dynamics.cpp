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


#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "grwsim/dynamics.hpp"
#include "grwsim/random.hpp"
#include "oracles.hpp"

namespace grwsim {
namespace {

Matrix pauli(char which) {
  Matrix m = Matrix::Zero(2, 2);
  if (which == 'x') m(0, 1) = m(1, 0) = 1.0;
  if (which == 'z') {
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
  }
  return m;
}

Vector vec2(cplx a, cplx b) {
  Vector v(2);
  v << a, b;
  return v;
}

TEST(SchrodingerStep, ZeroHamiltonianIsIdentity) {
  Rng rng(1);
  const SpaceSpec s = make_space({{"x", 4}});
  const StateVector psi = random_state(s, rng);
  const StateVector out = schrodinger_step(psi, Hamiltonian::zero(s), 3.7);
  EXPECT_LT((out.amplitudes() - psi.amplitudes()).norm(), 1e-15);
}

TEST(SchrodingerStep, RabiFlip) {
  const SpaceSpec s = make_space({{"q", 2}});
  const StateVector out = schrodinger_step(StateVector::basis(s, 0), Hamiltonian(s, pauli('x')), std::numbers::pi / 2);
  EXPECT_NEAR(fidelity(out, StateVector::basis(s, 1)), 1.0, 1e-12);
}

TEST(SchrodingerStep, MatchesSeriesPropagator) {
  Rng rng(2);
  const SpaceSpec s = make_space({{"x", 5}});
  for (int k = 0; k < 20; ++k) {
    const Matrix h = random_hermitian(5, rng);
    const StateVector psi = random_state(s, rng);
    const double dt = 0.1 + 0.3 * k;
    const Vector expected = oracle::expm_minus_i(h, dt) * psi.amplitudes();
    EXPECT_LT((schrodinger_step(psi, Hamiltonian(s, h), dt).amplitudes() - expected).norm(), 1e-10);
  }
}

TEST(SchrodingerStep, EnergyConservedAndUnitary) {
  Rng rng(3);
  const SpaceSpec s = make_space({{"a", 2}, {"b", 3}});
  const Hamiltonian h(s, random_hermitian(6, rng));
  StateVector psi = random_state(s, rng);
  const double e0 = expectation(psi, h.matrix());
  for (int k = 0; k < 50; ++k) {
    psi = schrodinger_step(psi, h, 0.37);
    EXPECT_NEAR(expectation(psi, h.matrix()), e0, 1e-9);
    EXPECT_NEAR(psi.amplitudes().norm(), 1.0, 1e-10);
  }
  const Matrix u = h.propagator(1.3);
  EXPECT_LE(max_abs(u.adjoint() * u - Matrix::Identity(6, 6)), 1e-10);
}

TEST(SchrodingerStep, Errors) {
  const SpaceSpec s = make_space({{"q", 2}}), t = make_space({{"r", 2}});
  EXPECT_THROW(schrodinger_step(StateVector::basis(s, 0), Hamiltonian(t, pauli('x')), 1.0), std::invalid_argument);
  EXPECT_THROW(schrodinger_step(StateVector::basis(s, 0), Hamiltonian(s, pauli('x')), std::nan("")), std::invalid_argument);
  Matrix nh = Matrix::Zero(2, 2);
  nh(0, 1) = 1.0;
  EXPECT_THROW(Hamiltonian(s, nh), std::invalid_argument);
}

TEST(EvolveLocal, ActsOnSubsystemOnly) {
  Rng rng(4);
  const SpaceSpec ab = make_space({{"a", 2}, {"b", 3}});
  const SpaceSpec b = make_space({{"b", 3}});
  const Matrix h = random_hermitian(3, rng);
  const StateVector psi = random_state(ab, rng);
  const Vector expected = oracle::kron(Matrix::Identity(2, 2), oracle::expm_minus_i(h, 0.8)) * psi.amplitudes();
  EXPECT_LT((evolve_local(psi, Hamiltonian(b, h), 0.8).amplitudes() - expected).norm(), 1e-10);
}

struct CouplingFixture : ::testing::Test {
  SpaceSpec p = make_space({{"P", 2}});
  Observable sz{p, pauli('z')};
  Subsystem pointer{"A", 8};
  std::size_t up = 2, down = 6;
  // eigenvalue order is ascending: −1 (−z, index 1) then +1 (+z, index 0)
  Hamiltonian h = measurement_coupling(sz, pointer, 1.0, std::vector<std::size_t>{down, up});
};

TEST_F(CouplingFixture, ProducesCorrelatedBranches) {
  const cplx alpha(0.6), beta(0.0, 0.8);
  const StateVector psi0 = tensor(StateVector(p, vec2(alpha, beta)), StateVector::basis(make_space({{"A", 8}}), 0));
  const StateVector psi1 = schrodinger_step(psi0, h, 1.0);
  Vector expected = Vector::Zero(16);
  expected(up) = alpha;
  expected(8 + down) = beta;
  EXPECT_NEAR(fidelity(psi1, StateVector(psi1.space(), expected)), 1.0, 1e-10);
  // pointer states orthogonal
  const Matrix ra = reduced_state(psi1, {"A"}).matrix();
  EXPECT_LT(std::abs(ra(up, down)), 1e-12);
}

TEST_F(CouplingFixture, EigenstateInputStaysSingleBranch) {
  const StateVector in = StateVector::basis(h.space(), 0);  // |+z⟩|ready⟩
  const StateVector out = schrodinger_step(in, h, 1.0);
  EXPECT_NEAR(std::norm(out.amplitudes()(up)), 1.0, 1e-10);
}

TEST_F(CouplingFixture, ZeroStrengthKeepsProduct) {
  const Hamiltonian h0 = measurement_coupling(sz, pointer, 0.0, std::vector<std::size_t>{down, up});
  const Vector spin = vec2(0.6, 0.8);
  const StateVector in = tensor(StateVector(p, spin), StateVector::basis(make_space({{"A", 8}}), 0));
  const StateVector out = schrodinger_step(in, h0, 1.0);
  EXPECT_LT((out.amplitudes() - in.amplitudes()).norm(), 1e-14);
  EXPECT_NEAR(reduced_state(out, {"P"}).purity(), 1.0, 1e-12);
}

TEST_F(CouplingFixture, PreservesBornStatistics) {
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const StateVector spin = random_state(p, rng);
    const StateVector in = tensor(spin, StateVector::basis(make_space({{"A", 8}}), 0));
    const double t = 0.05 + 0.05 * k;
    const StateVector out = schrodinger_step(in, h, t);
    const auto before = local_born_probabilities(in, sz);
    const auto after = local_born_probabilities(out, sz);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(before[i].probability, after[i].probability, 1e-10);
  }
}

TEST_F(CouplingFixture, Errors) {
  EXPECT_THROW(measurement_coupling(sz, Subsystem{"A", 1}, 1.0), std::invalid_argument);
  EXPECT_THROW(measurement_coupling(sz, pointer, 1.0, std::vector<std::size_t>{1}), std::invalid_argument);
  EXPECT_THROW(measurement_coupling(sz, pointer, 1.0, std::vector<std::size_t>{3, 3}), std::invalid_argument);
  EXPECT_THROW(measurement_coupling(sz, pointer, 1.0, std::vector<std::size_t>{3, 8}), std::invalid_argument);
}

TEST(Coupling, DefaultTargetsAndDegenerateObservable) {
  const SpaceSpec s = make_space({{"s", 3}});
  Matrix o = Matrix::Zero(3, 3);
  o(0, 0) = 1.0;
  o(1, 1) = 1.0;
  o(2, 2) = -2.0;
  const Hamiltonian h = measurement_coupling(Observable(s, o), Subsystem{"ptr", 2}, 1.0);
  EXPECT_EQ(h.space().total_dim(), 6u);
  // eigenvalue −2 → pointer 0 (ready), eigenvalue 1 → pointer 1
  const StateVector out = schrodinger_step(StateVector::basis(h.space(), 1 * 2 + 0), h, 1.0);
  EXPECT_NEAR(std::norm(out.amplitudes()(1 * 2 + 1)), 1.0, 1e-10);
}

struct DecoherenceFixture : ::testing::Test {
  double alpha = 0.6, beta = 0.8;
  SpaceSpec a = make_space({{"A", 4}});
  Observable mem = [this] {
    Matrix m = Matrix::Zero(4, 4);
    m(1, 1) = 1.0;
    m(3, 3) = -1.0;
    return Observable(a, m);
  }();
  StateVector correlated() const {
    Vector v = Vector::Zero(2 * 4 * 3);
    v(oracle::undigits({0, 1, 0}, {2, 4, 3})) = alpha;
    v(oracle::undigits({1, 3, 0}, {2, 4, 3})) = beta;
    return StateVector(make_space({{"P", 2}, {"A", 4}, {"E", 3}}), v);
  }
};

TEST_F(DecoherenceFixture, PerfectGivesDiagonalMixture) {
  const StateVector out = decohere(correlated(), DecoherenceSpec::perfect(mem, "E"));
  const Matrix r = reduced_state(out, {"P", "A"}).matrix();
  EXPECT_NEAR(r(1, 1).real(), alpha * alpha, 1e-10);
  EXPECT_NEAR(r(4 + 3, 4 + 3).real(), beta * beta, 1e-10);
  Matrix off = r;
  off.diagonal().setZero();
  EXPECT_LT(max_abs(off), 1e-10);
  EXPECT_NEAR(out.amplitudes().norm(), 1.0, 1e-10);
}

TEST_F(DecoherenceFixture, PartialScalesCoherenceByOverlap) {
  for (double eps : {0.0, 0.25, 0.5, 0.9}) {
    const StateVector out = decohere(correlated(), DecoherenceSpec::partial(mem, "E", eps));
    const Matrix r = reduced_state(out, {"P", "A"}).matrix();
    EXPECT_NEAR(std::abs(r(1, 4 + 3)), eps * alpha * beta, 1e-10) << "eps " << eps;
    EXPECT_NEAR(r(1, 1).real(), alpha * alpha, 1e-10);
  }
}

TEST_F(DecoherenceFixture, FullOverlapLeavesSystemUntouched) {
  const StateVector in = correlated();
  const StateVector out = decohere(in, DecoherenceSpec::partial(mem, "E", 1.0));
  EXPECT_LT(max_abs(reduced_state(out, {"P", "A"}).matrix() - reduced_state(in, {"P", "A"}).matrix()), 1e-10);
  EXPECT_NEAR(reduced_state(out, {"P", "A"}).purity(), 1.0, 1e-10);
}

TEST_F(DecoherenceFixture, ZeroOverlapEqualsPerfect) {
  const StateVector x = decohere(correlated(), DecoherenceSpec::perfect(mem, "E"));
  const StateVector y = decohere(correlated(), DecoherenceSpec::partial(mem, "E", 0.0));
  EXPECT_LT(max_abs(reduced_state(x, {"P", "A"}).matrix() - reduced_state(y, {"P", "A"}).matrix()), 1e-12);
}

TEST_F(DecoherenceFixture, Errors) {
  Vector v = correlated().amplitudes();
  // env not ready: move everything to env index 1
  Vector shifted = Vector::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); i += 3) shifted(i + 1) = v(i);
  const StateVector not_ready(correlated().space(), shifted);
  EXPECT_THROW(decohere(not_ready, DecoherenceSpec::perfect(mem, "E")), std::invalid_argument);
  const StateVector small_env(make_space({{"A", 4}, {"E", 2}}), Vector::Unit(8, 0));
  EXPECT_THROW(decohere(small_env, DecoherenceSpec::perfect(mem, "E")), std::invalid_argument);
  EXPECT_THROW(DecoherenceSpec::partial(mem, "E", 1.5), std::invalid_argument);
}

TEST(Decoherence, PropertyDiagonalPreservedRandomStates) {
  Rng rng(6);
  const SpaceSpec sa = make_space({{"S", 3}});
  for (int k = 0; k < 50; ++k) {
    const Observable obs(sa, random_hermitian(3, rng));
    const StateVector sys = random_state(sa, rng);
    const StateVector in = tensor(sys, StateVector::basis(make_space({{"E", 4}}), 0));
    const double eps = 0.1 * (k % 10);
    const StateVector out = decohere(in, DecoherenceSpec::partial(obs, "E", eps));
    // pointer-basis diagonal unchanged
    const Matrix before = reduced_state(in, {"S"}).matrix(), after = reduced_state(out, {"S"}).matrix();
    for (const auto& p : obs.eigensystem().projectors)
      EXPECT_NEAR((p * after).trace().real(), (p * before).trace().real(), 1e-10);
    EXPECT_NEAR(out.amplitudes().norm(), 1.0, 1e-10);
  }
}

}  // namespace
}  // namespace grwsim
