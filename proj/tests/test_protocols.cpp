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
#include <vector>

#include <gtest/gtest.h>

#include "grwsim/experiments.hpp"
#include "grwsim/protocols.hpp"
#include "grwsim/random.hpp"
#include "oracles.hpp"

namespace grwsim {
namespace {

const SpaceSpec kQubit({{"q", 2}});

DensityOperator ket_density(const SpaceSpec& s, Vector v) { return DensityOperator::pure(StateVector(s, std::move(v))); }

Vector vec2(cplx a, cplx b) {
  Vector v(2);
  v << a, b;
  return v;
}

GrwParams commitment_params(double particles, std::size_t sites = 16) {
  GrwParams p;
  p.delta = 1.0;
  p.tau = 1.0;
  p.lattices["bob"] = Lattice{sites, 1.0};
  p.particle_counts["bob"] = particles;
  return p;
}

TEST(NoSignaling, BellStateWithLocalUnitariesAndMeasurement) {
  const SpaceSpec s({{"alice", 2}, {"bob", 2}});
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = std::sqrt(0.5);
  const DensityOperator joint = DensityOperator::pure(StateVector(s, bell));
  Rng rng(1);
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const SpaceSpec a({{"alice", 2}});
  const std::vector<Channel> ops{Channel::unitary(a, random_unitary(2, rng)), Channel::dephasing(Observable(a, z)),
                                 random_channel(a, 4, rng)};
  const ProtocolReport r = check_no_signaling(joint, ops, {"bob"});
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_LE(r.metrics.at("max_bob_trace_distance"), 1e-12);
  EXPECT_EQ(r.metrics.at("channels"), 3.0);
  EXPECT_EQ(r.transcript.size(), 3u);
}

TEST(NoSignaling, ProductState) {
  const SpaceSpec s({{"alice", 3}, {"bob", 2}});
  Rng rng(2);
  const Matrix ra = random_density(SpaceSpec({{"alice", 3}}), rng).matrix();
  const Matrix rb = random_density(SpaceSpec({{"bob", 2}}), rng).matrix();
  const DensityOperator joint(s, oracle::kron(ra, rb));
  const ProtocolReport r = check_no_signaling(joint, {random_channel(SpaceSpec({{"alice", 3}}), 2, rng)}, {"bob"});
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(NoSignaling, RejectsOperationThatTouchesBob) {
  const SpaceSpec s({{"alice", 2}, {"bob", 2}});
  const DensityOperator joint = DensityOperator::pure(StateVector::basis(s, 2));
  EXPECT_THROW(check_no_signaling(joint, {Channel::identity(s)}, {"bob"}), std::invalid_argument);
  EXPECT_THROW(check_no_signaling(joint, {Channel::identity(SpaceSpec({{"bob", 2}}))}, {"bob"}), std::invalid_argument);
}

TEST(NoSignaling, RandomSweep) {
  const ProtocolReport r = random_no_signaling_sweep(100, 77);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_LE(r.metrics.at("max_bob_trace_distance"), 1e-12);
}

TEST(NoSignaling, GrwOnAliceSide) {
  const SpaceSpec s({{"alice", 8}, {"bob", 2}});
  Rng rng(3);
  const StateVector joint = random_state(s, rng);
  const SpaceSpec a({{"alice", 8}});
  const Hamiltonian h(a, random_hermitian(8, rng));
  GrwParams p;
  p.delta = 1.0;
  p.tau = 1.0;
  p.lattices["alice"] = Lattice{8, 1.0};
  p.particle_counts["alice"] = 2.0;
  const ProtocolReport r = check_no_signaling_grw(joint, {"bob"}, h, p, 1.0, 4000, 5);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_GT(r.metrics.at("mean_jumps"), 1.5);
  p.lattices["bob"] = Lattice{2, 1.0};
  p.particle_counts["bob"] = 1.0;
  EXPECT_THROW(check_no_signaling_grw(joint, {"bob"}, h, p, 1.0, 10, 5), std::invalid_argument);
}

TEST(Cloning, OrthogonalPairSucceeds) {
  const ProtocolReport r = attempt_cloning(StateVector::basis(kQubit, 0), StateVector::basis(kQubit, 1));
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_NEAR(r.metrics.at("fidelity_psi"), 1.0, 1e-12);
  EXPECT_NEAR(r.metrics.at("fidelity_phi"), 1.0, 1e-12);
  EXPECT_LE(r.metrics.at("isometry_error"), 1e-12);
}

TEST(Cloning, RandomOrthogonalPairInThreeDimensions) {
  const SpaceSpec s({{"q", 3}});
  Rng rng(4);
  const Matrix u = random_unitary(3, rng);
  const ProtocolReport r = attempt_cloning(StateVector(s, u.col(0)), StateVector(s, u.col(2)));
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_NEAR(r.metrics.at("fidelity_phi"), 1.0, 1e-10);
}

TEST(Cloning, SameRaySucceeds) {
  const StateVector psi(kQubit, vec2(0.6, cplx(0.0, 0.8)));
  const StateVector phase(kQubit, cplx(0.0, 1.0) * psi.amplitudes());
  const ProtocolReport r = attempt_cloning(psi, phase);
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(Cloning, OverlappingPairIsImpossible) {
  const ProtocolReport r = attempt_cloning(StateVector::basis(kQubit, 0), StateVector(kQubit, vec2(1.0, 1.0)));
  EXPECT_EQ(r.verdict, Verdict::impossible);
  const double s = std::sqrt(0.5);
  EXPECT_NEAR(r.metrics.at("overlap"), s, 1e-12);
  EXPECT_NEAR(r.metrics.at("residual"), s - 0.5, 1e-12);
  EXPECT_NEAR(r.metrics.at("residual"), 0.2071, 1e-4);
}

TEST(Cloning, ComplexOverlapResidual) {
  Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const StateVector a = random_state(kQubit, rng), b = random_state(kQubit, rng);
    const cplx s = a.amplitudes().dot(b.amplitudes());
    const ProtocolReport r = attempt_cloning(a, b);
    ASSERT_EQ(r.verdict, Verdict::impossible);
    EXPECT_NEAR(r.metrics.at("residual"), std::abs(s) * std::abs(1.0 - s), 1e-12);
  }
}

Ensemble z_ensemble() {
  return {{{0.5, ket_density(kQubit, vec2(1.0, 0.0))}, {0.5, ket_density(kQubit, vec2(0.0, 1.0))}}};
}
Ensemble x_ensemble() {
  return {{{0.5, ket_density(kQubit, vec2(1.0, 1.0))}, {0.5, ket_density(kQubit, vec2(1.0, -1.0))}}};
}

TEST(Steering, BothQubitEnsemblesFromOneMarginal) {
  const DensityOperator mixed(kQubit, 0.5 * Matrix::Identity(2, 2));
  for (const Ensemble& e : {z_ensemble(), x_ensemble()}) {
    const SteeringResult r = steer(mixed, e);
    EXPECT_EQ(r.report.verdict, Verdict::pass);
    EXPECT_LE(r.report.metrics.at("max_probability_error"), 1e-10);
    EXPECT_LE(r.report.metrics.at("max_conditional_trace_distance"), 1e-10);
    EXPECT_LE(r.report.metrics.at("marginal_error"), 1e-10);
  }
}

TEST(Steering, ConditionalStatesCheckedIndependently) {
  const DensityOperator mixed(kQubit, 0.5 * Matrix::Identity(2, 2));
  const Ensemble e = x_ensemble();
  const SteeringResult r = steer(mixed, e);
  const auto& eig = r.alice_measurement.eigensystem();
  const SpaceSpec& js = r.purification.space();
  const std::size_t da = js.dim("alice");
  const Matrix big = outer(r.purification.amplitudes(), r.purification.amplitudes());
  for (std::size_t i = 0; i < e.members.size(); ++i) {
    const Matrix proj = oracle::kron(eig.projectors[i], Matrix::Identity(2, 2));
    const Matrix post = proj * big * proj;
    const double p = post.trace().real();
    EXPECT_NEAR(p, 0.5, 1e-10);
    const Matrix bob = oracle::partial_trace(post / p, {da, 2}, {false, true});
    EXPECT_LT(oracle::trace_distance(bob, e.members[i].state.matrix()), 1e-10);
  }
}

TEST(Steering, RandomQutritMarginalWithFourMembers) {
  const SpaceSpec s({{"b", 3}});
  Rng rng(21);
  std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  Ensemble e;
  for (double p : w) e.members.push_back({p, random_density(s, rng)});
  const DensityOperator marginal(s, e.average());
  const SteeringResult r = steer(marginal, e);
  EXPECT_EQ(r.report.verdict, Verdict::pass);
  EXPECT_LE(r.report.metrics.at("max_conditional_trace_distance"), 1e-9);
}

TEST(Steering, RejectsEnsembleWithWrongAverage) {
  const DensityOperator pure0 = ket_density(kQubit, vec2(1.0, 0.0));
  EXPECT_THROW(steer(pure0, x_ensemble()), std::invalid_argument);
  Ensemble bad = z_ensemble();
  bad.members[0].probability = 0.6;
  EXPECT_THROW(steer(DensityOperator(kQubit, 0.5 * Matrix::Identity(2, 2)), bad), std::invalid_argument);
}

TEST(BitCommitment, UnitaryCheatAlwaysWorks) {
  Rng rng(1);
  const ProtocolReport r = bit_commitment_demo(0, Regime::unitary, commitment_params(1e6), 1.0, rng);
  EXPECT_EQ(r.verdict, Verdict::violation_detected);
  EXPECT_EQ(r.metrics.at("cheat_success"), 1.0);
  EXPECT_NEAR(r.metrics.at("reveal_pass_probability"), 1.0, 1e-12);
}

TEST(BitCommitment, ZeroParticlesIsUnitary) {
  Rng rng(2);
  const ProtocolReport r = bit_commitment_demo(1, Regime::grw, commitment_params(0.0), 1.0, rng);
  EXPECT_EQ(r.verdict, Verdict::violation_detected);
  EXPECT_EQ(r.metrics.at("cheat_success"), 1.0);
  EXPECT_EQ(r.metrics.at("rate_times_hold"), 0.0);
}

TEST(BitCommitment, HeavyRegisterMakesCheatFail) {
  Rng rng(3);
  CommitmentSetup setup = default_commitment(commitment_params(20.0));
  setup.n_runs = 20000;
  const ProtocolReport r = bit_commitment_demo(1, Regime::grw, commitment_params(20.0), 1.0, rng, setup);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_LE(r.metrics.at("cheat_success"), 1e-3);
  EXPECT_NEAR(r.metrics.at("analytic_no_jump_probability"), std::exp(-20.0), 1e-20);
  // after collapse the wrong-basis reveal passes half the time
  EXPECT_NEAR(r.metrics.at("reveal_pass_probability"), 0.5, 0.01);
}

TEST(BitCommitment, SuccessTracksNoJumpProbability) {
  Rng rng(4);
  CommitmentSetup setup = default_commitment(commitment_params(1.0));
  setup.n_runs = 20000;
  const ProtocolReport r = bit_commitment_demo(0, Regime::grw, commitment_params(1.0), 1.0, rng, setup);
  const double p = std::exp(-1.0);
  EXPECT_NEAR(r.metrics.at("cheat_success"), p, 4.0 * oracle::binomial_sigma(p, 20000));
  EXPECT_EQ(r.metrics.at("cheat_success"), r.metrics.at("no_jump_fraction"));
}

TEST(BitCommitment, SuccessIsMonotoneInParticleNumber) {
  double prev = 1.0;
  for (double n : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    Rng rng(5);
    CommitmentSetup setup = default_commitment(commitment_params(n));
    setup.n_runs = 5000;
    const double s = bit_commitment_demo(0, Regime::grw, commitment_params(n), 1.0, rng, setup).metrics.at("cheat_success");
    EXPECT_LE(s, prev);
    prev = s;
  }
}

TEST(BitCommitment, RejectsBadInput) {
  Rng rng(6);
  EXPECT_THROW(bit_commitment_demo(2, Regime::grw, commitment_params(1.0), 1.0, rng), std::invalid_argument);
  EXPECT_THROW(bit_commitment_demo(0, Regime::decoherence, commitment_params(1.0), 1.0, rng), std::invalid_argument);
  CommitmentSetup close = default_commitment(commitment_params(1.0));
  close.right_site = close.left_site + 2;
  EXPECT_THROW(bit_commitment_demo(0, Regime::grw, commitment_params(1.0), 1.0, rng, close), std::invalid_argument);
  EXPECT_EQ(regime_from_string("grw"), Regime::grw);
  EXPECT_THROW(regime_from_string("collapse"), std::invalid_argument);
}

}  // namespace
}  // namespace grwsim
