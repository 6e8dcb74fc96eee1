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

#include <gtest/gtest.h>

#include "grwsim/random.hpp"
#include "grwsim/wigner.hpp"
#include "oracles.hpp"

namespace grwsim {
namespace {

WignerConfig config(double a2, Regime regime, std::size_t trials = 2000) {
  WignerConfig c;
  c.alpha = std::sqrt(a2);
  c.beta = std::sqrt(1.0 - a2);
  c.regime = regime;
  c.n_trials = trials;
  c.master_seed = 11;
  return c;
}

// α|↑⟩|up⟩ + β|↓⟩|down⟩ with the pointer sites placed by hand.
Vector psi1_oracle(const WignerConfig& c) {
  const std::size_t m = c.pointer_sites, up = m / 4, down = up + static_cast<std::size_t>(c.branch_separation);
  Vector zu = Vector::Zero(2), zd = Vector::Zero(2), au = Vector::Zero(static_cast<Eigen::Index>(m)), ad = au;
  zu(0) = 1.0;
  zd(1) = 1.0;
  au(static_cast<Eigen::Index>(up)) = 1.0;
  ad(static_cast<Eigen::Index>(down)) = 1.0;
  return c.alpha * oracle::kron(zu, au) + c.beta * oracle::kron(zd, ad);
}

void expect_within(const Estimate& e, double expected, double sigmas = 3.0) {
  const double sd = oracle::binomial_sigma(expected, e.count);
  EXPECT_NEAR(e.est, expected, std::max(sigmas * sd, 1e-12)) << "count " << e.count;
}

TEST(WignerSetup, InitialState) {
  const WignerConfig c = config(0.3, Regime::unitary);
  const StateVector s = build_initial(c);
  ASSERT_EQ(s.space().labels(), (std::vector<std::string>{"P", "A"}));
  EXPECT_NEAR(std::norm(s.amplitudes()(0)), 0.3, 1e-14);
  EXPECT_NEAR(std::norm(s.amplitudes()(32)), 0.7, 1e-14);
  EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-14);
}

TEST(WignerSetup, UnitaryMeasurementProducesPsi1) {
  for (double a2 : {0.5, 0.3, 0.9}) {
    const WignerConfig c = config(a2, Regime::unitary);
    Rng rng(1);
    const StateVector s = run_spin_measurement(build_initial(c), c, rng).state;
    const Vector ref = psi1_oracle(c);
    EXPECT_NEAR(std::norm(ref.dot(s.amplitudes())), 1.0, 1e-12);
  }
}

TEST(OObservable, MatchesProjectorOracle) {
  const WignerConfig c = config(0.3, Regime::unitary);
  const Observable o = o_observable(c);
  const Vector ref = psi1_oracle(c);
  const Matrix expected = 2.0 * ref * ref.adjoint() - Matrix::Identity(64, 64);
  EXPECT_LT(max_abs(o.matrix() - expected), 1e-14);
  EXPECT_TRUE(is_hermitian(o.matrix(), 1e-14));
  EXPECT_LT(max_abs(o.matrix() * o.matrix() - Matrix::Identity(64, 64)), 1e-12);
  EXPECT_NEAR((ref.adjoint() * o.matrix() * ref)(0, 0).real(), 1.0, 1e-12);
}

TEST(OObservable, DoesNotCommuteWithSpinOrMemory) {
  for (double a2 : {0.5, 0.3}) {
    const WignerConfig c = config(a2, Regime::unitary);
    const OCommutators k = o_commutators(WignerSetup(c));
    // ‖[2P − 1, Z]‖ = 2 sqrt(⟨Z²⟩ − ⟨Z⟩²) for a rank-one projector P.
    const double expected = 4.0 * std::sqrt(a2 * (1.0 - a2));
    EXPECT_NEAR(k.with_spin, expected, 1e-10);
    EXPECT_NEAR(k.with_memory, expected, 1e-10);
    EXPECT_GT(k.with_spin, 1e-6);
  }
}

TEST(OObservable, RejectsVanishingAmplitude) {
  WignerConfig c = config(0.5, Regime::unitary);
  c.alpha = 0.0;
  c.beta = 1.0;
  EXPECT_THROW(o_observable(c), std::invalid_argument);
}

TEST(WignerConfig, Validation) {
  WignerConfig c = config(0.5, Regime::unitary);
  c.beta = 0.9;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(0.5, Regime::unitary);
  c.branch_separation = 40.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(0.5, Regime::unitary);
  c.branch_separation = 3.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(0.5, Regime::unitary);
  c.grw.particle_counts["P"] = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(MeasureO, EigenstateGivesPlusOne) {
  const WignerSetup setup(config(0.3, Regime::unitary));
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const MeasureResult m = measure_o(setup.psi1(), setup.o_hat(), rng);
    EXPECT_EQ(m.outcome, 1.0);
    EXPECT_NEAR(m.p_plus, 1.0, 1e-12);
    EXPECT_NEAR(fidelity(m.post, setup.psi1()), 1.0, 1e-12);
  }
}

TEST(MeasureO, FastPathAgreesWithGenericObservable) {
  const WignerConfig c = config(0.3, Regime::unitary);
  const WignerSetup setup(c);
  const SpaceSpec big = setup.pa_space().concat(SpaceSpec({{"E", 3}}));
  const Observable generic = o_observable(c);
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const StateVector s = random_state(big, rng);
    Rng r1(k), r2(k);
    const MeasureResult fast = measure_o(s, setup.o_hat(), r1);
    const MeasureResult slow = measure_o(s, generic, r2);
    EXPECT_NEAR(fast.p_plus, slow.p_plus, 1e-10);
    // independent oracle for the Born probability
    const Matrix proj = oracle::kron(Matrix(setup.psi1().amplitudes() * setup.psi1().amplitudes().adjoint()),
                                     Matrix(Matrix::Identity(3, 3)));
    EXPECT_NEAR(fast.p_plus, (s.amplitudes().adjoint() * proj * s.amplitudes())(0, 0).real(), 1e-10);
    EXPECT_EQ(fast.outcome, slow.outcome);
    EXPECT_NEAR(fidelity(fast.post, slow.post), 1.0, 1e-10);
  }
}

TEST(MeasureO, WritesRecord) {
  const WignerSetup setup(config(0.5, Regime::unitary));
  Rng rng(4);
  const MeasureResult m = measure_o(setup.psi1(), setup.o_hat(), rng, RecordSpec{});
  ASSERT_TRUE(m.post.space().contains("R"));
  EXPECT_NEAR(reduced_state(m.post, {"R"}).matrix()(1, 1).real(), 1.0, 1e-12);
}

TEST(MeasureO, DecoheredMixtureGivesHalf) {
  const WignerConfig c = config(0.5, Regime::decoherence);
  const WignerSetup setup(c);
  Rng rng(5);
  const StateVector s = run_spin_measurement(setup.initial(), setup, rng).state;
  ASSERT_TRUE(s.space().contains("E"));
  EXPECT_NEAR(measure_o(s, setup.o_hat(), rng).p_plus, 0.5, 1e-12);
}

TEST(RunExperiment, UnitaryAlwaysFindsPlus) {
  const WignerResult r = run_experiment(config(0.3, Regime::unitary, 500));
  EXPECT_EQ(r.p_o_plus.est, 1.0);
  EXPECT_NEAR(r.p_o_plus_born, 1.0, 1e-12);
  EXPECT_GE(r.min_post_fidelity, 1.0 - 1e-12);
  EXPECT_LE(r.max_anticorrelated, 1e-12);
  EXPECT_EQ(r.option_b_prediction, 1.0);
}

TEST(RunExperiment, GrwMatchesCollapsedMixture) {
  const WignerResult r = run_experiment(config(0.5, Regime::grw, 2000));
  expect_within(r.p_o_plus, 0.5);
  EXPECT_NEAR(r.p_o_plus_born, 0.5, 0.05);
  EXPECT_GT(r.collapse_probability, 1.0 - 1e-12);
  EXPECT_LE(r.max_anticorrelated, 1e-12);
  ASSERT_TRUE(r.p_o_plus_given_up && r.p_o_plus_given_down);
  expect_within(*r.p_o_plus_given_up, 0.5);
}

TEST(RunExperiment, GrwConditionalProbabilitiesFollowOptionA) {
  const WignerResult r = run_experiment(config(0.3, Regime::grw, 3000));
  expect_within(r.p_o_plus, 0.09 + 0.49);
  ASSERT_TRUE(r.p_o_plus_given_up && r.p_o_plus_given_down);
  expect_within(*r.p_o_plus_given_up, 0.3);
  expect_within(*r.p_o_plus_given_down, 0.7);
  EXPECT_NEAR(r.mixture_prediction, 0.58, 1e-12);
}

TEST(RunExperiment, DecoherenceLooksLikeCollapseButRecoheres) {
  const WignerResult r = run_experiment(config(0.3, Regime::decoherence, 2000));
  expect_within(r.p_o_plus, 0.58);
  ASSERT_TRUE(r.p_o_plus_given_up);
  expect_within(*r.p_o_plus_given_up, 0.3);
  ASSERT_TRUE(r.recoherence_probability);
  EXPECT_NEAR(*r.recoherence_probability, 1.0, 1e-12);
}

TEST(RunExperiment, CommunicationToB) {
  WignerConfig c = config(0.5, Regime::unitary, 300);
  c.communicate_to_B = true;
  const WignerResult u = run_experiment(c);
  // Ô acts on P+A only; B holds a record, so A's branches are marked.
  EXPECT_NEAR(u.p_o_plus_born, 0.5, 1e-12);
  expect_within(u.p_o_plus, 0.5);
  c.regime = Regime::grw;
  c.n_trials = 1500;
  expect_within(run_experiment(c).p_o_plus, 0.5);
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  WignerConfig c = config(0.5, Regime::grw, 200);
  const WignerResult a = run_experiment(c);
  c.jobs = 3;
  const WignerResult b = run_experiment(c);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].o_outcome, b.trials[i].o_outcome);
    EXPECT_EQ(a.trials[i].p_plus, b.trials[i].p_plus);
    EXPECT_EQ(a.trials[i].jumps, b.trials[i].jumps);
  }
}

TEST(SecondLevel, ExtendRequiresPurity) {
  const WignerSetup setup(config(0.5, Regime::unitary));
  const StateVector phi = setup.communicate(setup.psi1());
  const O2Extension ext = extend_with_o2(phi);
  EXPECT_NEAR(fidelity(ext.phi, phi), 1.0, 1e-12);
  EXPECT_THROW(extend_with_o2(setup.psi1()), std::invalid_argument);
  const StateVector mixed = setup.decohere_memory(setup.psi1());
  EXPECT_THROW(extend_with_o2(tensor(mixed, StateVector::basis(SpaceSpec({{"B", 4}}), 0)), "B"), std::invalid_argument);
}

TEST(SecondLevel, UnitaryAndGrwPredictions) {
  const O2Result u = run_o2_comparison(config(0.3, Regime::unitary, 300));
  EXPECT_EQ(u.p_o2_plus.est, 1.0);
  EXPECT_EQ(u.unitary_prediction, 1.0);
  const O2Result g = run_o2_comparison(config(0.3, Regime::grw, 2000));
  expect_within(g.p_o2_plus, 0.58);
  EXPECT_NEAR(g.mixture, 0.58, 1e-12);
}

}  // namespace
}  // namespace grwsim
