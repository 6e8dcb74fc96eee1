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

#ifndef GRWSIM_PROTOCOLS_HPP
#define GRWSIM_PROTOCOLS_HPP

// Executable checks of the three information-theoretic constraints (no
// signaling, no cloning of non-orthogonal pure states, remote steering) and a
// bit-commitment cheating demo on a massive position register.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "grwsim/channels.hpp"
#include "grwsim/dynamics.hpp"
#include "grwsim/grw.hpp"
#include "grwsim/hilbert.hpp"
#include "grwsim/rng.hpp"
#include "grwsim/stats.hpp"

namespace grwsim {

enum class Verdict { pass, fail, violation_detected, impossible };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::violation_detected: return "violation-detected";
    case Verdict::impossible: return "impossible";
  }
  return "?";
}

struct ProtocolEvent {
  std::string step;
  std::string detail;
};

struct ProtocolReport {
  std::string name;
  Verdict verdict = Verdict::fail;
  std::map<std::string, double> metrics;
  std::vector<ProtocolEvent> transcript;

  void log(std::string step, std::string detail) { transcript.push_back({std::move(step), std::move(detail)}); }
  void set(const std::string& key, double value) {
    if (!std::isfinite(value)) throw std::logic_error("metric '" + key + "' is not finite");
    metrics[key] = value;
  }
};

struct Ensemble {
  struct Member {
    double probability;
    DensityOperator state;
  };
  std::vector<Member> members;

  void validate() const {
    if (members.empty()) throw std::invalid_argument("ensemble is empty");
    double total = 0.0;
    for (const auto& m : members) {
      if (!(m.probability >= 0.0)) throw std::invalid_argument("ensemble probability is negative");
      if (!(m.state.space() == members.front().state.space())) throw std::invalid_argument("ensemble members disagree on space");
      total += m.probability;
    }
    if (std::abs(total - 1.0) > tol::structural) throw std::invalid_argument("ensemble probabilities do not sum to 1");
  }

  Matrix average() const {
    Matrix avg = Matrix::Zero(members.front().state.matrix().rows(), members.front().state.matrix().cols());
    for (const auto& m : members) avg += m.probability * m.state.matrix();
    return avg;
  }
};

// ---------------------------------------------------------------------------
// No signaling

/// Max trace distance between Bob's reduced state before and after each of
/// Alice's channels. Passes when every distance is ≤ 1e-12.
inline ProtocolReport check_no_signaling(const DensityOperator& joint, const std::vector<Channel>& alice_ops,
                                         const std::set<std::string>& bob_labels) {
  ProtocolReport rep;
  rep.name = "no_signaling";
  for (const auto& l : bob_labels) (void)joint.space().position(l);
  const DensityOperator bob_before = partial_trace(joint, bob_labels);
  double worst = 0.0;
  for (std::size_t k = 0; k < alice_ops.size(); ++k) {
    for (const auto& s : alice_ops[k].space().subsystems())
      if (bob_labels.count(s.label)) throw std::invalid_argument("no_signaling: Alice channel acts on Bob's subsystem '" + s.label + "'");
    const Channel full = embed(alice_ops[k], joint.space());
    const DensityOperator after = apply_channel(full, joint);
    const double dist = trace_distance(partial_trace(after, bob_labels).matrix(), bob_before.matrix());
    worst = std::max(worst, dist);
    rep.log("alice_channel", "channel " + std::to_string(k) + " with " + std::to_string(alice_ops[k].kraus().size()) +
                                 " Kraus operators; Bob distance " + std::to_string(dist));
  }
  rep.set("max_bob_trace_distance", worst);
  rep.set("channels", static_cast<double>(alice_ops.size()));
  rep.verdict = worst <= 1e-12 ? Verdict::pass : Verdict::violation_detected;
  return rep;
}

/// No signaling under stochastic GRW dynamics: Alice's subsystems evolve with
/// jumps (and an optional Hamiltonian on her side) while Bob idles. Bob's
/// trajectory-averaged reduced state is compared with his initial one; the
/// check passes within three Monte Carlo standard errors.
inline ProtocolReport check_no_signaling_grw(const StateVector& joint, const std::set<std::string>& bob_labels,
                                             const Hamiltonian& alice_h, const GrwParams& params, double t,
                                             std::size_t n_runs, std::uint64_t master_seed) {
  ProtocolReport rep;
  rep.name = "no_signaling_grw";
  for (const auto& s : alice_h.space().subsystems())
    if (bob_labels.count(s.label)) throw std::invalid_argument("no_signaling_grw: Alice Hamiltonian acts on Bob");
  for (const auto& [label, n] : params.particle_counts)
    if (n > 0.0 && bob_labels.count(label)) throw std::invalid_argument("no_signaling_grw: Bob subsystem carries GRW particles");
  const DensityOperator before = reduced_state(joint, bob_labels);
  MatrixMean mean(before.matrix().rows());
  std::size_t jumps = 0;
  for (std::size_t i = 0; i < n_runs; ++i) {
    Rng rng = Rng::stream(master_seed, i);
    const Trajectory tr = evolve_grw(joint, alice_h, params, t, rng);
    jumps += tr.jumps.size();
    mean.add(reduced_state(tr.final_state(), bob_labels).matrix());
  }
  const double dist = trace_distance(mean.mean(), before.matrix());
  const double err = mean.trace_distance_error();
  rep.set("bob_trace_distance", dist);
  rep.set("mc_error", err);
  rep.set("mean_jumps", static_cast<double>(jumps) / static_cast<double>(std::max<std::size_t>(n_runs, 1)));
  rep.set("runs", static_cast<double>(n_runs));
  rep.log("average", "Bob's averaged reduced state differs by " + std::to_string(dist) + " (MC error " + std::to_string(err) + ")");
  rep.verdict = dist <= 3.0 * err ? Verdict::pass : Verdict::violation_detected;
  return rep;
}

// ---------------------------------------------------------------------------
// Cloning

/// Isometry |x⟩ ↦ |x⟩|x⟩ on an orthonormal basis whose first vectors span
/// {ψ, φ}. Rows index the (original, copy) pair, original slowest.
inline Matrix make_cloner(const StateVector& psi, const StateVector& phi) {
  const auto d = static_cast<Eigen::Index>(psi.dim());
  Matrix basis(d, 0);
  auto add = [&](Vector v) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) v -= basis.col(c).dot(v) * basis.col(c);
    if (v.norm() < 1e-7) return;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v.normalized();
  };
  add(psi.amplitudes());
  add(phi.amplitudes());
  for (Eigen::Index k = 0; k < d && basis.cols() < d; ++k) add(Vector::Unit(d, k));
  Matrix v = Matrix::Zero(d * d, d);
  for (Eigen::Index c = 0; c < d; ++c) v += kron(Vector(basis.col(c)), Vector(basis.col(c))) * basis.col(c).adjoint();
  return v;
}

/// Clones {ψ, φ} when they are orthogonal (or the same ray); otherwise
/// reports the unitarity certificate |⟨ψ|φ⟩ − ⟨ψ|φ⟩²| > 0.
inline ProtocolReport attempt_cloning(const StateVector& psi, const StateVector& phi) {
  if (!(psi.space() == phi.space())) throw std::invalid_argument("attempt_cloning: space mismatch");
  ProtocolReport rep;
  rep.name = "cloning";
  const cplx s = psi.amplitudes().dot(phi.amplitudes());
  const double overlap = std::abs(s);
  rep.set("overlap", overlap);
  rep.log("blank", "append blank copy register in its ready state");
  const bool orthogonal = overlap <= tol::spectral;
  const bool same_ray = overlap >= 1.0 - tol::spectral;
  if (!orthogonal && !same_ray) {
    const double residual = std::abs(s - s * s);
    rep.set("residual", residual);
    rep.log("certificate", "a cloning isometry preserves inner products: <psi|phi> = <psi|phi>^2 is violated by " +
                               std::to_string(residual));
    rep.verdict = Verdict::impossible;
    return rep;
  }
  const Matrix v = make_cloner(psi, phi);
  std::vector<Subsystem> twice = psi.space().subsystems();
  for (const auto& sub : psi.space().subsystems()) twice.push_back({sub.label + "'", sub.dim});
  const SpaceSpec out_space(std::move(twice));
  auto fid = [&](const StateVector& x) {
    const StateVector cloned(out_space, v * x.amplitudes());
    return fidelity(cloned, StateVector(out_space, kron(x.amplitudes(), x.amplitudes())));
  };
  const double f_psi = fid(psi), f_phi = fid(phi);
  rep.set("isometry_error", max_abs(v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())));
  rep.set("fidelity_psi", f_psi);
  rep.set("fidelity_phi", f_phi);
  rep.set("residual", 0.0);
  rep.log("cloner", same_ray ? "single ray: copy in a basis containing it" : "orthogonal pair: basis-copying isometry");
  rep.verdict = (f_psi >= 1.0 - tol::spectral && f_phi >= 1.0 - tol::spectral) ? Verdict::pass : Verdict::fail;
  return rep;
}

// ---------------------------------------------------------------------------
// Steering

struct SteeringResult {
  StateVector purification;  // on (alice) ⊗ Bob
  Observable alice_measurement;
  ProtocolReport report;
};

/// Canonical purification Σ_k |k⟩ ⊗ √ρ|k⟩ of Bob's marginal, plus a
/// projective Alice measurement whose outcome i (eigenvalue i) occurs with
/// probability p_i and leaves Bob in ρ_i.
inline SteeringResult steer(const DensityOperator& bob_marginal, const Ensemble& target) {
  target.validate();
  if (!(target.members.front().state.space() == bob_marginal.space()))
    throw std::invalid_argument("steer: ensemble lives on a different space than the marginal");
  const double avg_err = max_abs(target.average() - bob_marginal.matrix());
  if (avg_err > tol::spectral) throw std::invalid_argument("steer: ensemble does not average to the marginal");

  const auto db = static_cast<Eigen::Index>(bob_marginal.dim());
  // Pure components (member, weight, vector).
  struct Component {
    std::size_t member;
    double weight;
    Vector vec;
  };
  std::vector<Component> comps;
  for (std::size_t i = 0; i < target.members.size(); ++i) {
    const auto& m = target.members[i];
    if (m.probability == 0.0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.state.matrix());
    for (Eigen::Index j = 0; j < db; ++j)
      if (es.eigenvalues()(j) > 1e-14) comps.push_back({i, m.probability * es.eigenvalues()(j), es.eigenvectors().col(j)});
  }
  const Eigen::Index da = std::max<Eigen::Index>(db, static_cast<Eigen::Index>(comps.size()));

  std::string alice = "alice";
  while (bob_marginal.space().contains(alice)) alice += "_";
  const SpaceSpec alice_space({{alice, static_cast<std::size_t>(da)}});
  const SpaceSpec joint_space = alice_space.concat(bob_marginal.space());

  Matrix m0 = Matrix::Zero(da, db);  // canonical purification, rows = Alice
  m0.topRows(db) = psd_sqrt(bob_marginal.matrix()).transpose();
  Matrix me = Matrix::Zero(da, db);  // ensemble purification
  for (std::size_t t = 0; t < comps.size(); ++t) me.row(static_cast<Eigen::Index>(t)) = std::sqrt(comps[t].weight) * comps[t].vec.transpose();

  // Unitary U on Alice with U·m0 = me (orthogonal Procrustes).
  Eigen::JacobiSVD<Matrix> svd(me * m0.adjoint(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix u = svd.matrixU() * svd.matrixV().adjoint();

  std::vector<double> values;
  std::vector<Matrix> projectors;
  for (std::size_t i = 0; i < target.members.size(); ++i) {
    Matrix pi = Matrix::Zero(da, da);
    for (std::size_t t = 0; t < comps.size(); ++t)
      if (comps[t].member == i) pi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t)) = 1.0;
    if (i + 1 == target.members.size())
      for (Eigen::Index t = static_cast<Eigen::Index>(comps.size()); t < da; ++t) pi(t, t) = 1.0;
    values.push_back(static_cast<double>(i));
    projectors.push_back(u.adjoint() * pi * u);
  }
  // Restore exact idempotence lost in the products above.
  for (auto& p : projectors) p = 0.5 * (p + p.adjoint());
  Observable alice_obs = Observable::from_spectral(alice_space, values, projectors);

  Vector amps(da * db);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index b = 0; b < db; ++b) amps(a * db + b) = m0(a, b);
  StateVector purification(joint_space, amps);

  ProtocolReport rep;
  rep.name = "steering";
  rep.log("purify", "canonical purification with Alice dimension " + std::to_string(da));
  const std::set<std::string> bob_labels = [&] {
    std::set<std::string> s;
    for (const auto& l : bob_marginal.space().labels()) s.insert(l);
    return s;
  }();
  const double marginal_err = trace_distance(reduced_state(purification, bob_labels).matrix(), bob_marginal.matrix());
  double prob_err = 0.0, state_err = 0.0;
  for (std::size_t i = 0; i < target.members.size(); ++i) {
    const Vector v = apply_local(projectors[i], alice_space, joint_space, purification.amplitudes());
    const double p = v.squaredNorm();
    prob_err = std::max(prob_err, std::abs(p - target.members[i].probability));
    if (target.members[i].probability > 0.0 && p > tol::annihilated) {
      const DensityOperator cond = reduced_state(StateVector(joint_space, v), bob_labels);
      const double dist = trace_distance(cond.matrix(), target.members[i].state.matrix());
      state_err = std::max(state_err, dist);
      rep.log("outcome", "Alice outcome " + std::to_string(i) + ": probability " + std::to_string(p) +
                             ", Bob conditional distance " + std::to_string(dist));
    }
  }
  rep.set("marginal_error", marginal_err);
  rep.set("max_probability_error", prob_err);
  rep.set("max_conditional_trace_distance", state_err);
  rep.set("alice_dim", static_cast<double>(da));
  rep.verdict = (prob_err <= tol::spectral && state_err <= tol::spectral && marginal_err <= tol::spectral) ? Verdict::pass
                                                                                                           : Verdict::fail;
  return {std::move(purification), std::move(alice_obs), std::move(rep)};
}

// ---------------------------------------------------------------------------
// Bit commitment

enum class Regime { unitary, grw, decoherence };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::unitary: return "unitary";
    case Regime::grw: return "grw";
    case Regime::decoherence: return "decoherence";
  }
  return "?";
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "unitary") return Regime::unitary;
  if (s == "grw") return Regime::grw;
  if (s == "decoherence") return Regime::decoherence;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

struct CommitmentSetup {
  std::string bob_label = "bob";
  std::size_t left_site = 0;
  std::size_t right_site = 0;
  std::size_t n_runs = 100000;
};

/// Default commitment sites: a quarter and three quarters around the ring.
inline CommitmentSetup default_commitment(const GrwParams& params, const std::string& bob = "bob") {
  const Lattice& lat = params.lattice(bob);
  return {bob, lat.sites / 4, lat.sites / 4 + lat.sites / 2, 100000};
}

namespace detail {
/// Probability that a reveal of `bit` passes Bob's check on the joint state
/// (alice qubit ⊗ bob lattice, alice slowest).
inline double reveal_pass_probability(const Vector& amps, std::size_t m, std::size_t left, std::size_t right, int bit) {
  const auto mm = static_cast<Eigen::Index>(m);
  const Eigen::Map<const Matrix> q_t(amps.data(), mm, 2);  // column a = Alice index
  const Matrix q = q_t.transpose();                       // 2 × M
  Vector bob0 = Vector::Zero(mm), bob1 = Vector::Zero(mm);
  Vector a0 = Vector::Zero(2), a1 = Vector::Zero(2);
  if (bit == 0) {
    bob0(static_cast<Eigen::Index>(left)) = 1.0;
    bob1(static_cast<Eigen::Index>(right)) = 1.0;
    a0(0) = 1.0;
    a1(1) = 1.0;
  } else {
    const double r = std::sqrt(0.5);
    bob0(static_cast<Eigen::Index>(left)) = r;
    bob0(static_cast<Eigen::Index>(right)) = r;
    bob1(static_cast<Eigen::Index>(left)) = r;
    bob1(static_cast<Eigen::Index>(right)) = -r;
    a0 << r, r;
    a1 << r, -r;
  }
  // |⟨a_i ⊗ b_i|Φ⟩|² summed over the two matching outcomes.
  const cplx c0 = (a0.adjoint() * q * bob0.conjugate())(0, 0);
  const cplx c1 = (a1.adjoint() * q * bob1.conjugate())(0, 0);
  return std::norm(c0) + std::norm(c1);
}
}  // namespace detail

/// Alice's entanglement cheat against a position-encoded commitment. She
/// keeps an ancilla qubit entangled with Bob's massive register,
/// (|0⟩|L⟩ + |1⟩|R⟩)/√2, and steers at reveal time. A run counts as a
/// successful cheat when both bits can still be revealed with certainty.
///
/// Per-run random streams come from (rng.seed(), run index), and the first
/// draw of each run is its first waiting time; runs at different N·t/τ with
/// the same seed are therefore coupled and the success fraction is monotone.
inline ProtocolReport bit_commitment_demo(int bit, Regime regime, const GrwParams& params, double hold_time, Rng& rng,
                                          std::optional<CommitmentSetup> setup_in = std::nullopt) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("bit_commitment_demo: bit must be 0 or 1");
  if (regime == Regime::decoherence) throw std::invalid_argument("bit_commitment_demo: invalid regime 'decoherence'");
  const CommitmentSetup setup = setup_in.value_or(default_commitment(params));
  const Lattice& lat = params.lattice(setup.bob_label);
  if (setup.left_site >= lat.sites || setup.right_site >= lat.sites || setup.left_site == setup.right_site)
    throw std::invalid_argument("bit_commitment_demo: invalid commitment sites");
  if (lat.distance(setup.left_site, setup.right_site) < 5.0 * params.delta)
    throw std::invalid_argument("bit_commitment_demo: commitment sites closer than 5Δ");

  ProtocolReport rep;
  rep.name = "bit_commitment";
  rep.log("commit", "honest encodings: bit 0 -> {|L>,|R>}, bit 1 -> {|L>+|R>, |L>-|R>}/sqrt2 on a lattice of " +
                        std::to_string(lat.sites) + " sites");
  // Both honest ensembles give Bob the same marginal (hiding).
  rep.set("hiding_distance", 0.0);

  const std::string alice = setup.bob_label == "alice" ? "alice_" : "alice";
  const SpaceSpec space({{alice, 2}, {setup.bob_label, lat.sites}});
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(2 * lat.sites));
  amps(static_cast<Eigen::Index>(setup.left_site)) = std::sqrt(0.5);
  amps(static_cast<Eigen::Index>(lat.sites + setup.right_site)) = std::sqrt(0.5);
  const StateVector cheat(space, amps);
  rep.log("cheat", "Alice keeps a purification (|0>|L> + |1>|R>)/sqrt2 instead of committing");

  GrwParams run_params = params;
  if (regime == Regime::unitary) run_params.particle_counts.clear();
  for (const auto& [label, n] : run_params.particle_counts)
    if (n > 0.0 && label != setup.bob_label) throw std::invalid_argument("bit_commitment_demo: only Bob's register may carry particles");
  const double rate = total_jump_rate(run_params);
  const double x = rate * hold_time;
  rep.set("rate_times_hold", x);
  rep.set("analytic_no_jump_probability", std::exp(-x));

  auto score = [&](const Vector& a, double& pass0, double& pass1) {
    pass0 = detail::reveal_pass_probability(a, lat.sites, setup.left_site, setup.right_site, 0);
    pass1 = detail::reveal_pass_probability(a, lat.sites, setup.left_site, setup.right_site, 1);
  };

  std::size_t successes = 0, runs = 0, no_jump = 0;
  double pass_bit_sum = 0.0;
  const Hamiltonian idle = Hamiltonian::zero(space);
  if (rate == 0.0) {
    double p0 = 0.0, p1 = 0.0;
    score(cheat.amplitudes(), p0, p1);
    runs = 1;
    no_jump = 1;
    successes = (std::min(p0, p1) >= 1.0 - tol::spectral) ? 1 : 0;
    pass_bit_sum = bit == 0 ? p0 : p1;
    rep.log("hold", "no spontaneous localization: the entangled state is untouched for the hold time");
  } else {
    for (std::size_t i = 0; i < setup.n_runs; ++i) {
      Rng run_rng = Rng::stream(rng.seed(), i);
      const Trajectory tr = evolve_grw(cheat, idle, run_params, hold_time, run_rng);
      double p0 = 0.0, p1 = 0.0;
      score(tr.final_state().amplitudes(), p0, p1);
      if (tr.jumps.empty()) ++no_jump;
      if (std::min(p0, p1) >= 1.0 - tol::spectral) ++successes;
      pass_bit_sum += bit == 0 ? p0 : p1;
      ++runs;
    }
    rep.log("hold", "GRW evolution of Bob's register for the hold time over " + std::to_string(runs) + " runs");
  }
  const Estimate success = binomial(successes, runs);
  rep.set("runs", static_cast<double>(runs));
  rep.set("cheat_success", success.est);
  rep.set("cheat_success_stderr", success.se);
  rep.set("no_jump_fraction", static_cast<double>(no_jump) / static_cast<double>(runs));
  rep.set("reveal_pass_probability", pass_bit_sum / static_cast<double>(runs));
  rep.log("reveal", "Alice reveals bit " + std::to_string(bit) + "; mean pass probability " +
                        std::to_string(pass_bit_sum / static_cast<double>(runs)));
  if (success.est >= 1.0 - tol::spectral) {
    rep.verdict = Verdict::violation_detected;
    rep.log("verdict", "commitment not binding: Alice can still open either bit");
  } else {
    rep.verdict = Verdict::pass;
    rep.log("verdict", "commitment binding before reveal in all but " + std::to_string(successes) + " runs");
  }
  return rep;
}

}  // namespace grwsim

#endif  // GRWSIM_PROTOCOLS_HPP
