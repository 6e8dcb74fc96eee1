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

#ifndef GRWSIM_EXPERIMENTS_HPP
#define GRWSIM_EXPERIMENTS_HPP

// Canned Monte Carlo studies shared by the runner and the acceptance suite:
// two-branch GRW trajectories, the grw_channel dilation check and the
// protocol suite.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "grwsim/channels.hpp"
#include "grwsim/grw.hpp"
#include "grwsim/parallel.hpp"
#include "grwsim/protocols.hpp"
#include "grwsim/random.hpp"
#include "grwsim/stats.hpp"

namespace grwsim {

// ---------------------------------------------------------------------------
// Two-branch pointer under GRW

struct TwoBranchConfig {
  std::size_t sites = 64;
  double spacing = 1.0;
  double delta = 1.0;
  double tau = 1.0;
  double particles = 10.0;
  double duration = 1.0;
  double separation = 10.0;  // in units of Δ
  cplx alpha{std::sqrt(0.5)};
  cplx beta{std::sqrt(0.5)};
  std::size_t n_trajectories = 10000;
  std::size_t export_trajectories = 5;
  double kill_threshold = 1e-4;  // relative amplitude of the losing branch
  std::uint64_t master_seed = 1;
  std::size_t jobs = 1;

  std::size_t left_site() const { return sites / 4; }
  std::size_t right_site() const {
    return left_site() + static_cast<std::size_t>(std::llround(separation * delta / spacing));
  }

  GrwParams params() const {
    GrwParams p;
    p.delta = delta;
    p.tau = tau;
    p.particle_counts["x"] = particles;
    p.lattices["x"] = Lattice{sites, spacing};
    return p;
  }

  void validate() const {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > tol::structural)
      throw std::invalid_argument("|alpha|^2 + |beta|^2 must equal 1");
    params().validate();
    if (!(duration >= 0.0)) throw std::invalid_argument("duration must be non-negative");
    if (!(separation > 0.0)) throw std::invalid_argument("separation must be positive");
    if (right_site() >= sites || right_site() == left_site())
      throw std::invalid_argument("separation does not fit on the lattice");
    if (n_trajectories < 1) throw std::invalid_argument("n_trajectories must be at least 1");
  }

  StateVector initial() const {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(sites));
    v(static_cast<Eigen::Index>(left_site())) = alpha;
    v(static_cast<Eigen::Index>(right_site())) = beta;
    return StateVector(SpaceSpec({{"x", sites}}), v);
  }
};

struct TwoBranchRecord {
  std::size_t trajectory = 0;
  std::size_t jumps = 0;
  int branch = 0;       // +1 left survived, −1 right survived, 0 no jump
  bool killed = false;  // first jump suppressed the other branch below threshold
  double first_jump_time = -1.0;
};

struct TwoBranchSummary {
  TwoBranchConfig config;
  Estimate collapse_fraction;
  double collapse_analytic = 0.0;  // 1 − e^{−N t/τ}
  double mean_jumps = 0.0;
  double expected_jumps = 0.0;
  double poisson_p_value = 1.0;
  Estimate left_fraction;  // among trajectories with ≥ 1 jump
  double left_expected = 0.0;
  Estimate branch_kill;        // among trajectories with ≥ 1 jump
  double branch_kill_exact = 0.0;  // from the centre distribution
  std::vector<TwoBranchRecord> records;
  std::vector<std::vector<JumpEvent>> exported;  // first `export_trajectories`
};

namespace detail {
inline double losing_branch_amplitude(double w_left, double w_right) {
  const double hi = std::max(w_left, w_right), lo = std::min(w_left, w_right);
  return hi > 0.0 ? std::sqrt(lo / hi) : 1.0;
}
}  // namespace detail

/// Probability that one jump on the two-branch state leaves the losing
/// branch with relative amplitude below the threshold, summed exactly over
/// jump centres.
inline double branch_kill_probability(const TwoBranchConfig& cfg) {
  const GrwParams p = cfg.params();
  const StateVector psi = cfg.initial();
  const RealVector dist = jump_center_distribution(psi, "x", p);
  const Lattice& lat = p.lattice("x");
  const double wl = std::norm(cfg.alpha), wr = std::norm(cfg.beta);
  double kill = 0.0;
  for (std::size_t c = 0; c < cfg.sites; ++c) {
    const RealVector j = jump_profile(c, cfg.delta, lat);
    const double a = wl * j(static_cast<Eigen::Index>(cfg.left_site())) * j(static_cast<Eigen::Index>(cfg.left_site()));
    const double b = wr * j(static_cast<Eigen::Index>(cfg.right_site())) * j(static_cast<Eigen::Index>(cfg.right_site()));
    if (detail::losing_branch_amplitude(a, b) < cfg.kill_threshold) kill += dist(static_cast<Eigen::Index>(c));
  }
  return kill;
}

inline TwoBranchSummary run_two_branch(const TwoBranchConfig& cfg) {
  cfg.validate();
  const GrwParams params = cfg.params();
  const StateVector psi = cfg.initial();
  const Hamiltonian idle = Hamiltonian::zero(psi.space());
  const auto l = static_cast<Eigen::Index>(cfg.left_site()), r = static_cast<Eigen::Index>(cfg.right_site());

  TwoBranchSummary s;
  s.config = cfg;
  s.records.resize(cfg.n_trajectories);
  s.exported.resize(std::min(cfg.export_trajectories, cfg.n_trajectories));
  parallel_for(cfg.n_trajectories, cfg.jobs, [&](std::size_t i) {
    Rng rng = Rng::stream(cfg.master_seed, i);
    const Trajectory tr = evolve_grw(psi, idle, params, cfg.duration, rng);
    TwoBranchRecord rec;
    rec.trajectory = i;
    rec.jumps = tr.jumps.size();
    if (!tr.jumps.empty()) {
      const Vector& a = tr.final_state().amplitudes();
      rec.branch = std::norm(a(l)) >= std::norm(a(r)) ? 1 : -1;
      rec.first_jump_time = tr.jumps.front().time;
      double wl = 0.0, wr = 0.0;
      for (const auto& [site, w] : tr.jumps.front().branch_weights) {
        if (site == cfg.left_site()) wl = w;
        if (site == cfg.right_site()) wr = w;
      }
      rec.killed = detail::losing_branch_amplitude(wl, wr) < cfg.kill_threshold;
    }
    s.records[i] = rec;
    if (i < s.exported.size()) s.exported[i] = tr.jumps;
  });

  std::size_t collapsed = 0, left = 0, killed = 0, total_jumps = 0;
  std::vector<std::size_t> counts;
  counts.reserve(cfg.n_trajectories);
  for (const auto& rec : s.records) {
    counts.push_back(rec.jumps);
    total_jumps += rec.jumps;
    if (rec.jumps == 0) continue;
    ++collapsed;
    left += rec.branch > 0;
    killed += rec.killed;
  }
  const double lambda = total_jump_rate(params) * cfg.duration;
  s.collapse_fraction = binomial(collapsed, cfg.n_trajectories);
  s.collapse_analytic = -std::expm1(-lambda);
  s.mean_jumps = static_cast<double>(total_jumps) / static_cast<double>(cfg.n_trajectories);
  s.expected_jumps = lambda;
  s.poisson_p_value = poisson_gof(counts, lambda).p_value;
  s.left_fraction = binomial(left, collapsed);
  s.left_expected = std::norm(cfg.alpha);
  s.branch_kill = binomial(killed, collapsed);
  s.branch_kill_exact = branch_kill_probability(cfg);
  return s;
}

// ---------------------------------------------------------------------------
// Ancilla (dilation) check for the GRW channel

struct DilationCheckConfig {
  std::size_t sites = 8;
  double spacing = 1.0;
  double delta = 1.0;
  double tau = 1.0;
  double particles = 1.0;
  double dt = 0.01;
  std::size_t n_states = 100;
  std::size_t steps = 5;
  std::size_t n_pure_states = 10;
  std::size_t n_trajectories = 10000;
  std::size_t trajectory_steps = 10;
  std::uint64_t master_seed = 1;
  std::size_t jobs = 1;

  GrwParams params() const {
    GrwParams p;
    p.delta = delta;
    p.tau = tau;
    p.particle_counts["x"] = particles;
    p.lattices["x"] = Lattice{sites, spacing};
    return p;
  }

  void validate() const {
    params().validate();
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
    if (n_states < 1 || n_pure_states < 1) throw std::invalid_argument("need at least one test state");
    if (n_trajectories < 2) throw std::invalid_argument("n_trajectories must be at least 2");
  }
};

struct DilationCheckResult {
  std::size_t kraus_count = 0;
  std::size_t env_dim = 0;
  double completeness_error = 0.0;
  double isometry_error = 0.0;
  double max_dilation_distance = 0.0;   // one step, random mixed states
  double max_iterated_distance = 0.0;   // fresh-ancilla iteration vs n-step channel
  double trajectory_distance = 0.0;     // trajectory average vs channel^k
  double trajectory_mc_error = 0.0;
};

inline DilationCheckResult run_dilation_check(const DilationCheckConfig& cfg) {
  cfg.validate();
  const GrwParams params = cfg.params();
  const SpaceSpec space({{"x", cfg.sites}});
  const Channel ch = grw_channel(params, cfg.dt, space);
  const Dilation dil = stinespring_dilate(ch);
  DilationCheckResult res;
  res.kraus_count = ch.kraus().size();
  res.env_dim = dil.env_dim;
  res.completeness_error = ch.completeness_error();
  res.isometry_error = max_abs(dil.isometry.adjoint() * dil.isometry -
                               Matrix::Identity(dil.isometry.cols(), dil.isometry.cols()));

  Rng rng(derive_seed(cfg.master_seed, 0));
  std::vector<DensityOperator> tests;
  for (std::size_t k = 0; k < cfg.n_states; ++k) tests.push_back(random_density(space, rng));
  res.max_dilation_distance = verify_dilation(ch, dil, tests);

  // n-step channel, kept minimal so the Kraus count stays ≤ d².
  Channel n_step = ch;
  for (std::size_t k = 1; k < cfg.steps; ++k) n_step = minimal_kraus(compose(n_step, ch));
  for (std::size_t k = 0; k < cfg.n_pure_states; ++k) {
    const StateVector psi = random_state(space, rng);
    const StateVector big = iterate_dilation(dil, psi, cfg.steps);
    const Matrix reduced = reduced_state(big, {"x"}).matrix();
    const Matrix expected = apply_channel(n_step, outer(psi.amplitudes(), psi.amplitudes()));
    res.max_iterated_distance = std::max(res.max_iterated_distance, trace_distance(reduced, expected));
  }

  // Trajectory average over trajectory_steps·dt against the iterated channel.
  const StateVector psi0 = random_state(space, rng);
  Matrix expected = outer(psi0.amplitudes(), psi0.amplitudes());
  for (std::size_t k = 0; k < cfg.trajectory_steps; ++k) expected = apply_channel(ch, expected);
  const double t = cfg.dt * static_cast<double>(cfg.trajectory_steps);
  const Hamiltonian idle = Hamiltonian::zero(space);
  std::vector<Vector> finals(cfg.n_trajectories);
  parallel_for(cfg.n_trajectories, cfg.jobs, [&](std::size_t i) {
    Rng r = Rng::stream(cfg.master_seed, i + 1);
    finals[i] = evolve_grw(psi0, idle, params, t, r).final_state().amplitudes();
  });
  MatrixMean mean(static_cast<Eigen::Index>(cfg.sites));
  for (const auto& v : finals) mean.add_pure(v);
  res.trajectory_distance = trace_distance(mean.mean(), expected);
  res.trajectory_mc_error = mean.trace_distance_error();
  return res;
}

// ---------------------------------------------------------------------------
// Protocol suite

struct ProtocolSuiteConfig {
  std::size_t no_signaling_pairs = 100;
  std::size_t grw_sites = 8;
  std::size_t grw_runs = 10000;
  double grw_time = 1.0;
  double grw_particles = 1.0;
  std::size_t commitment_sites = 16;
  double commitment_delta = 1.0;
  double commitment_tau = 1.0;
  double hold_time = 1.0;
  double rate_times_hold = 20.0;                        // the GRW regime point
  std::vector<double> commitment_grid{0.0, 1.0, 2.0, 5.0, 20.0};
  std::size_t commitment_runs = 100000;
  std::size_t grid_runs = 10000;
  std::uint64_t master_seed = 1;

  void validate() const {
    if (no_signaling_pairs < 1) throw std::invalid_argument("no_signaling_pairs must be at least 1");
    if (grw_sites < 2 || commitment_sites < 4) throw std::invalid_argument("lattices too small");
    if (grw_runs < 2 || commitment_runs < 1 || grid_runs < 1) throw std::invalid_argument("run counts must be positive");
    if (!(hold_time > 0.0)) throw std::invalid_argument("hold_time must be positive");
    if (!(rate_times_hold >= 0.0)) throw std::invalid_argument("rate_times_hold must be non-negative");
    for (double x : commitment_grid)
      if (!(x >= 0.0)) throw std::invalid_argument("commitment_grid values must be non-negative");
  }

  GrwParams commitment_params(double rate_times_hold_value) const {
    GrwParams p;
    p.delta = commitment_delta;
    p.tau = commitment_tau;
    p.lattices["bob"] = Lattice{commitment_sites, 1.0};
    p.particle_counts["bob"] = rate_times_hold_value * commitment_tau / hold_time;
    return p;
  }
};

/// Random bipartite (joint state, Alice channel) pairs.
inline ProtocolReport random_no_signaling_sweep(std::size_t pairs, std::uint64_t seed) {
  Rng rng(seed);
  ProtocolReport rep;
  rep.name = "no_signaling_sweep";
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t da = 2 + k % 3, db = 2 + (k / 3) % 2;
    const SpaceSpec space({{"alice", da}, {"bob", db}});
    const DensityOperator joint = random_density(space, rng, 1 + k % (da * db));
    const Channel op = random_channel(SpaceSpec({{"alice", da}}), 1 + k % 4, rng);
    const ProtocolReport r = check_no_signaling(joint, {op}, {"bob"});
    worst = std::max(worst, r.metrics.at("max_bob_trace_distance"));
  }
  rep.set("pairs", static_cast<double>(pairs));
  rep.set("max_bob_trace_distance", worst);
  rep.log("sweep", "random joint states with random Alice channels");
  rep.verdict = worst <= 1e-12 ? Verdict::pass : Verdict::violation_detected;
  return rep;
}

inline std::vector<ProtocolReport> run_protocol_suite(const ProtocolSuiteConfig& cfg) {
  cfg.validate();
  std::vector<ProtocolReport> out;
  out.push_back(random_no_signaling_sweep(cfg.no_signaling_pairs, derive_seed(cfg.master_seed, 0)));

  {
    Rng rng(derive_seed(cfg.master_seed, 1));
    const SpaceSpec space({{"alice", cfg.grw_sites}, {"bob", 2}});
    const StateVector joint = random_state(space, rng);
    const SpaceSpec alice({{"alice", cfg.grw_sites}});
    const Hamiltonian h(alice, random_hermitian(static_cast<Eigen::Index>(cfg.grw_sites), rng));
    GrwParams p;
    p.delta = 1.0;
    p.tau = 1.0;
    p.lattices["alice"] = Lattice{cfg.grw_sites, 1.0};
    p.particle_counts["alice"] = cfg.grw_particles;
    out.push_back(check_no_signaling_grw(joint, {"bob"}, h, p, cfg.grw_time, cfg.grw_runs, derive_seed(cfg.master_seed, 2)));
  }

  const SpaceSpec qubit({{"q", 2}});
  Vector plus(2);
  plus << std::sqrt(0.5), std::sqrt(0.5);
  out.push_back(attempt_cloning(StateVector::basis(qubit, 0), StateVector::basis(qubit, 1)));
  out.back().name = "cloning_orthogonal";
  out.push_back(attempt_cloning(StateVector::basis(qubit, 0), StateVector(qubit, plus)));
  out.back().name = "cloning_overlapping";

  {
    const DensityOperator half(qubit, 0.5 * Matrix::Identity(2, 2));
    Vector minus(2);
    minus << std::sqrt(0.5), -std::sqrt(0.5);
    auto pure = [&](const Vector& v) { return DensityOperator::pure(StateVector(qubit, v)); };
    const Ensemble z{{{0.5, pure(Vector::Unit(2, 0))}, {0.5, pure(Vector::Unit(2, 1))}}};
    const Ensemble x{{{0.5, pure(plus)}, {0.5, pure(minus)}}};
    out.push_back(steer(half, z).report);
    out.back().name = "steering_z";
    out.push_back(steer(half, x).report);
    out.back().name = "steering_x";
  }

  auto commit = [&](Regime regime, double x, std::size_t runs) {
    const GrwParams p = cfg.commitment_params(x);
    CommitmentSetup setup = default_commitment(p);
    setup.n_runs = runs;
    Rng rng(derive_seed(cfg.master_seed, 3));
    return bit_commitment_demo(1, regime, p, cfg.hold_time, rng, setup);
  };
  out.push_back(commit(Regime::unitary, cfg.rate_times_hold, cfg.commitment_runs));
  out.back().name = "bit_commitment_unitary";
  out.push_back(commit(Regime::grw, cfg.rate_times_hold, cfg.commitment_runs));
  out.back().name = "bit_commitment_grw";

  ProtocolReport grid;
  grid.name = "bit_commitment_grid";
  double previous = 2.0;
  bool monotone = true;
  for (std::size_t k = 0; k < cfg.commitment_grid.size(); ++k) {
    const double x = cfg.commitment_grid[k];
    const double success = commit(Regime::grw, x, cfg.grid_runs).metrics.at("cheat_success");
    grid.set("rate_times_hold_" + std::to_string(k), x);
    grid.set("cheat_success_" + std::to_string(k), success);
    grid.log("grid", "N t/tau = " + std::to_string(x) + ": cheat success " + std::to_string(success));
    monotone = monotone && success <= previous;
    previous = success;
  }
  grid.set("monotone", monotone ? 1.0 : 0.0);
  grid.verdict = monotone ? Verdict::pass : Verdict::fail;
  out.push_back(std::move(grid));
  return out;
}

}  // namespace grwsim

#endif  // GRWSIM_EXPERIMENTS_HPP
