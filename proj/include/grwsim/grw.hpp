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

#ifndef GRWSIM_GRW_HPP
#define GRWSIM_GRW_HPP

// Discrete GRW spontaneous localization on 1-D position lattices.
//
// A positional subsystem is a ring of M sites with spacing a; site i sits at
// coordinate x_i = i·a and distances use the minimum image on the ring. A
// jump centred on site c multiplies the wavefunction by
//
//   j_c(x) = K · exp(−d(x, c)² / 2Δ²),   with Σ_x a·j_c(x)² = 1,
//
// and the centre is drawn with probability a·‖j_c ψ‖². On the ring K does
// not depend on c, so Σ_c a·j_c(x)² = 1 for every x: the centre probabilities
// sum to one exactly and the jump Kraus operators are complete.
//
// A subsystem carrying N wavefunction arguments (a collective coordinate)
// jumps at rate N/τ. Jumps happen at total rate ΣN/τ independent of the state;
// the jumping argument is uniform over all ΣN arguments.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grwsim/channels.hpp"
#include "grwsim/dynamics.hpp"
#include "grwsim/hilbert.hpp"
#include "grwsim/rng.hpp"

namespace grwsim {

struct Lattice {
  std::size_t sites = 2;
  double spacing = 1.0;

  double coordinate(std::size_t site) const { return static_cast<double>(site) * spacing; }

  /// Minimum-image distance between two sites.
  double distance(std::size_t i, std::size_t j) const {
    const std::size_t raw = i > j ? i - j : j - i;
    return static_cast<double>(std::min(raw, sites - raw)) * spacing;
  }

  /// Site whose coordinate is `x`; throws if `x` is not a lattice point.
  std::size_t site_of(double x) const {
    const double k = x / spacing;
    const double r = std::round(k);
    if (!(std::abs(k - r) <= 1e-9 * std::max(1.0, std::abs(k))) || r < 0.0 || r >= static_cast<double>(sites))
      throw std::invalid_argument("coordinate is not on the lattice");
    return static_cast<std::size_t>(r);
  }
};

/// Standard GRW constants, in SI units.
inline constexpr double kGrwDelta = 1e-7;  // m (10^-5 cm)
inline constexpr double kGrwTau = 1e15;    // s

struct GrwParams {
  double delta = kGrwDelta;
  double tau = kGrwTau;
  std::map<std::string, double> particle_counts;  // label → N
  std::map<std::string, Lattice> lattices;        // positional subsystems

  void validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("GRW delta must be positive");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("GRW tau must be positive");
    for (const auto& [label, lat] : lattices) {
      if (lat.sites < 2) throw std::invalid_argument("lattice '" + label + "' needs at least 2 sites");
      if (!(lat.spacing > 0.0)) throw std::invalid_argument("lattice '" + label + "' spacing must be positive");
    }
    for (const auto& [label, n] : particle_counts) {
      if (!(n >= 0.0) || !std::isfinite(n)) throw std::invalid_argument("particle count for '" + label + "' must be ≥ 0");
      if (n > 0.0 && !lattices.count(label))
        throw std::invalid_argument("subsystem '" + label + "' carries particles but has no lattice");
    }
  }

  double total_particles() const {
    double s = 0.0;
    for (const auto& [label, n] : particle_counts) s += n;
    return s;
  }

  const Lattice& lattice(const std::string& label) const {
    auto it = lattices.find(label);
    if (it == lattices.end()) throw std::invalid_argument("subsystem '" + label + "' is not positional");
    return it->second;
  }
};

/// ΣN / τ. Does not depend on the state.
inline double total_jump_rate(const GrwParams& params) {
  params.validate();
  return params.total_particles() / params.tau;
}

namespace detail {
/// j_0 on every site; on the ring j_c(x_i) = j_0(x_{(i−c) mod M}).
inline RealVector ring_profile(double delta, const Lattice& lat) {
  const auto m = static_cast<Eigen::Index>(lat.sites);
  RealVector g(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = lat.distance(static_cast<std::size_t>(i), 0);
    g(i) = std::exp(-d * d / (2.0 * delta * delta));
  }
  return g / std::sqrt(lat.spacing * g.squaredNorm());
}

inline RealVector shifted(const RealVector& base, std::size_t c) {
  const auto m = base.size();
  RealVector out(m);
  for (Eigen::Index i = 0; i < m; ++i) out(i) = base((i - static_cast<Eigen::Index>(c) + m) % m);
  return out;
}
}  // namespace detail

/// Jump-factor values j_c(x_i) on every site.
inline RealVector jump_profile(std::size_t center_site, double delta, const Lattice& lat) {
  if (center_site >= lat.sites) throw std::invalid_argument("jump centre is off the lattice");
  return detail::shifted(detail::ring_profile(delta, lat), center_site);
}

/// Diagonal jump operator centred at coordinate `center`.
inline Matrix localization_factor(double center, double delta, const Lattice& lat) {
  return jump_profile(lat.site_of(center), delta, lat).cast<cplx>().asDiagonal();
}

namespace detail {
inline void check_positional(const StateVector& state, const std::string& label, const GrwParams& params) {
  const Lattice& lat = params.lattice(label);
  if (state.space().dim(label) != lat.sites)
    throw std::invalid_argument("subsystem '" + label + "' dimension does not match its lattice");
}

/// Marginal site probabilities of one subsystem.
inline RealVector site_marginal(const Vector& amps, const IndexLayout& lay) {
  RealVector p = RealVector::Zero(static_cast<Eigen::Index>(lay.selected_dim()));
  for (std::size_t k = 0; k < lay.selected_dim(); ++k)
    for (std::size_t r = 0; r < lay.rest_dim(); ++r) p(k) += std::norm(amps(lay.full(k, r)));
  return p;
}

}  // namespace detail

/// Probability of each lattice site as the centre of the next jump on
/// subsystem `label`: P(c) = a·‖j_c ψ‖².
inline RealVector jump_center_distribution(const StateVector& state, const std::string& label, const GrwParams& params) {
  detail::check_positional(state, label, params);
  const Lattice& lat = params.lattice(label);
  const IndexLayout lay(state.space(), {label});
  const RealVector marginal = detail::site_marginal(state.amplitudes(), lay);
  const RealVector w = lat.spacing * detail::ring_profile(params.delta, lat).cwiseAbs2();
  const auto m = w.size();
  RealVector p = RealVector::Zero(m);
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index x = 0; x < m; ++x) p(c) += w((x - c + m) % m) * marginal(x);
  return p / p.sum();
}

struct JumpEvent {
  double time = 0.0;
  std::string subsystem;
  double center = 0.0;          // lattice coordinate
  std::size_t center_site = 0;
  double argument = 0.0;        // which of the subsystem's N arguments jumped
  double pre_jump_prob_density = 0.0;
  std::vector<std::pair<std::size_t, double>> branch_weights;  // post-jump site weights > 1e-12
};

struct JumpResult {
  StateVector state;
  JumpEvent event;
};

/// Samples a centre, multiplies by the jump factor, renormalizes.
inline JumpResult apply_jump(const StateVector& state, const std::string& label, const GrwParams& params, Rng& rng) {
  const RealVector dist = jump_center_distribution(state, label, params);
  const Lattice& lat = params.lattice(label);
  const std::size_t c = rng.discrete(std::span<const double>(dist.data(), static_cast<std::size_t>(dist.size())));
  const RealVector j = jump_profile(c, params.delta, lat);
  const IndexLayout lay(state.space(), {label});
  Vector amps = state.amplitudes();
  for (std::size_t k = 0; k < lay.selected_dim(); ++k)
    for (std::size_t r = 0; r < lay.rest_dim(); ++r) amps(lay.full(k, r)) *= j(static_cast<Eigen::Index>(k));
  if (amps.squaredNorm() < tol::annihilated) throw std::logic_error("apply_jump: state annihilated by jump factor");

  StateVector out(state.space(), std::move(amps));
  JumpEvent ev;
  ev.subsystem = label;
  ev.center_site = c;
  ev.center = lat.coordinate(c);
  ev.pre_jump_prob_density = dist(static_cast<Eigen::Index>(c)) / lat.spacing;
  const RealVector post = detail::site_marginal(out.amplitudes(), lay);
  for (Eigen::Index k = 0; k < post.size(); ++k)
    if (post(k) > 1e-12) ev.branch_weights.emplace_back(static_cast<std::size_t>(k), post(k));
  return {std::move(out), std::move(ev)};
}

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<double> times;        // snapshot times, ending at t_total
  std::vector<StateVector> states;  // snapshots (final state always last)
  std::vector<JumpEvent> jumps;

  const StateVector& final_state() const { return states.back(); }
};

struct EvolveOptions {
  bool snapshot_each_jump = false;
};

/// Exact unitary segments between jumps at exponential waiting times of rate
/// ΣN/τ. The first draw of every trajectory is the first waiting time.
inline Trajectory evolve_grw(const StateVector& state, const Hamiltonian& h, const GrwParams& params, double t_total,
                             Rng& rng, EvolveOptions opts = {}) {
  if (!(t_total >= 0.0) || !std::isfinite(t_total)) throw std::invalid_argument("evolve_grw: t_total must be ≥ 0");
  const double rate = total_jump_rate(params);
  for (const auto& [label, n] : params.particle_counts)
    if (n > 0.0) detail::check_positional(state, label, params);

  Trajectory traj;
  traj.seed = rng.seed();
  StateVector psi = state;
  double t = 0.0;
  if (rate > 0.0) {
    const double total_n = params.total_particles();
    while (true) {
      const double wait = rng.exponential(rate);
      if (t + wait >= t_total) break;
      psi = evolve_local(psi, h, wait);
      t += wait;

      // One draw picks the argument uniformly among all ΣN of them.
      double u = rng.uniform() * total_n;
      std::string label;
      for (const auto& [l, n] : params.particle_counts) {
        if (n <= 0.0) continue;
        label = l;
        if (u < n) break;
        u -= n;
      }
      auto [next, ev] = apply_jump(psi, label, params, rng);
      ev.time = t;
      ev.argument = std::min(std::floor(u), params.particle_counts.at(label) - 1.0);
      psi = std::move(next);
      traj.jumps.push_back(std::move(ev));
      if (opts.snapshot_each_jump) {
        traj.times.push_back(t);
        traj.states.push_back(psi);
      }
    }
  }
  psi = evolve_local(psi, h, t_total - t);
  traj.times.push_back(t_total);
  traj.states.push_back(std::move(psi));
  return traj;
}

/// First-order GRW channel over dt: √(1−p)·1 and √(p·(N_s/ΣN)·a)·J_c for each
/// positional subsystem s and centre c, with p = rate·dt ≤ 0.1.
inline Channel grw_channel(const GrwParams& params, double dt, const SpaceSpec& space) {
  const double rate = total_jump_rate(params);
  const double p = rate * dt;
  if (!(dt >= 0.0)) throw std::invalid_argument("grw_channel: dt must be ≥ 0");
  if (p > 0.1) throw std::invalid_argument("grw_channel: rate·dt exceeds 0.1");
  const auto d = static_cast<Eigen::Index>(space.total_dim());
  std::vector<Matrix> kraus{std::sqrt(1.0 - p) * Matrix::Identity(d, d)};
  if (p == 0.0) return Channel(space, std::move(kraus));
  const double total_n = params.total_particles();
  for (const auto& [label, n] : params.particle_counts) {
    if (n <= 0.0) continue;
    const Lattice& lat = params.lattice(label);
    if (space.dim(label) != lat.sites) throw std::invalid_argument("grw_channel: lattice size mismatch for '" + label + "'");
    const SpaceSpec local({{label, lat.sites}});
    const double weight = std::sqrt(p * (n / total_n) * lat.spacing);
    for (std::size_t c = 0; c < lat.sites; ++c) {
      const Matrix jc = jump_profile(c, params.delta, lat).cast<cplx>().asDiagonal();
      kraus.push_back(weight * embed_operator(jc, local, space));
    }
  }
  return Channel(space, std::move(kraus));
}

}  // namespace grwsim

#endif  // GRWSIM_GRW_HPP
