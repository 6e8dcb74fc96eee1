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

#ifndef GRWSIM_WIGNER_HPP
#define GRWSIM_WIGNER_HPP

// Wigner's-friend style experiment. A spin P is measured by an observer A
// whose memory is a massive lattice pointer; an outside observer then
// measures Ô = 2|Ψ₁⟩⟨Ψ₁| − 1 on P+A, where
//
//   |Ψ₀⟩ = (α|+z⟩ + β|−z⟩) ⊗ |ready⟩_A
//   |Ψ₁⟩ = α|+z⟩|see up⟩_A + β|−z⟩|see down⟩_A
//
// Regimes: `unitary` keeps |Ψ₁⟩; `grw` lets A's pointer undergo spontaneous
// localization for the measurement duration; `decoherence` entangles A's
// memory with an environment E carrying orthogonal records.
//
// Subsystem labels: P (spin; index 0 = +z, 1 = −z), A (memory lattice,
// ready site 0), B (optional record of A's outcome), E (environment),
// R (optional record of the Ô outcome).

#include <cmath>
#include <complex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "grwsim/dynamics.hpp"
#include "grwsim/grw.hpp"
#include "grwsim/hilbert.hpp"
#include "grwsim/parallel.hpp"
#include "grwsim/protocols.hpp"
#include "grwsim/rng.hpp"
#include "grwsim/stats.hpp"

namespace grwsim {

struct WignerConfig {
  cplx alpha{std::sqrt(0.5)};
  cplx beta{std::sqrt(0.5)};
  std::size_t pointer_sites = 32;
  double branch_separation = 10.0;  // in units of Δ
  double lattice_spacing = 1.0;
  /// Δ, τ and particle counts ("A", and "B" when the recorder is massive).
  /// Rescaled so collapse completes within the measurement duration.
  GrwParams grw{.delta = 1.0, .tau = 1.0, .particle_counts = {{"A", 30.0}}, .lattices = {}};
  double measurement_duration = 1.0;
  Regime regime = Regime::unitary;
  std::size_t n_trials = 10000;
  std::uint64_t master_seed = 1;
  bool communicate_to_B = false;
  std::size_t recorder_sites = 12;
  bool recorder_massive = false;
  std::size_t env_dim = 3;
  std::size_t jobs = 1;

  double memory_particles() const {
    auto it = grw.particle_counts.find("A");
    return it == grw.particle_counts.end() ? 0.0 : it->second;
  }

  std::size_t separation_sites() const {
    return static_cast<std::size_t>(std::llround(branch_separation * grw.delta / lattice_spacing));
  }

  /// GRW parameters with the lattices of A and B filled in. B only carries
  /// particles when the recorder is massive (default: as many as A).
  GrwParams grw_params() const {
    GrwParams p = grw;
    p.lattices["A"] = Lattice{pointer_sites, lattice_spacing};
    p.lattices["B"] = Lattice{recorder_sites, lattice_spacing};
    if (recorder_massive) {
      if (!p.particle_counts.count("B")) p.particle_counts["B"] = memory_particles();
    } else {
      p.particle_counts.erase("B");
    }
    return p;
  }

  void validate() const {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > tol::structural)
      throw std::invalid_argument("|alpha|^2 + |beta|^2 must equal 1");
    if (pointer_sites < 4) throw std::invalid_argument("pointer_sites must be at least 4");
    if (!(lattice_spacing > 0.0)) throw std::invalid_argument("lattice_spacing must be positive");
    if (!(branch_separation >= 5.0)) throw std::invalid_argument("branch_separation must be at least 5 (units of delta)");
    if (!(measurement_duration >= 0.0)) throw std::invalid_argument("measurement_duration must be non-negative");
    if (n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
    if (recorder_sites < 4) throw std::invalid_argument("recorder_sites must be at least 4");
    if (env_dim < 3) throw std::invalid_argument("env_dim must be at least 3");
    const GrwParams p = grw_params();
    p.validate();
    for (const auto& [label, n] : p.particle_counts)
      if (label != "A" && label != "B") throw std::invalid_argument("GRW particles only allowed on A or B, got '" + label + "'");
    const std::size_t up = pointer_sites / 4, down = up + separation_sites();
    if (down >= pointer_sites) throw std::invalid_argument("branch_separation does not fit on the pointer lattice");
    const Lattice& la = p.lattices.at("A");
    if (la.distance(up, down) < 5.0 * grw.delta - 1e-12)
      throw std::invalid_argument("pointer branches are closer than 5 delta on the ring");
    const Lattice& lb = p.lattices.at("B");
    if (recorder_massive && lb.distance(recorder_sites / 4, recorder_sites / 4 + recorder_sites / 2) < 5.0 * grw.delta - 1e-12)
      throw std::invalid_argument("massive recorder sites are closer than 5 delta");
  }
};

/// Two-valued observable 2|φ⟩⟨φ| − 1 with its +1 eigenvector kept for O(d)
/// measurement.
struct EigenstateObservable {
  Observable obs;
  StateVector eigenstate;
};

inline EigenstateObservable eigenstate_observable(const StateVector& phi) {
  const auto d = static_cast<Eigen::Index>(phi.dim());
  const Matrix p = outer(phi.amplitudes(), phi.amplitudes());
  Observable o = Observable::from_spectral(phi.space(), {-1.0, 1.0}, {Matrix::Identity(d, d) - p, p});
  return {std::move(o), phi};
}

struct RecordSpec {
  std::string label = "R";
  std::size_t sites = 3;
  std::size_t plus_site = 1;   // "see Ô = +1"
  std::size_t minus_site = 2;  // "see Ô = −1"
};

struct MeasureResult {
  double outcome;
  StateVector post;
  double probability;  // Born probability of the outcome obtained
  double p_plus;       // Born probability of the largest eigenvalue
};

namespace detail {
inline StateVector write_record(const StateVector& post, double outcome, const RecordSpec& rec) {
  const std::size_t site = outcome > 0.0 ? rec.plus_site : rec.minus_site;
  if (!post.space().contains(rec.label)) {
    return tensor(post, StateVector::basis(SpaceSpec({{rec.label, rec.sites}}), site));
  }
  const std::size_t dim = post.space().dim(rec.label);
  if (site >= dim) throw std::invalid_argument("record site out of range");
  if (reduced_state(post, {rec.label}).matrix()(0, 0).real() < 1.0 - tol::spectral)
    throw std::invalid_argument("record register is not in its ready state");
  return StateVector(post.space(), apply_local(swap_matrix(dim, 0, site), SpaceSpec({{rec.label, dim}}), post.space(),
                                               post.amplitudes()));
}
}  // namespace detail

/// Born-samples an observable on a subset of the state's subsystems and
/// applies the Lüders update; optionally writes the outcome into a separate
/// record register.
inline MeasureResult measure_o(const StateVector& state, const Observable& obs, Rng& rng,
                               const std::optional<RecordSpec>& record = std::nullopt) {
  const auto probs = local_born_probabilities(state, obs);
  std::vector<double> w;
  for (const auto& o : probs) w.push_back(o.probability);
  const std::size_t k = rng.discrete(w);
  const auto& es = obs.eigensystem();
  StateVector post(state.space(), apply_local(es.projectors[k], obs.space(), state.space(), state.amplitudes()));
  if (record) post = detail::write_record(post, es.values[k], *record);
  return {es.values[k], std::move(post), w[k], w.back()};
}

/// Same, using the rank-one structure of an eigenstate observable.
inline MeasureResult measure_o(const StateVector& state, const EigenstateObservable& o, Rng& rng,
                               const std::optional<RecordSpec>& record = std::nullopt) {
  const IndexLayout lay(state.space(), o.eigenstate.space().labels());
  const Matrix g = lay.gather(state.amplitudes());  // d_obs × rest
  const Vector& phi = o.eigenstate.amplitudes();
  const Eigen::RowVectorXcd v = phi.adjoint() * g;  // (⟨φ| ⊗ 1)|ψ⟩
  const double p_plus = std::min(1.0, v.squaredNorm());
  const double u = rng.uniform();
  Matrix proj = phi * v;
  double outcome = 1.0, prob = p_plus;
  if (!(u < p_plus)) {
    proj = g - proj;
    outcome = -1.0;
    prob = 1.0 - p_plus;
  }
  StateVector post(state.space(), lay.scatter(proj));
  if (record) post = detail::write_record(post, outcome, *record);
  return {outcome, std::move(post), prob, p_plus};
}

/// Precomputed operators and states for one configuration.
class WignerSetup {
 public:
  explicit WignerSetup(WignerConfig cfg)
      : cfg_(std::move(cfg)),
        grw_((cfg_.validate(), cfg_.grw_params())),
        p_space_({{"P", 2}}),
        a_space_({{"A", cfg_.pointer_sites}}),
        b_space_({{"B", cfg_.recorder_sites}}),
        pa_space_(p_space_.concat(a_space_)),
        up_site_(cfg_.pointer_sites / 4),
        down_site_(up_site_ + cfg_.separation_sites()),
        b_up_(cfg_.recorder_sites / 4),
        b_down_(b_up_ + cfg_.recorder_sites / 2),
        spin_z_(p_space_, spin_z_matrix()),
        memory_(a_space_, memory_matrix(cfg_.pointer_sites, up_site_, down_site_)),
        spin_coupling_(measurement_coupling(spin_z_, {"A", cfg_.pointer_sites}, 1.0,
                                            std::vector<std::size_t>{down_site_, up_site_})),
        initial_(make_initial()),
        psi1_(make_psi1()),
        o_hat_(make_o_hat()) {
    b_coupling_u_ = measurement_coupling(memory_, {"B", cfg_.recorder_sites}, 1.0,
                                         std::vector<std::size_t>{b_down_, kReadyIndex, b_up_})
                        .propagator(1.0);
  }

  const WignerConfig& config() const { return cfg_; }
  const GrwParams& grw() const { return grw_; }
  const SpaceSpec& pa_space() const { return pa_space_; }
  std::size_t up_site() const { return up_site_; }
  std::size_t down_site() const { return down_site_; }
  std::size_t b_up_site() const { return b_up_; }
  std::size_t b_down_site() const { return b_down_; }
  const Observable& spin_z() const { return spin_z_; }
  /// +1 on "see up", −1 on "see down", 0 elsewhere on A's lattice.
  const Observable& memory() const { return memory_; }
  const Hamiltonian& spin_coupling() const { return spin_coupling_; }
  const StateVector& initial() const { return initial_; }
  /// |Ψ₁⟩ built directly from its definition.
  const StateVector& psi1() const { return psi1_; }
  const EigenstateObservable& o_hat() const { return o_hat_; }

  /// Copies A's memory into B's register (B appended in its ready state).
  StateVector communicate(const StateVector& s) const {
    const StateVector with_b = tensor(s, StateVector::basis(b_space_, kReadyIndex));
    return StateVector(with_b.space(), apply_local(b_coupling_u_, a_space_.concat(b_space_), with_b.space(), with_b.amplitudes()));
  }

  /// A's memory decohered against a fresh environment E with orthogonal records.
  StateVector decohere_memory(const StateVector& s) const {
    const StateVector with_e = tensor(s, StateVector::basis(SpaceSpec({{"E", cfg_.env_dim}}), kReadyIndex));
    return decohere(with_e, DecoherenceSpec::perfect(memory_, "E"));
  }

 private:
  static Matrix spin_z_matrix() {
    Matrix z = Matrix::Zero(2, 2);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    return z;
  }

  static Matrix memory_matrix(std::size_t m, std::size_t up, std::size_t down) {
    Matrix mem = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    mem(static_cast<Eigen::Index>(up), static_cast<Eigen::Index>(up)) = 1.0;
    mem(static_cast<Eigen::Index>(down), static_cast<Eigen::Index>(down)) = -1.0;
    return mem;
  }

  StateVector make_initial() const {
    Vector spin(2);
    spin << cfg_.alpha, cfg_.beta;
    return tensor(StateVector(p_space_, spin), StateVector::basis(a_space_, kReadyIndex));
  }

  StateVector make_psi1() const {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(pa_space_.total_dim()));
    v(static_cast<Eigen::Index>(up_site_)) = cfg_.alpha;
    v(static_cast<Eigen::Index>(cfg_.pointer_sites + down_site_)) = cfg_.beta;
    return StateVector(pa_space_, v);
  }

  EigenstateObservable make_o_hat() const {
    if (std::abs(cfg_.alpha) < 1e-12 || std::abs(cfg_.beta) < 1e-12)
      return {Observable(pa_space_, 2.0 * outer(psi1_.amplitudes(), psi1_.amplitudes()) -
                                        Matrix::Identity(static_cast<Eigen::Index>(pa_space_.total_dim()),
                                                         static_cast<Eigen::Index>(pa_space_.total_dim()))),
              psi1_};
    return eigenstate_observable(psi1_);
  }

  WignerConfig cfg_;
  GrwParams grw_;
  SpaceSpec p_space_, a_space_, b_space_, pa_space_;
  std::size_t up_site_, down_site_, b_up_, b_down_;
  Observable spin_z_, memory_;
  Hamiltonian spin_coupling_;
  StateVector initial_, psi1_;
  EigenstateObservable o_hat_;
  Matrix b_coupling_u_;
};

inline StateVector build_initial(const WignerConfig& cfg) { return WignerSetup(cfg).initial(); }

/// Ô on P+A. Throws when α or β vanishes: Ô then commutes with σ_z ⊗ 1.
inline Observable o_observable(const WignerConfig& cfg) {
  if (std::abs(cfg.alpha) < 1e-12 || std::abs(cfg.beta) < 1e-12)
    throw std::invalid_argument("o_observable: alpha and beta must both be non-zero");
  return WignerSetup(cfg).o_hat().obs;
}

struct OCommutators {
  double with_spin;    // ‖[Ô, σ_z ⊗ 1]‖₂
  double with_memory;  // ‖[Ô, 1 ⊗ M_A]‖₂
};

inline OCommutators o_commutators(const WignerSetup& setup) {
  const Matrix& o = setup.o_hat().obs.matrix();
  const Matrix z = embed_operator(setup.spin_z().matrix(), setup.spin_z().space(), setup.pa_space());
  const Matrix m = embed_operator(setup.memory().matrix(), setup.memory().space(), setup.pa_space());
  auto norm2 = [](const Matrix& c) { return Eigen::JacobiSVD<Matrix>(c).singularValues()(0); };
  return {norm2(o * z - z * o), norm2(o * m - m * o)};
}

struct SpinMeasurement {
  StateVector state;
  std::optional<Trajectory> trajectory;
};

/// Spin measurement by A under the configured regime. `grw` evolves the
/// post-interaction state with spontaneous localization for the measurement
/// duration; `decoherence` appends E and records A's memory in it.
inline SpinMeasurement run_spin_measurement(const StateVector& state, const WignerSetup& setup, Rng& rng) {
  if (!(state.space() == setup.pa_space())) throw std::invalid_argument("run_spin_measurement: expected a P+A state");
  StateVector coupled = schrodinger_step(state, setup.spin_coupling(), 1.0);
  switch (setup.config().regime) {
    case Regime::unitary:
      return {std::move(coupled), std::nullopt};
    case Regime::grw: {
      Trajectory tr = evolve_grw(coupled, Hamiltonian::zero(coupled.space()), setup.grw(), setup.config().measurement_duration, rng);
      StateVector fin = tr.final_state();
      return {std::move(fin), std::move(tr)};
    }
    case Regime::decoherence:
      return {setup.decohere_memory(coupled), std::nullopt};
  }
  throw std::logic_error("unreachable regime");
}

inline SpinMeasurement run_spin_measurement(const StateVector& state, const WignerConfig& cfg, Rng& rng) {
  return run_spin_measurement(state, WignerSetup(cfg), rng);
}

struct TrialRecord {
  std::size_t trial = 0;
  Regime regime = Regime::unitary;
  int spin_branch = 0;  // +1 "up", −1 "down", 0 neither
  int o_outcome = 0;
  double p_plus = 0.0;                // Born probability of Ô = +1
  double post_fidelity = 0.0;         // ⟨Ψ₁|ρ_PA|Ψ₁⟩ after Ô
  double anticorrelated = 0.0;        // P(+z ∧ down) + P(−z ∧ up) after Ô
  std::size_t jumps = 0;
};

struct WignerResult {
  WignerConfig config;
  Estimate p_o_plus;
  double p_o_plus_born = 0.0;  // mean Born probability over trials
  // Empty when no trial ended in that branch.
  std::optional<Estimate> p_o_plus_given_up;
  std::optional<Estimate> p_o_plus_given_down;
  double option_a_given_up = 0.0;    // |α|²
  double option_a_given_down = 0.0;  // |β|²
  double option_b_prediction = 1.0;
  double mixture_prediction = 0.0;  // |α|⁴ + |β|⁴
  double collapse_probability = 0.0;
  std::optional<double> recoherence_probability;
  double min_post_fidelity = 1.0;
  double max_anticorrelated = 0.0;
  std::vector<TrialRecord> trials;
};

namespace detail {
inline double anticorrelated_probability(const StateVector& s, const WignerSetup& setup) {
  const IndexLayout lay(s.space(), {"P", "A"});
  const std::size_t m = setup.config().pointer_sites;
  double p = 0.0;
  for (std::size_t r = 0; r < lay.rest_dim(); ++r) {
    p += std::norm(s.amplitudes()(lay.full(setup.down_site(), r)));      // +z, down
    p += std::norm(s.amplitudes()(lay.full(m + setup.up_site(), r)));    // −z, up
  }
  return p;
}

/// Born-samples which outcome the record `label` holds: +1 up, −1 down, 0 other.
inline int read_branch(const StateVector& s, const std::string& label, std::size_t up, std::size_t down, Rng& rng) {
  const DensityOperator r = reduced_state(s, {label});
  const RealVector diag = r.matrix().diagonal().real().cwiseMax(0.0);
  const std::size_t k = rng.discrete(std::span<const double>(diag.data(), static_cast<std::size_t>(diag.size())));
  return k == up ? 1 : (k == down ? -1 : 0);
}
}  // namespace detail

inline WignerResult run_experiment(const WignerConfig& cfg) {
  const WignerSetup setup(cfg);
  const double a2 = std::norm(cfg.alpha), b2 = std::norm(cfg.beta);

  // Deterministic part of the unitary and decoherence regimes.
  std::optional<StateVector> fixed;
  std::optional<double> recoherence;
  {
    Rng unused(0);
    if (cfg.regime != Regime::grw) {
      StateVector s = run_spin_measurement(setup.initial(), setup, unused).state;
      if (cfg.communicate_to_B) s = setup.communicate(s);
      // Ô extended to everything A's record reached: the branches recombine.
      if (cfg.regime == Regime::decoherence) recoherence = measure_o(s, eigenstate_observable(s), unused).p_plus;
      fixed = std::move(s);
    }
  }

  std::vector<TrialRecord> trials(cfg.n_trials);
  parallel_for(cfg.n_trials, cfg.jobs, [&](std::size_t i) {
    Rng rng = Rng::stream(cfg.master_seed, i);
    TrialRecord rec;
    rec.trial = i;
    rec.regime = cfg.regime;
    int branch = 0;
    StateVector s = setup.initial();
    if (fixed) {
      s = *fixed;
    } else {
      SpinMeasurement sm = run_spin_measurement(setup.initial(), setup, rng);
      rec.jumps = sm.trajectory ? sm.trajectory->jumps.size() : 0;
      s = std::move(sm.state);
      const DensityOperator a = reduced_state(s, {"A"});
      const double w_up = a.matrix()(setup.up_site(), setup.up_site()).real();
      const double w_down = a.matrix()(setup.down_site(), setup.down_site()).real();
      branch = w_up > w_down ? 1 : -1;
      if (cfg.communicate_to_B) s = setup.communicate(s);
    }
    const MeasureResult m = measure_o(s, setup.o_hat(), rng);
    rec.o_outcome = m.outcome > 0.0 ? 1 : -1;
    rec.p_plus = m.p_plus;
    rec.anticorrelated = detail::anticorrelated_probability(m.post, setup);
    {
      const IndexLayout lay(m.post.space(), setup.pa_space().labels());
      rec.post_fidelity = (setup.psi1().amplitudes().adjoint() * lay.gather(m.post.amplitudes())).squaredNorm();
    }
    if (cfg.regime != Regime::grw) {
      // Which record A (or her environment, or B) holds after Ô.
      if (m.post.space().contains("E"))
        branch = detail::read_branch(m.post, "E", 2, 0, rng);
      else if (m.post.space().contains("B"))
        branch = detail::read_branch(m.post, "B", setup.b_up_site(), setup.b_down_site(), rng);
      else
        branch = detail::read_branch(m.post, "A", setup.up_site(), setup.down_site(), rng);
    }
    rec.spin_branch = branch;
    trials[i] = rec;
  });

  WignerResult res;
  res.config = cfg;
  std::size_t plus = 0, up = 0, up_plus = 0, down = 0, down_plus = 0;
  double born = 0.0;
  for (const auto& t : trials) {
    plus += t.o_outcome > 0;
    born += t.p_plus;
    if (t.spin_branch > 0) {
      ++up;
      up_plus += t.o_outcome > 0;
    } else if (t.spin_branch < 0) {
      ++down;
      down_plus += t.o_outcome > 0;
    }
    res.max_anticorrelated = std::max(res.max_anticorrelated, t.anticorrelated);
    if (cfg.regime == Regime::unitary) res.min_post_fidelity = std::min(res.min_post_fidelity, t.post_fidelity);
  }
  res.p_o_plus = binomial(plus, trials.size());
  res.p_o_plus_born = born / static_cast<double>(trials.size());
  if (up > 0) res.p_o_plus_given_up = binomial(up_plus, up);
  if (down > 0) res.p_o_plus_given_down = binomial(down_plus, down);
  res.option_a_given_up = a2;
  res.option_a_given_down = b2;
  res.option_b_prediction = 1.0;
  res.mixture_prediction = a2 * a2 + b2 * b2;
  if (cfg.regime == Regime::grw)
    res.collapse_probability = 1.0 - std::exp(-total_jump_rate(setup.grw()) * cfg.measurement_duration);
  res.recoherence_probability = recoherence;
  res.trials = std::move(trials);
  return res;
}

// ---------------------------------------------------------------------------
// Second-level observable

struct O2Extension {
  EigenstateObservable o2;
  StateVector phi;
};

/// Ô₂ = 2|Φ⟩⟨Φ| − 1 on P+A+<record>, for the state Φ of those three
/// subsystems. Other subsystems are traced out; Φ must then still be pure.
inline O2Extension extend_with_o2(const StateVector& state, const std::string& record_label = "B") {
  const std::set<std::string> keep{"P", "A", record_label};
  for (const auto& l : keep)
    if (!state.space().contains(l)) throw std::invalid_argument("extend_with_o2: state lacks subsystem '" + l + "'");
  StateVector phi = state;
  if (state.space().size() != 3) {
    const DensityOperator r = reduced_state(state, keep);
    if (r.purity() < 1.0 - tol::structural) throw std::invalid_argument("extend_with_o2: P+A+record is not in a pure state");
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.matrix());
    phi = StateVector(r.space(), es.eigenvectors().col(es.eigenvectors().cols() - 1));
  }
  EigenstateObservable o2 = eigenstate_observable(phi);
  return {std::move(o2), std::move(phi)};
}

struct O2Result {
  Estimate p_o2_plus;
  double p_o2_plus_born = 0.0;
  double unitary_prediction = 1.0;
  double mixture = 0.0;
};

/// Repeats the Ô comparison one level up: Φ is the P+A+B state right after A
/// tells B her outcome. Unitary: Φ persists. GRW: A's pointer (and B's, when
/// massive) localize for the measurement duration before Ô₂ is measured.
inline O2Result run_o2_comparison(const WignerConfig& cfg) {
  WignerConfig c = cfg;
  c.communicate_to_B = true;
  const WignerSetup setup(c);
  const StateVector phi = setup.communicate(setup.psi1());
  const O2Extension ext = extend_with_o2(phi);
  std::vector<int> outcome(c.n_trials, 0);
  std::vector<double> born(c.n_trials, 0.0);
  parallel_for(c.n_trials, c.jobs, [&](std::size_t i) {
    Rng rng = Rng::stream(c.master_seed, i);
    StateVector s = phi;
    if (c.regime == Regime::grw)
      s = evolve_grw(phi, Hamiltonian::zero(phi.space()), setup.grw(), c.measurement_duration, rng).final_state();
    else if (c.regime == Regime::decoherence)
      throw std::invalid_argument("run_o2_comparison: regime must be unitary or grw");
    const MeasureResult m = measure_o(s, ext.o2, rng);
    outcome[i] = m.outcome > 0.0 ? 1 : 0;
    born[i] = m.p_plus;
  });
  O2Result r;
  std::size_t plus = 0;
  double b = 0.0;
  for (std::size_t i = 0; i < c.n_trials; ++i) {
    plus += static_cast<std::size_t>(outcome[i]);
    b += born[i];
  }
  r.p_o2_plus = binomial(plus, c.n_trials);
  r.p_o2_plus_born = b / static_cast<double>(c.n_trials);
  const double a2 = std::norm(c.alpha), b2 = std::norm(c.beta);
  r.mixture = a2 * a2 + b2 * b2;
  return r;
}

}  // namespace grwsim

#endif  // GRWSIM_WIGNER_HPP
