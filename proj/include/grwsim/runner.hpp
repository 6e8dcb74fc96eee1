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

#ifndef GRWSIM_RUNNER_HPP
#define GRWSIM_RUNNER_HPP

// Config-driven experiment runner.
//
// Config schema (JSON, schema_version 1):
//
//   {
//     "schema_version": 1,
//     "experiment": "wigner" | "grw-trajectory" | "protocols" | "dilation" | "sweep",
//     "master_seed": <unsigned integer>,            required
//     "output_dir": "<path>",                       default "."
//     "formats": ["json", "csv", "jsonl"],          default all three
//     "parameters": { ... }                         experiment specific
//   }
//
// Payload files never contain timing data; manifest.json carries the wall
// time and a SHA-256 hash of every payload file.
//
// Exit codes: 0 success, 2 configuration error (nothing written), 3 runtime
// fault.

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grwsim/experiments.hpp"
#include "grwsim/serialize.hpp"
#include "grwsim/wigner.hpp"

#ifndef GRWSIM_VERSION
#define GRWSIM_VERSION "0.0.0"
#endif

namespace grwsim::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Invalid configuration; `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("config error at '" + key + "': " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// ---------------------------------------------------------------------------
// Typed access to a parameter table

class ParamReader {
 public:
  ParamReader(const json& table, std::string path) : table_(table), path_(std::move(path)) {
    if (!table_.is_object()) throw ConfigError(path_, "expected an object");
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "expected a finite number");
    return x;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (v->is_number_unsigned()) return v->get<std::size_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0) return static_cast<std::size_t>(v->get<long long>());
    if (v->is_number_float()) {
      const double x = v->get<double>();
      if (x >= 0.0 && x == std::floor(x) && x < 9.0e15) return static_cast<std::size_t>(x);
    }
    throw ConfigError(at(key), "expected a non-negative integer");
  }

  bool flag(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    return v->get<std::string>();
  }

  /// A number or a [re, im] pair.
  cplx complex(const std::string& key, cplx fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (v->is_number()) return {v->get<double>(), 0.0};
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number())
      return {(*v)[0].get<double>(), (*v)[1].get<double>()};
    throw ConfigError(at(key), "expected a number or [re, im]");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : *v) {
      if (!x.is_number()) throw ConfigError(at(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  const json* raw(const std::string& key) { return find(key); }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [k, v] : table_.items())
      if (!seen_.count(k)) throw ConfigError(at(k), "unknown parameter");
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = table_.find(key);
    return it == table_.end() ? nullptr : &*it;
  }

  const json& table_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Runs `fn`, turning validation failures into a ConfigError at `key`.
template <class Fn>
void validate_at(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

inline json complex_to_json(cplx z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

inline json estimate_to_json(const Estimate& e) { return json{{"est", e.est}, {"stderr", e.se}, {"count", e.count}}; }

/// Shortest round-trip text for a double.
inline std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Experiment configs (parse ⇄ echo)

inline WignerConfig parse_wigner(const json& params, std::uint64_t seed, std::size_t jobs) {
  ParamReader r(params, "parameters");
  WignerConfig c;
  c.alpha = r.complex("alpha", c.alpha);
  c.beta = r.complex("beta", c.beta);
  c.pointer_sites = r.count("pointer_sites", c.pointer_sites);
  c.branch_separation = r.number("branch_separation", c.branch_separation);
  c.lattice_spacing = r.number("lattice_spacing", c.lattice_spacing);
  c.grw.delta = r.number("delta", c.grw.delta);
  c.grw.tau = r.number("tau", c.grw.tau);
  c.grw.particle_counts["A"] = r.number("memory_particles", c.memory_particles());
  if (r.raw("recorder_particles")) c.grw.particle_counts["B"] = r.number("recorder_particles", 0.0);
  c.measurement_duration = r.number("measurement_duration", c.measurement_duration);
  const std::string regime = r.text("regime", to_string(c.regime));
  validate_at(r.at("regime"), [&] { c.regime = regime_from_string(regime); });
  c.n_trials = r.count("n_trials", c.n_trials);
  c.communicate_to_B = r.flag("communicate_to_B", c.communicate_to_B);
  c.recorder_sites = r.count("recorder_sites", c.recorder_sites);
  c.recorder_massive = r.flag("recorder_massive", c.recorder_massive);
  c.env_dim = r.count("env_dim", c.env_dim);
  if (r.flag("o2", false) && c.regime == Regime::decoherence)
    throw ConfigError(r.at("o2"), "the second-level comparison needs regime unitary or grw");
  r.finish();
  c.master_seed = seed;
  c.jobs = jobs;
  validate_at("parameters", [&] { c.validate(); });
  return c;
}

inline json echo_wigner(const WignerConfig& c, bool o2) {
  json j{{"alpha", complex_to_json(c.alpha)},
         {"beta", complex_to_json(c.beta)},
         {"pointer_sites", c.pointer_sites},
         {"branch_separation", c.branch_separation},
         {"lattice_spacing", c.lattice_spacing},
         {"delta", c.grw.delta},
         {"tau", c.grw.tau},
         {"memory_particles", c.memory_particles()},
         {"measurement_duration", c.measurement_duration},
         {"regime", to_string(c.regime)},
         {"n_trials", c.n_trials},
         {"communicate_to_B", c.communicate_to_B},
         {"recorder_sites", c.recorder_sites},
         {"recorder_massive", c.recorder_massive},
         {"env_dim", c.env_dim},
         {"o2", o2}};
  if (c.grw.particle_counts.count("B")) j["recorder_particles"] = c.grw.particle_counts.at("B");
  return j;
}

inline TwoBranchConfig parse_two_branch(const json& params, std::uint64_t seed, std::size_t jobs) {
  ParamReader r(params, "parameters");
  TwoBranchConfig c;
  c.sites = r.count("sites", c.sites);
  c.spacing = r.number("spacing", c.spacing);
  c.delta = r.number("delta", c.delta);
  c.tau = r.number("tau", c.tau);
  c.particles = r.number("particles", c.particles);
  c.duration = r.number("duration", c.duration);
  c.separation = r.number("separation", c.separation);
  c.alpha = r.complex("alpha", c.alpha);
  c.beta = r.complex("beta", c.beta);
  c.n_trajectories = r.count("n_trajectories", c.n_trajectories);
  c.export_trajectories = r.count("export_trajectories", c.export_trajectories);
  c.kill_threshold = r.number("kill_threshold", c.kill_threshold);
  r.finish();
  c.master_seed = seed;
  c.jobs = jobs;
  validate_at("parameters", [&] { c.validate(); });
  return c;
}

inline json echo_two_branch(const TwoBranchConfig& c) {
  return json{{"sites", c.sites},
              {"spacing", c.spacing},
              {"delta", c.delta},
              {"tau", c.tau},
              {"particles", c.particles},
              {"duration", c.duration},
              {"separation", c.separation},
              {"alpha", complex_to_json(c.alpha)},
              {"beta", complex_to_json(c.beta)},
              {"n_trajectories", c.n_trajectories},
              {"export_trajectories", c.export_trajectories},
              {"kill_threshold", c.kill_threshold}};
}

inline DilationCheckConfig parse_dilation(const json& params, std::uint64_t seed, std::size_t jobs) {
  ParamReader r(params, "parameters");
  DilationCheckConfig c;
  c.sites = r.count("sites", c.sites);
  c.spacing = r.number("spacing", c.spacing);
  c.delta = r.number("delta", c.delta);
  c.tau = r.number("tau", c.tau);
  c.particles = r.number("particles", c.particles);
  c.dt = r.number("dt", c.dt);
  c.n_states = r.count("n_states", c.n_states);
  c.steps = r.count("steps", c.steps);
  c.n_pure_states = r.count("n_pure_states", c.n_pure_states);
  c.n_trajectories = r.count("n_trajectories", c.n_trajectories);
  c.trajectory_steps = r.count("trajectory_steps", c.trajectory_steps);
  r.finish();
  c.master_seed = seed;
  c.jobs = jobs;
  validate_at("parameters", [&] {
    c.validate();
    (void)grw_channel(c.params(), c.dt, SpaceSpec({{"x", c.sites}}));
  });
  return c;
}

inline json echo_dilation(const DilationCheckConfig& c) {
  return json{{"sites", c.sites},         {"spacing", c.spacing},
              {"delta", c.delta},         {"tau", c.tau},
              {"particles", c.particles}, {"dt", c.dt},
              {"n_states", c.n_states},   {"steps", c.steps},
              {"n_pure_states", c.n_pure_states}, {"n_trajectories", c.n_trajectories},
              {"trajectory_steps", c.trajectory_steps}};
}

inline ProtocolSuiteConfig parse_protocols(const json& params, std::uint64_t seed) {
  ParamReader r(params, "parameters");
  ProtocolSuiteConfig c;
  c.no_signaling_pairs = r.count("no_signaling_pairs", c.no_signaling_pairs);
  c.grw_sites = r.count("grw_sites", c.grw_sites);
  c.grw_runs = r.count("grw_runs", c.grw_runs);
  c.grw_time = r.number("grw_time", c.grw_time);
  c.grw_particles = r.number("grw_particles", c.grw_particles);
  c.commitment_sites = r.count("commitment_sites", c.commitment_sites);
  c.commitment_delta = r.number("commitment_delta", c.commitment_delta);
  c.commitment_tau = r.number("commitment_tau", c.commitment_tau);
  c.hold_time = r.number("hold_time", c.hold_time);
  c.rate_times_hold = r.number("rate_times_hold", c.rate_times_hold);
  c.commitment_grid = r.numbers("commitment_grid", c.commitment_grid);
  c.commitment_runs = r.count("commitment_runs", c.commitment_runs);
  c.grid_runs = r.count("grid_runs", c.grid_runs);
  r.finish();
  c.master_seed = seed;
  validate_at("parameters", [&] {
    c.validate();
    const GrwParams p = c.commitment_params(c.rate_times_hold);
    p.validate();
    const CommitmentSetup s = default_commitment(p);
    if (p.lattice("bob").distance(s.left_site, s.right_site) < 5.0 * p.delta)
      throw std::invalid_argument("commitment sites closer than 5 delta");
  });
  return c;
}

inline json echo_protocols(const ProtocolSuiteConfig& c) {
  return json{{"no_signaling_pairs", c.no_signaling_pairs},
              {"grw_sites", c.grw_sites},
              {"grw_runs", c.grw_runs},
              {"grw_time", c.grw_time},
              {"grw_particles", c.grw_particles},
              {"commitment_sites", c.commitment_sites},
              {"commitment_delta", c.commitment_delta},
              {"commitment_tau", c.commitment_tau},
              {"hold_time", c.hold_time},
              {"rate_times_hold", c.rate_times_hold},
              {"commitment_grid", c.commitment_grid},
              {"commitment_runs", c.commitment_runs},
              {"grid_runs", c.grid_runs}};
}

// ---------------------------------------------------------------------------
// Payloads

struct Artifact {
  std::string name;
  std::string format;  // json | csv | jsonl
  std::string content;
};

inline json report_to_json(const ProtocolReport& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  return json{{"name", r.name}, {"verdict", to_string(r.verdict)}, {"metrics", std::move(m)}};
}

inline json wigner_to_json(const WignerResult& res) {
  auto cond = [](const std::optional<Estimate>& e) { return e ? estimate_to_json(*e) : json(nullptr); };
  json j{{"p_o_plus", estimate_to_json(res.p_o_plus)},
         {"p_o_plus_born_mean", res.p_o_plus_born},
         {"conditionals", {{"given_up", cond(res.p_o_plus_given_up)}, {"given_down", cond(res.p_o_plus_given_down)}}},
         {"analytic_refs",
          {{"option_a_given_up", res.option_a_given_up},
           {"option_a_given_down", res.option_a_given_down},
           {"option_b", res.option_b_prediction},
           {"mixture", res.mixture_prediction}}},
         {"n_trials", res.config.n_trials},
         {"master_seed", res.config.master_seed},
         {"regime", to_string(res.config.regime)},
         {"max_anticorrelated_probability", res.max_anticorrelated}};
  if (res.config.regime == Regime::unitary) j["min_post_fidelity"] = res.min_post_fidelity;
  if (res.config.regime == Regime::grw) j["collapse_probability"] = res.collapse_probability;
  if (res.recoherence_probability) j["recoherence_probability"] = *res.recoherence_probability;
  return j;
}

inline std::string wigner_trials_csv(const WignerResult& res) {
  std::ostringstream os;
  os << "trial,regime,spin_branch,o_outcome,p_plus,jumps\n";
  for (const auto& t : res.trials)
    os << t.trial << ',' << to_string(t.regime) << ',' << t.spin_branch << ',' << t.o_outcome << ',' << fmt(t.p_plus)
       << ',' << t.jumps << '\n';
  return os.str();
}

inline json two_branch_to_json(const TwoBranchSummary& s) {
  return json{{"collapse_fraction", estimate_to_json(s.collapse_fraction)},
              {"collapse_analytic", s.collapse_analytic},
              {"mean_jumps", s.mean_jumps},
              {"expected_jumps", s.expected_jumps},
              {"poisson_p_value", s.poisson_p_value},
              {"left_fraction", estimate_to_json(s.left_fraction)},
              {"left_expected", s.left_expected},
              {"branch_kill", estimate_to_json(s.branch_kill)},
              {"branch_kill_exact", s.branch_kill_exact},
              {"n_trajectories", s.config.n_trajectories},
              {"master_seed", s.config.master_seed}};
}

inline json dilation_to_json(const DilationCheckResult& r) {
  return json{{"kraus_count", r.kraus_count},
              {"env_dim", r.env_dim},
              {"completeness_error", r.completeness_error},
              {"isometry_error", r.isometry_error},
              {"max_dilation_distance", r.max_dilation_distance},
              {"max_iterated_distance", r.max_iterated_distance},
              {"trajectory_distance", r.trajectory_distance},
              {"trajectory_mc_error", r.trajectory_mc_error}};
}

/// A parsed experiment ready to run.
struct Plan {
  std::string experiment;
  json echo;  // effective parameters
  std::function<std::vector<Artifact>()> run;
  /// Flat numeric summary, used by sweep.
  std::function<std::map<std::string, double>()> summary;
};

inline Plan plan_for(const std::string& experiment, const json& params, std::uint64_t seed, std::size_t jobs);

inline Plan plan_wigner(const json& params, std::uint64_t seed, std::size_t jobs) {
  const WignerConfig c = parse_wigner(params, seed, jobs);
  const bool o2 = params.value("o2", false);
  Plan p;
  p.experiment = "wigner";
  p.echo = echo_wigner(c, o2);
  p.run = [c, o2, echo = p.echo] {
    const WignerResult res = run_experiment(c);
    json j = wigner_to_json(res);
    j["config_echo"] = echo;
    if (o2) {
      const O2Result r2 = run_o2_comparison(c);
      j["o2"] = {{"p_o2_plus", estimate_to_json(r2.p_o2_plus)},
                 {"p_o2_plus_born_mean", r2.p_o2_plus_born},
                 {"unitary_prediction", r2.unitary_prediction},
                 {"mixture", r2.mixture}};
    }
    return std::vector<Artifact>{{"wigner_result.json", "json", j.dump(2) + "\n"},
                                 {"wigner_trials.csv", "csv", wigner_trials_csv(res)}};
  };
  p.summary = [c] {
    const WignerResult res = run_experiment(c);
    std::map<std::string, double> m{{"p_o_plus", res.p_o_plus.est},
                                    {"p_o_plus_stderr", res.p_o_plus.se},
                                    {"p_o_plus_born_mean", res.p_o_plus_born},
                                    {"mixture", res.mixture_prediction},
                                    {"option_b", res.option_b_prediction}};
    if (res.p_o_plus_given_up) m["p_o_plus_given_up"] = res.p_o_plus_given_up->est;
    if (res.p_o_plus_given_down) m["p_o_plus_given_down"] = res.p_o_plus_given_down->est;
    return m;
  };
  return p;
}

inline Plan plan_two_branch(const json& params, std::uint64_t seed, std::size_t jobs) {
  const TwoBranchConfig c = parse_two_branch(params, seed, jobs);
  Plan p;
  p.experiment = "grw-trajectory";
  p.echo = echo_two_branch(c);
  p.run = [c, echo = p.echo] {
    const TwoBranchSummary s = run_two_branch(c);
    json j = two_branch_to_json(s);
    j["config_echo"] = echo;
    std::ostringstream csv;
    csv << "trajectory,jumps,branch,killed,first_jump_time\n";
    for (const auto& r : s.records)
      csv << r.trajectory << ',' << r.jumps << ',' << r.branch << ',' << (r.killed ? 1 : 0) << ','
          << fmt(r.first_jump_time) << '\n';
    std::string jsonl;
    for (std::size_t i = 0; i < s.exported.size(); ++i)
      for (const auto& ev : s.exported[i]) {
        json rec = to_json(ev);
        rec["trajectory"] = i;
        jsonl += rec.dump() + "\n";
      }
    return std::vector<Artifact>{{"grw_summary.json", "json", j.dump(2) + "\n"},
                                 {"grw_trajectories.csv", "csv", csv.str()},
                                 {"grw_jumps.jsonl", "jsonl", jsonl}};
  };
  p.summary = [c] {
    const TwoBranchSummary s = run_two_branch(c);
    return std::map<std::string, double>{{"collapse_fraction", s.collapse_fraction.est},
                                         {"collapse_fraction_stderr", s.collapse_fraction.se},
                                         {"collapse_analytic", s.collapse_analytic},
                                         {"mean_jumps", s.mean_jumps},
                                         {"left_fraction", s.left_fraction.est},
                                         {"branch_kill", s.branch_kill.est},
                                         {"branch_kill_exact", s.branch_kill_exact}};
  };
  return p;
}

inline Plan plan_dilation(const json& params, std::uint64_t seed, std::size_t jobs) {
  const DilationCheckConfig c = parse_dilation(params, seed, jobs);
  Plan p;
  p.experiment = "dilation";
  p.echo = echo_dilation(c);
  p.run = [c, echo = p.echo] {
    json j = dilation_to_json(run_dilation_check(c));
    j["config_echo"] = echo;
    j["master_seed"] = c.master_seed;
    return std::vector<Artifact>{{"dilation.json", "json", j.dump(2) + "\n"}};
  };
  p.summary = [c] {
    const DilationCheckResult r = run_dilation_check(c);
    return std::map<std::string, double>{{"max_dilation_distance", r.max_dilation_distance},
                                         {"max_iterated_distance", r.max_iterated_distance},
                                         {"trajectory_distance", r.trajectory_distance},
                                         {"trajectory_mc_error", r.trajectory_mc_error}};
  };
  return p;
}

inline Plan plan_protocols(const json& params, std::uint64_t seed) {
  const ProtocolSuiteConfig c = parse_protocols(params, seed);
  Plan p;
  p.experiment = "protocols";
  p.echo = echo_protocols(c);
  p.run = [c, echo = p.echo] {
    const auto reports = run_protocol_suite(c);
    json arr = json::array();
    std::string jsonl;
    for (const auto& r : reports) {
      arr.push_back(report_to_json(r));
      for (const auto& ev : r.transcript) jsonl += json{{"protocol", r.name}, {"step", ev.step}, {"detail", ev.detail}}.dump() + "\n";
    }
    json j{{"reports", std::move(arr)}, {"config_echo", echo}, {"master_seed", c.master_seed}};
    return std::vector<Artifact>{{"protocols.json", "json", j.dump(2) + "\n"},
                                 {"protocol_transcripts.jsonl", "jsonl", jsonl}};
  };
  p.summary = [c] {
    std::map<std::string, double> m;
    for (const auto& r : run_protocol_suite(c))
      for (const auto& [k, v] : r.metrics) m[r.name + "." + k] = v;
    return m;
  };
  return p;
}

inline Plan plan_sweep(const json& params, std::uint64_t seed, std::size_t jobs) {
  ParamReader r(params, "parameters");
  const std::string inner = r.text("experiment", "");
  if (inner.empty()) throw ConfigError(r.at("experiment"), "missing");
  if (inner == "sweep") throw ConfigError(r.at("experiment"), "a sweep cannot sweep a sweep");
  const std::string axis = r.text("axis", "");
  if (axis.empty()) throw ConfigError(r.at("axis"), "missing");
  const json* vals = r.raw("values");
  if (!vals) throw ConfigError(r.at("values"), "missing");
  const std::vector<double> values = r.numbers("values", {});
  if (values.empty()) throw ConfigError(r.at("values"), "needs at least one value");
  const json* base_ptr = r.raw("base");
  const json base = base_ptr ? *base_ptr : json::object();
  r.finish();

  const Plan base_plan = plan_for(inner, base, seed, jobs);
  if (!base_plan.echo.contains(axis)) throw ConfigError(r.at("axis"), "'" + axis + "' is not a parameter of " + inner);
  if (!base_plan.echo[axis].is_number() || base_plan.echo[axis].is_boolean())
    throw ConfigError(r.at("axis"), "'" + axis + "' is not a numeric parameter");

  std::vector<Plan> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    json pk = base_plan.echo;
    pk[axis] = values[k];
    try {
      rows.push_back(plan_for(inner, pk, seed, jobs));
    } catch (const ConfigError& e) {
      throw ConfigError(r.at("values") + "[" + std::to_string(k) + "]", e.what());
    }
  }
  Plan p;
  p.experiment = "sweep";
  p.echo = json{{"experiment", inner}, {"axis", axis}, {"values", values}, {"base", base_plan.echo}};
  p.run = [rows, values, axis, echo = p.echo, seed] {
    std::vector<std::map<std::string, double>> out;
    std::set<std::string> cols;
    for (const auto& row : rows) {
      out.push_back(row.summary());
      for (const auto& [k, v] : out.back()) cols.insert(k);
    }
    std::ostringstream csv;
    csv << axis;
    for (const auto& c : cols) csv << ',' << c;
    csv << '\n';
    json arr = json::array();
    for (std::size_t k = 0; k < out.size(); ++k) {
      csv << fmt(values[k]);
      json row{{axis, values[k]}};
      for (const auto& c : cols) {
        csv << ',';
        auto it = out[k].find(c);
        if (it != out[k].end()) {
          csv << fmt(it->second);
          row[c] = it->second;
        }
      }
      csv << '\n';
      arr.push_back(std::move(row));
    }
    json j{{"rows", std::move(arr)}, {"config_echo", echo}, {"master_seed", seed}};
    return std::vector<Artifact>{{"sweep.csv", "csv", csv.str()}, {"sweep.json", "json", j.dump(2) + "\n"}};
  };
  return p;
}

inline Plan plan_for(const std::string& experiment, const json& params, std::uint64_t seed, std::size_t jobs) {
  if (experiment == "wigner") return plan_wigner(params, seed, jobs);
  if (experiment == "grw-trajectory") return plan_two_branch(params, seed, jobs);
  if (experiment == "dilation") return plan_dilation(params, seed, jobs);
  if (experiment == "protocols") return plan_protocols(params, seed);
  if (experiment == "sweep") return plan_sweep(params, seed, jobs);
  throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
}

// ---------------------------------------------------------------------------
// Run configuration

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string experiment;
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  std::set<std::string> formats{"json", "csv", "jsonl"};
  json parameters = json::object();
};

inline RunConfig parse_run_config(const json& doc, const Overrides& ov = {}) {
  if (!doc.is_object()) throw ConfigError("<document>", "expected a JSON object");
  ParamReader r(doc, "");
  auto key = [](const std::string& k) { return k; };
  RunConfig rc;
  const json* sv = r.raw("schema_version");
  if (!sv) throw ConfigError(key("schema_version"), "missing");
  if (!sv->is_number_integer() || sv->get<long long>() != kSchemaVersion)
    throw ConfigError(key("schema_version"), "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  const json* ex = r.raw("experiment");
  if (!ex) throw ConfigError(key("experiment"), "missing");
  if (!ex->is_string()) throw ConfigError(key("experiment"), "expected a string");
  rc.experiment = ex->get<std::string>();
  const json* seed = r.raw("master_seed");
  if (seed) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0))
      throw ConfigError(key("master_seed"), "expected a non-negative integer");
    rc.master_seed = seed->get<std::uint64_t>();
  } else if (!ov.seed) {
    throw ConfigError(key("master_seed"), "missing (runs must be seeded)");
  }
  if (ov.seed) rc.master_seed = *ov.seed;
  if (const json* od = r.raw("output_dir")) {
    if (!od->is_string()) throw ConfigError(key("output_dir"), "expected a string");
    rc.output_dir = od->get<std::string>();
  }
  if (ov.output_dir) rc.output_dir = *ov.output_dir;
  if (const json* f = r.raw("formats")) {
    if (!f->is_array() || f->empty()) throw ConfigError(key("formats"), "expected a non-empty array");
    rc.formats.clear();
    for (const auto& x : *f) {
      if (!x.is_string()) throw ConfigError(key("formats"), "expected strings");
      const std::string s = x.get<std::string>();
      if (s != "json" && s != "csv" && s != "jsonl") throw ConfigError(key("formats"), "unknown format '" + s + "'");
      rc.formats.insert(s);
    }
  }
  if (const json* p = r.raw("parameters")) {
    if (!p->is_object()) throw ConfigError(key("parameters"), "expected an object");
    rc.parameters = *p;
  }
  for (const auto& [k, v] : doc.items())
    if (k != "schema_version" && k != "experiment" && k != "master_seed" && k != "output_dir" && k != "formats" &&
        k != "parameters")
      throw ConfigError(k, "unknown key");
  return rc;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::filesystem::path> written;
};

/// Parses, runs and writes. Nothing is written unless the config is valid
/// and the experiment completes.
inline RunOutcome run_document(const json& doc, const Overrides& ov = {}) {
  RunOutcome out;
  RunConfig rc;
  Plan plan;
  try {
    rc = parse_run_config(doc, ov);
    plan = plan_for(rc.experiment, rc.parameters, rc.master_seed, std::max<std::size_t>(1, ov.jobs));
    const std::filesystem::path dir(rc.output_dir);
    std::error_code ec;
    if (std::filesystem::exists(dir, ec) && !std::filesystem::is_directory(dir, ec))
      throw ConfigError("output_dir", "'" + rc.output_dir + "' is not a directory");
  } catch (const ConfigError& e) {
    return {kExitConfig, e.what(), {}};
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Artifact> artifacts;
  try {
    artifacts = plan.run();
  } catch (const std::exception& e) {
    return {kExitRuntime, std::string("runtime fault: ") + e.what(), {}};
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    const std::filesystem::path dir(rc.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return {kExitConfig, "config error at 'output_dir': cannot create '" + rc.output_dir + "': " + ec.message(), {}};
    json files = json::array();
    for (const auto& a : artifacts) {
      if (!rc.formats.count(a.format)) continue;
      const auto path = dir / a.name;
      std::ofstream f(path, std::ios::binary);
      f << a.content;
      if (!f) throw std::runtime_error("cannot write " + path.string());
      out.written.push_back(path);
      files.push_back({{"name", a.name}, {"format", a.format}, {"sha256", sha256_hex(a.content)}, {"bytes", a.content.size()}});
    }
    const json manifest{{"schema_version", kSchemaVersion},
                        {"artifact_version", GRWSIM_VERSION},
                        {"experiment", rc.experiment},
                        {"master_seed", rc.master_seed},
                        {"config", {{"experiment", rc.experiment},
                                    {"master_seed", rc.master_seed},
                                    {"formats", rc.formats},
                                    {"parameters", plan.echo}}},
                        {"wall_time_seconds", wall},
                        {"files", std::move(files)}};
    const auto mpath = dir / "manifest.json";
    std::ofstream mf(mpath, std::ios::binary);
    mf << manifest.dump(2) << "\n";
    if (!mf) throw std::runtime_error("cannot write " + mpath.string());
    out.written.push_back(mpath);
  } catch (const std::exception& e) {
    return {kExitRuntime, std::string("runtime fault: ") + e.what(), out.written};
  }
  out.message = "wrote " + std::to_string(out.written.size()) + " files to " + rc.output_dir;
  return out;
}

inline RunOutcome run_file(const std::string& config_path, const Overrides& ov = {}) {
  std::ifstream in(config_path);
  if (!in) return {kExitConfig, "config error at 'config': cannot read '" + config_path + "'", {}};
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    return {kExitConfig, std::string("config error at '<document>': ") + e.what(), {}};
  }
  return run_document(doc, ov);
}

}  // namespace grwsim::cli

#endif  // GRWSIM_RUNNER_HPP
