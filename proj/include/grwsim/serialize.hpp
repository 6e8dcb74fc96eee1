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

#ifndef GRWSIM_SERIALIZE_HPP
#define GRWSIM_SERIALIZE_HPP

// JSON encodings.
//
//   state:    {"space": [[label, dim], ...], "re": [...], "im": [...]}
//             amplitudes in the subsystem-major basis order of hilbert.hpp
//   operator: same keys; "re"/"im" hold the d×d matrix row-major (d² entries)
//   channel:  [operator, operator, ...]  one entry per Kraus operator
//
// Doubles are written in shortest round-trip form, so decoding an encoded
// finite value reproduces it bit for bit.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "grwsim/channels.hpp"
#include "grwsim/grw.hpp"
#include "grwsim/hilbert.hpp"

namespace grwsim {

using json = nlohmann::json;

inline json to_json(const SpaceSpec& space) {
  json j = json::array();
  for (const auto& s : space.subsystems()) j.push_back(json::array({s.label, s.dim}));
  return j;
}

inline SpaceSpec space_from_json(const json& j) {
  std::vector<Subsystem> subs;
  for (const auto& e : j.at("space")) subs.push_back({e.at(0).get<std::string>(), e.at(1).get<std::size_t>()});
  return SpaceSpec(std::move(subs));
}

namespace detail {
inline json split_parts(const cplx* data, Eigen::Index n) {
  json re = json::array(), im = json::array();
  for (Eigen::Index k = 0; k < n; ++k) {
    re.push_back(data[k].real());
    im.push_back(data[k].imag());
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

inline std::vector<cplx> join_parts(const json& j, std::size_t expected) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != expected || im.size() != expected) throw std::invalid_argument("serialized length does not match space");
  std::vector<cplx> out(expected);
  for (std::size_t k = 0; k < expected; ++k) out[k] = cplx(re[k].get<double>(), im[k].get<double>());
  return out;
}
}  // namespace detail

inline json to_json(const StateVector& psi) {
  json j = detail::split_parts(psi.amplitudes().data(), psi.amplitudes().size());
  j["space"] = to_json(psi.space());
  return j;
}

/// Matrix of an operator on `space`, row-major.
inline json operator_to_json(const SpaceSpec& space, const Matrix& m) {
  using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor rm = m;
  json j = detail::split_parts(rm.data(), rm.size());
  j["space"] = to_json(space);
  return j;
}

inline json to_json(const DensityOperator& rho) { return operator_to_json(rho.space(), rho.matrix()); }
inline json to_json(const Observable& obs) { return operator_to_json(obs.space(), obs.matrix()); }

inline json to_json(const Channel& ch) {
  json j = json::array();
  for (const auto& k : ch.kraus()) j.push_back(operator_to_json(ch.space(), k));
  return j;
}

/// Reads a state without renormalizing, so stored amplitudes come back
/// exactly; rejects vectors whose norm is off by more than 1e-10.
inline StateVector state_from_json(const json& j) {
  SpaceSpec space = space_from_json(j);
  const auto vals = detail::join_parts(j, space.total_dim());
  Vector v = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  if (std::abs(v.norm() - 1.0) > tol::structural) throw std::invalid_argument("serialized state is not normalized");
  StateVector psi(space, v);
  // The constructor divides by a norm within rounding of 1; restore the
  // stored amplitudes when that division changed any bits.
  if (psi.amplitudes() != v) psi = StateVector::exact(std::move(space), std::move(v));
  return psi;
}

inline Matrix matrix_from_json(const json& j, const SpaceSpec& space) {
  const std::size_t d = space.total_dim();
  const auto vals = detail::join_parts(j, d * d);
  using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(vals.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

inline DensityOperator density_from_json(const json& j) {
  SpaceSpec space = space_from_json(j);
  Matrix m = matrix_from_json(j, space);
  return DensityOperator(std::move(space), std::move(m));
}

inline Observable observable_from_json(const json& j) {
  SpaceSpec space = space_from_json(j);
  Matrix m = matrix_from_json(j, space);
  return Observable(std::move(space), std::move(m));
}

inline Channel channel_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("channel JSON must be a non-empty array");
  const SpaceSpec space = space_from_json(j.at(0));
  std::vector<Matrix> ks;
  for (const auto& e : j) {
    if (!(space_from_json(e) == space)) throw std::invalid_argument("Kraus operators disagree on space");
    ks.push_back(matrix_from_json(e, space));
  }
  return Channel(space, std::move(ks));
}

/// One JSON-lines record per jump.
inline json to_json(const JumpEvent& ev) {
  json w = json::array();
  for (const auto& [site, weight] : ev.branch_weights) w.push_back(json::array({site, weight}));
  return json{{"t", ev.time},
              {"subsystem", ev.subsystem},
              {"center", ev.center},
              {"center_site", ev.center_site},
              {"pre_jump_prob_density", ev.pre_jump_prob_density},
              {"branch_weights", std::move(w)}};
}

}  // namespace grwsim

#endif  // GRWSIM_SERIALIZE_HPP
