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

#ifndef GRWSIM_HILBERT_HPP
#define GRWSIM_HILBERT_HPP

// Finite-dimensional labeled tensor-product spaces, pure and mixed states,
// observables, and the partial trace.
//
// Basis convention: a composite basis index is subsystem-major, i.e. the
// first label varies slowest. For subsystems (d_0, d_1, ..., d_{n-1}) and
// local indices (i_0, ..., i_{n-1}) the composite index is
//   i_0 * d_1 * ... * d_{n-1} + ... + i_{n-2} * d_{n-1} + i_{n-1}.
// Saved states (see serialize.hpp) use exactly this order.

#include <cstddef>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grwsim/linalg.hpp"

namespace grwsim {

struct Subsystem {
  std::string label;
  std::size_t dim = 1;

  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

class SpaceSpec {
 public:
  SpaceSpec() = default;

  explicit SpaceSpec(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
    std::set<std::string> seen;
    total_dim_ = 1;
    for (const auto& s : subsystems_) {
      if (s.dim == 0) throw std::invalid_argument("subsystem '" + s.label + "' has zero dimension");
      if (!seen.insert(s.label).second) throw std::invalid_argument("duplicate subsystem label '" + s.label + "'");
      total_dim_ *= s.dim;
    }
  }

  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  std::size_t size() const { return subsystems_.size(); }
  std::size_t total_dim() const { return total_dim_; }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& s : subsystems_) out.push_back(s.label);
    return out;
  }

  bool contains(const std::string& label) const {
    for (const auto& s : subsystems_)
      if (s.label == label) return true;
    return false;
  }

  std::size_t position(const std::string& label) const {
    for (std::size_t i = 0; i < subsystems_.size(); ++i)
      if (subsystems_[i].label == label) return i;
    throw std::invalid_argument("unknown subsystem label '" + label + "'");
  }

  std::size_t dim(const std::string& label) const { return subsystems_[position(label)].dim; }

  /// Concatenation; labels must be disjoint.
  SpaceSpec concat(const SpaceSpec& other) const {
    std::vector<Subsystem> all = subsystems_;
    for (const auto& s : other.subsystems_) {
      if (contains(s.label)) throw std::invalid_argument("label collision on '" + s.label + "'");
      all.push_back(s);
    }
    return SpaceSpec(std::move(all));
  }

  /// The subsystems named in `keep`, in this space's order.
  SpaceSpec restrict_to(const std::set<std::string>& keep) const {
    for (const auto& l : keep) (void)position(l);
    std::vector<Subsystem> kept;
    for (const auto& s : subsystems_)
      if (keep.count(s.label)) kept.push_back(s);
    return SpaceSpec(std::move(kept));
  }

  friend bool operator==(const SpaceSpec& a, const SpaceSpec& b) { return a.subsystems_ == b.subsystems_; }

 private:
  std::vector<Subsystem> subsystems_;
  std::size_t total_dim_ = 1;
};

inline SpaceSpec make_space(const std::vector<std::pair<std::string, std::size_t>>& subsystems) {
  std::vector<Subsystem> s;
  for (const auto& [label, dim] : subsystems) s.push_back({label, dim});
  return SpaceSpec(std::move(s));
}

/// Maps composite indices onto (selected, rest) index pairs for an ordered
/// selection of subsystems. The selected index follows the order of
/// `selected` (which need not match the space order); the rest index keeps
/// the space order.
class IndexLayout {
 public:
  IndexLayout(const SpaceSpec& space, const std::vector<std::string>& selected) {
    const auto& subs = space.subsystems();
    std::vector<std::size_t> sel_pos;
    for (const auto& l : selected) sel_pos.push_back(space.position(l));
    std::vector<bool> is_sel(subs.size(), false);
    for (auto p : sel_pos) {
      if (is_sel[p]) throw std::invalid_argument("label selected twice");
      is_sel[p] = true;
    }
    sel_dim_ = 1;
    for (auto p : sel_pos) sel_dim_ *= subs[p].dim;
    rest_dim_ = space.total_dim() / sel_dim_;

    // Strides of each subsystem inside the selected and the rest index.
    std::vector<std::size_t> sel_stride(subs.size(), 0), rest_stride(subs.size(), 0);
    std::size_t s = 1;
    for (auto it = sel_pos.rbegin(); it != sel_pos.rend(); ++it) {
      sel_stride[*it] = s;
      s *= subs[*it].dim;
    }
    s = 1;
    for (std::size_t p = subs.size(); p-- > 0;) {
      if (is_sel[p]) continue;
      rest_stride[p] = s;
      s *= subs[p].dim;
    }

    full_.assign(space.total_dim(), 0);
    std::vector<std::size_t> digits(subs.size(), 0);
    for (std::size_t full = 0; full < space.total_dim(); ++full) {
      std::size_t si = 0, ri = 0;
      for (std::size_t p = 0; p < subs.size(); ++p) {
        if (is_sel[p])
          si += digits[p] * sel_stride[p];
        else
          ri += digits[p] * rest_stride[p];
      }
      full_[si * rest_dim_ + ri] = full;
      for (std::size_t p = subs.size(); p-- > 0;) {
        if (++digits[p] < subs[p].dim) break;
        digits[p] = 0;
      }
    }
  }

  std::size_t selected_dim() const { return sel_dim_; }
  std::size_t rest_dim() const { return rest_dim_; }
  std::size_t full(std::size_t sel, std::size_t rest) const { return full_[sel * rest_dim_ + rest]; }

  /// Amplitudes as a (selected × rest) matrix.
  Matrix gather(const Vector& v) const {
    Matrix m(sel_dim_, rest_dim_);
    for (std::size_t k = 0; k < sel_dim_; ++k)
      for (std::size_t r = 0; r < rest_dim_; ++r) m(k, r) = v(full(k, r));
    return m;
  }

  Vector scatter(const Matrix& m) const {
    Vector v(sel_dim_ * rest_dim_);
    for (std::size_t k = 0; k < sel_dim_; ++k)
      for (std::size_t r = 0; r < rest_dim_; ++r) v(full(k, r)) = m(k, r);
    return v;
  }

 private:
  std::size_t sel_dim_ = 1, rest_dim_ = 1;
  std::vector<std::size_t> full_;
};

class StateVector {
 public:
  /// Normalizes `amplitudes`; throws if they are (numerically) zero.
  StateVector(SpaceSpec space, Vector amplitudes) : space_(std::move(space)), amps_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amps_.size()) != space_.total_dim())
      throw std::invalid_argument("amplitude vector length does not match space dimension");
    const double n2 = amps_.squaredNorm();
    if (!(n2 > tol::annihilated) || !std::isfinite(n2)) throw std::invalid_argument("state has zero or non-finite norm");
    amps_ /= std::sqrt(n2);
  }

  static StateVector basis(SpaceSpec space, std::size_t index) {
    if (index >= space.total_dim()) throw std::out_of_range("basis index out of range");
    Vector v = Vector::Zero(space.total_dim());
    v(index) = 1.0;
    return StateVector(std::move(space), std::move(v));
  }

  /// Keeps the amplitudes bit for bit; they must already be unit norm.
  static StateVector exact(SpaceSpec space, Vector amplitudes) {
    if (static_cast<std::size_t>(amplitudes.size()) != space.total_dim())
      throw std::invalid_argument("amplitude vector length does not match space dimension");
    if (!(std::abs(amplitudes.norm() - 1.0) <= tol::structural)) throw std::invalid_argument("state is not normalized");
    StateVector s;
    s.space_ = std::move(space);
    s.amps_ = std::move(amplitudes);
    return s;
  }

  const SpaceSpec& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  std::size_t dim() const { return space_.total_dim(); }

 private:
  StateVector() = default;

  SpaceSpec space_;
  Vector amps_;
};

class DensityOperator {
 public:
  /// Validates Hermiticity, unit trace and positivity.
  DensityOperator(SpaceSpec space, Matrix matrix) : space_(std::move(space)), rho_(std::move(matrix)) {
    check_shape();
    if (!is_hermitian(rho_)) throw std::invalid_argument("density operator is not Hermitian");
    if (std::abs(rho_.trace() - cplx(1.0)) > tol::structural) throw std::invalid_argument("density operator trace is not 1");
    if (hermitian_eigenvalues(rho_).minCoeff() < -tol::structural)
      throw std::invalid_argument("density operator has a negative eigenvalue");
  }

  /// For matrices produced by trace- and positivity-preserving algebra; only
  /// the Hermitian part is kept.
  static DensityOperator trusted(SpaceSpec space, const Matrix& matrix) {
    DensityOperator d;
    d.space_ = std::move(space);
    d.rho_ = 0.5 * (matrix + matrix.adjoint());
    d.check_shape();
    return d;
  }

  static DensityOperator pure(const StateVector& psi) {
    return trusted(psi.space(), outer(psi.amplitudes(), psi.amplitudes()));
  }

  const SpaceSpec& space() const { return space_; }
  const Matrix& matrix() const { return rho_; }
  std::size_t dim() const { return space_.total_dim(); }
  double purity() const { return (rho_ * rho_).trace().real(); }

 private:
  DensityOperator() = default;
  void check_shape() const {
    if (static_cast<std::size_t>(rho_.rows()) != space_.total_dim() || rho_.rows() != rho_.cols())
      throw std::invalid_argument("operator shape does not match space dimension");
  }

  SpaceSpec space_;
  Matrix rho_;
};

struct Eigensystem {
  std::vector<double> values;     // ascending, degenerate values merged
  std::vector<Matrix> projectors; // one orthogonal projector per value
};

Eigensystem eigendecompose(const Matrix& hermitian);

class Observable {
 public:
  Observable(SpaceSpec space, Matrix matrix) : space_(std::move(space)), m_(std::move(matrix)), lazy_(std::make_shared<Lazy>()) {
    if (static_cast<std::size_t>(m_.rows()) != space_.total_dim() || m_.rows() != m_.cols())
      throw std::invalid_argument("observable shape does not match space dimension");
    if (!is_hermitian(m_)) throw std::invalid_argument("observable is not Hermitian");
  }

  /// Builds Σ values[k]·projectors[k] with the spectral data supplied exactly.
  static Observable from_spectral(SpaceSpec space, std::vector<double> values, std::vector<Matrix> projectors) {
    if (values.size() != projectors.size() || values.empty())
      throw std::invalid_argument("spectral data size mismatch");
    const auto d = static_cast<Eigen::Index>(space.total_dim());
    Matrix m = Matrix::Zero(d, d), sum = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const Matrix& p = projectors[k];
      if (p.rows() != d || p.cols() != d) throw std::invalid_argument("projector shape mismatch");
      if (max_abs(p * p - p) > tol::spectral || !is_hermitian(p, tol::spectral))
        throw std::invalid_argument("spectral projector is not an orthogonal projector");
      m += values[k] * p;
      sum += p;
    }
    if (max_abs(sum - Matrix::Identity(d, d)) > tol::spectral) throw std::invalid_argument("projectors do not sum to identity");
    Observable o(std::move(space), 0.5 * (m + m.adjoint()));
    std::call_once(o.lazy_->once, [&] { o.lazy_->es = Eigensystem{std::move(values), std::move(projectors)}; });
    return o;
  }

  const SpaceSpec& space() const { return space_; }
  const Matrix& matrix() const { return m_; }

  /// Computed on first use; safe to call concurrently.
  const Eigensystem& eigensystem() const {
    std::call_once(lazy_->once, [this] { lazy_->es = eigendecompose(m_); });
    return lazy_->es;
  }

 private:
  struct Lazy {
    std::once_flag once;
    Eigensystem es;
  };
  SpaceSpec space_;
  Matrix m_;
  std::shared_ptr<Lazy> lazy_;
};

inline Eigensystem eigendecompose(const Matrix& h) {
  if (!is_hermitian(h)) throw std::invalid_argument("eigendecompose: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const RealVector& ev = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  Eigensystem out;
  Eigen::Index start = 0;
  const Eigen::Index n = ev.size();
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && ev(end) - ev(end - 1) < tol::spectral) ++end;
    const Matrix block = vecs.middleCols(start, end - start);
    out.values.push_back(ev.segment(start, end - start).mean());
    out.projectors.push_back(block * block.adjoint());
    start = end;
  }
  return out;
}

inline Eigensystem eigendecompose(const Observable& obs) { return eigendecompose(obs.matrix()); }

// ---------------------------------------------------------------------------
// Composition and reduction

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  return StateVector(a.space().concat(b.space()), kron(a.amplitudes(), b.amplitudes()));
}

inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator::trusted(a.space().concat(b.space()), kron(a.matrix(), b.matrix()));
}

namespace detail {
inline std::vector<std::string> ordered_subset(const SpaceSpec& space, const std::set<std::string>& keep) {
  std::vector<std::string> out;
  for (const auto& l : keep) (void)space.position(l);
  for (const auto& s : space.subsystems())
    if (keep.count(s.label)) out.push_back(s.label);
  return out;
}
}  // namespace detail

inline Matrix partial_trace(const Matrix& rho, const SpaceSpec& space, const std::set<std::string>& keep) {
  const IndexLayout lay(space, detail::ordered_subset(space, keep));
  const auto dk = static_cast<Eigen::Index>(lay.selected_dim());
  Matrix out = Matrix::Zero(dk, dk);
  for (std::size_t r = 0; r < lay.rest_dim(); ++r)
    for (Eigen::Index i = 0; i < dk; ++i)
      for (Eigen::Index j = 0; j < dk; ++j) out(i, j) += rho(lay.full(i, r), lay.full(j, r));
  return out;
}

inline DensityOperator partial_trace(const DensityOperator& rho, const std::set<std::string>& keep) {
  return DensityOperator::trusted(rho.space().restrict_to(keep), partial_trace(rho.matrix(), rho.space(), keep));
}

/// Reduced state of a pure state, without forming the full density matrix.
inline DensityOperator reduced_state(const StateVector& psi, const std::set<std::string>& keep) {
  const IndexLayout lay(psi.space(), detail::ordered_subset(psi.space(), keep));
  const Matrix m = lay.gather(psi.amplitudes());
  return DensityOperator::trusted(psi.space().restrict_to(keep), m * m.adjoint());
}

/// Lifts `op` (acting on the subsystems of `op_space`, in that order) to
/// `full` by tensoring identities.
inline Matrix embed_operator(const Matrix& op, const SpaceSpec& op_space, const SpaceSpec& full) {
  for (const auto& s : op_space.subsystems())
    if (full.dim(s.label) != s.dim) throw std::invalid_argument("embed: dimension mismatch for '" + s.label + "'");
  const IndexLayout lay(full, op_space.labels());
  const auto d = static_cast<Eigen::Index>(full.total_dim());
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t r = 0; r < lay.rest_dim(); ++r)
    for (std::size_t i = 0; i < lay.selected_dim(); ++i)
      for (std::size_t j = 0; j < lay.selected_dim(); ++j) {
        const cplx v = op(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (v != cplx(0.0)) out(lay.full(i, r), lay.full(j, r)) = v;
      }
  return out;
}

inline Observable embed(const Observable& op, const SpaceSpec& space) {
  if (op.space() == space) return op;
  return Observable(space, embed_operator(op.matrix(), op.space(), space));
}

/// (op ⊗ 1)·v where op acts on the subsystems of `op_space`.
inline Vector apply_local(const Matrix& op, const SpaceSpec& op_space, const SpaceSpec& space, const Vector& v) {
  if (op_space == space) return op * v;
  for (const auto& s : op_space.subsystems())
    if (space.dim(s.label) != s.dim) throw std::invalid_argument("apply_local: dimension mismatch for '" + s.label + "'");
  const IndexLayout lay(space, op_space.labels());
  return lay.scatter(op * lay.gather(v));
}

// ---------------------------------------------------------------------------
// Measurement

struct Outcome {
  double value;
  double probability;
};

inline double expectation(const StateVector& psi, const Matrix& op) {
  return psi.amplitudes().dot(op * psi.amplitudes()).real();
}

inline double fidelity(const StateVector& a, const StateVector& b) {
  if (!(a.space() == b.space())) throw std::invalid_argument("fidelity: space mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

inline std::vector<Outcome> born_probabilities(const StateVector& state, const Observable& obs) {
  if (!(state.space() == obs.space())) throw std::invalid_argument("born_probabilities: space mismatch");
  const auto& es = obs.eigensystem();
  std::vector<Outcome> out;
  for (std::size_t k = 0; k < es.values.size(); ++k)
    out.push_back({es.values[k], std::max(0.0, expectation(state, es.projectors[k]))});
  return out;
}

/// Born probabilities of an observable on a subset of the state's subsystems.
inline std::vector<Outcome> local_born_probabilities(const StateVector& state, const Observable& obs) {
  const auto& es = obs.eigensystem();
  std::vector<Outcome> out;
  for (std::size_t k = 0; k < es.values.size(); ++k) {
    const Vector pv = apply_local(es.projectors[k], obs.space(), state.space(), state.amplitudes());
    out.push_back({es.values[k], pv.squaredNorm()});
  }
  return out;
}

struct Projection {
  StateVector state;
  double probability;
};

/// Lüders update P|ψ⟩/‖P|ψ⟩‖ for an orthogonal projector on the full space.
inline Projection project(const StateVector& state, const Matrix& projector) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  if (projector.rows() != d || projector.cols() != d) throw std::invalid_argument("project: shape mismatch");
  if (!is_hermitian(projector, tol::spectral) || max_abs(projector * projector - projector) > tol::spectral)
    throw std::invalid_argument("project: not an orthogonal projector");
  Vector pv = projector * state.amplitudes();
  const double p = pv.squaredNorm();
  if (p < tol::annihilated) throw std::domain_error("project: projection onto an effectively orthogonal subspace");
  return {StateVector(state.space(), std::move(pv)), p};
}

}  // namespace grwsim

#endif  // GRWSIM_HILBERT_HPP
