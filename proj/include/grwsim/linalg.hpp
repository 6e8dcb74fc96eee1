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

#ifndef GRWSIM_LINALG_HPP
#define GRWSIM_LINALG_HPP

#include <complex>
#include <cmath>
#include <algorithm>

#include <Eigen/Dense>

namespace grwsim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Tolerances shared by every module.
namespace tol {
inline constexpr double structural = 1e-10;  // norm, Hermiticity, trace
inline constexpr double spectral = 1e-9;     // eigenvalue merging, projector checks
inline constexpr double annihilated = 1e-14; // squared norm treated as zero
}  // namespace tol

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double eps = tol::structural) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= eps;
}

inline bool is_unitary(const Matrix& u, double eps = tol::structural) {
  return u.rows() == u.cols() &&
         max_abs(u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())) <= eps;
}

inline bool is_isometry(const Matrix& v, double eps = tol::spectral) {
  return max_abs(v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())) <= eps;
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
inline RealVector hermitian_eigenvalues(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
inline double trace_norm_hermitian(const Matrix& m) {
  return hermitian_eigenvalues(m).cwiseAbs().sum();
}

/// Trace distance ½‖a − b‖₁ between Hermitian operators.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  return 0.5 * trace_norm_hermitian(a - b);
}

inline Matrix outer(const Vector& a, const Vector& b) { return a * b.adjoint(); }

/// Kronecker product, first factor slowest.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Principal square root of a positive semidefinite Hermitian matrix.
inline Matrix psd_sqrt(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace grwsim

#endif  // GRWSIM_LINALG_HPP
