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


#ifndef GRWSIM_TESTS_ORACLES_HPP
#define GRWSIM_TESTS_ORACLES_HPP

// Reference implementations written from index arithmetic alone. They share
// nothing with the library beyond the Eigen types.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index k = 0; k < b.size(); ++k) out(i * b.size() + k) = a(i) * b(k);
  return out;
}

/// Digits of a mixed-radix index, first subsystem slowest.
inline std::vector<std::size_t> digits(std::size_t index, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> d(dims.size());
  for (std::size_t p = dims.size(); p-- > 0;) {
    d[p] = index % dims[p];
    index /= dims[p];
  }
  return d;
}

inline std::size_t undigits(const std::vector<std::size_t>& d, const std::vector<std::size_t>& dims) {
  std::size_t index = 0;
  for (std::size_t p = 0; p < dims.size(); ++p) index = index * dims[p] + d[p];
  return index;
}

/// Partial trace keeping the positions flagged in `keep`.
inline Mat partial_trace(const Mat& rho, const std::vector<std::size_t>& dims, const std::vector<bool>& keep) {
  std::vector<std::size_t> kdims;
  for (std::size_t p = 0; p < dims.size(); ++p)
    if (keep[p]) kdims.push_back(dims[p]);
  std::size_t kd = 1;
  for (auto d : kdims) kd *= d;
  Mat out = Mat::Zero(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  const auto n = static_cast<std::size_t>(rho.rows());
  for (std::size_t i = 0; i < n; ++i) {
    const auto di = digits(i, dims);
    for (std::size_t j = 0; j < n; ++j) {
      const auto dj = digits(j, dims);
      bool traced_equal = true;
      std::vector<std::size_t> ki, kj;
      for (std::size_t p = 0; p < dims.size(); ++p) {
        if (keep[p]) {
          ki.push_back(di[p]);
          kj.push_back(dj[p]);
        } else if (di[p] != dj[p]) {
          traced_equal = false;
        }
      }
      if (traced_equal)
        out(static_cast<Eigen::Index>(undigits(ki, kdims)), static_cast<Eigen::Index>(undigits(kj, kdims))) +=
            rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

/// ½ Σ |eigenvalues of (a − b)|.
inline double trace_distance(const Mat& a, const Mat& b) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// exp(−iHt) by Taylor series with scaling and squaring.
inline Mat expm_minus_i(const Mat& h, double t) {
  const Mat a = cplx(0.0, -t) * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.25) ++s;
  const Mat b = a / std::pow(2.0, s);
  Mat term = Mat::Identity(h.rows(), h.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

/// Unnormalized Gaussian on a ring of m sites (minimum image), peak at c.
inline double ring_gaussian(std::size_t x, std::size_t c, std::size_t m, double spacing, double delta) {
  const double raw = std::abs(static_cast<double>(x) - static_cast<double>(c));
  const double d = std::min(raw, static_cast<double>(m) - raw) * spacing;
  return std::exp(-d * d / (2.0 * delta * delta));
}

inline double binomial_sigma(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace oracle

#endif  // GRWSIM_TESTS_ORACLES_HPP
