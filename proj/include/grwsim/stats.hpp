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

#ifndef GRWSIM_STATS_HPP
#define GRWSIM_STATS_HPP

// Monte Carlo summaries and goodness-of-fit tests.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "grwsim/linalg.hpp"

namespace grwsim {

struct Estimate {
  double est = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Binomial proportion with its standard error √(p(1−p)/n).
inline Estimate binomial(std::size_t successes, std::size_t n) {
  if (n == 0) return {};
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

/// Mean and standard error of a sample.
inline Estimate sample_mean(std::span<const double> xs) {
  if (xs.empty()) return {};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  v = xs.size() > 1 ? v / (n - 1.0) : 0.0;
  return {m, std::sqrt(v / n), xs.size()};
}

struct GofResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson χ² test. Adjacent bins are merged until each expects ≥ 5 counts.
inline GofResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                                std::size_t fitted_params = 0) {
  if (observed.size() != expected.size()) throw std::invalid_argument("chi_square_gof: size mismatch");
  std::vector<double> o, e;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    acc_o += observed[k];
    acc_e += expected[k];
    if (acc_e >= 5.0) {
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (e.empty()) {
      o.push_back(acc_o);
      e.push_back(acc_e);
    } else {
      o.back() += acc_o;
      e.back() += acc_e;
    }
  }
  GofResult r;
  for (std::size_t k = 0; k < o.size(); ++k) r.statistic += (o[k] - e[k]) * (o[k] - e[k]) / e[k];
  if (o.size() <= 1 + fitted_params) return r;
  r.dof = o.size() - 1 - fitted_params;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  return r;
}

/// Goodness of fit of integer counts to Poisson(λ).
inline GofResult poisson_gof(std::span<const std::size_t> counts, double lambda) {
  std::size_t kmax = 0;
  for (auto c : counts) kmax = std::max(kmax, c);
  const double n = static_cast<double>(counts.size());
  std::vector<double> obs(kmax + 2, 0.0), exp(kmax + 2, 0.0);
  for (auto c : counts) obs[c] += 1.0;
  double pk = std::exp(-lambda), cdf = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    exp[k] = n * pk;
    cdf += pk;
    pk *= lambda / static_cast<double>(k + 1);
  }
  exp[kmax + 1] = n * std::max(0.0, 1.0 - cdf);  // tail bin, observed 0
  // Merge from the tail so sparse high-k bins fold into their neighbours.
  std::vector<double> ro(obs.rbegin(), obs.rend()), re(exp.rbegin(), exp.rend());
  return chi_square_gof(ro, re);
}

/// Goodness of fit of positive samples to Exp(rate) using equiprobable bins.
inline GofResult exponential_gof(std::span<const double> samples, double rate, std::size_t bins = 20) {
  std::vector<double> obs(bins, 0.0), exp(bins, static_cast<double>(samples.size()) / static_cast<double>(bins));
  for (double x : samples) {
    const double u = 1.0 - std::exp(-rate * x);  // CDF
    auto k = static_cast<std::size_t>(u * static_cast<double>(bins));
    obs[std::min(k, bins - 1)] += 1.0;
  }
  return chi_square_gof(obs, exp);
}

/// Running mean of |ψ⟩⟨ψ| (or any matrices) with an elementwise standard error.
class MatrixMean {
 public:
  explicit MatrixMean(Eigen::Index dim) : sum_(Matrix::Zero(dim, dim)), sq_(RealVector::Zero(dim * dim)) {}

  void add(const Matrix& m) {
    sum_ += m;
    sq_ += Eigen::Map<const Matrix>(m.data(), m.size(), 1).cwiseAbs2().col(0);
    ++n_;
  }
  void add_pure(const Vector& psi) { add(outer(psi, psi)); }

  std::size_t count() const { return n_; }
  Matrix mean() const { return sum_ / static_cast<double>(n_); }

  /// Standard error of the mean in Frobenius norm.
  double frobenius_stderr() const {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const Matrix mu = mean();
    double var = 0.0;
    const RealVector mu2 = Eigen::Map<const Matrix>(mu.data(), mu.size(), 1).cwiseAbs2().col(0);
    var = (sq_ / n - mu2).sum() * n / (n - 1.0);
    return std::sqrt(std::max(0.0, var) / n);
  }

  /// Monte Carlo error scale for a trace distance between the mean and a
  /// reference supported inside the mean's support: ½·√rank·SE_F.
  double trace_distance_error() const {
    const RealVector ev = hermitian_eigenvalues(mean());
    double rank = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
      if (ev(k) > 1e-12) rank += 1.0;
    return 0.5 * std::sqrt(std::max(rank, 1.0)) * frobenius_stderr();
  }

 private:
  Matrix sum_;
  RealVector sq_;
  std::size_t n_ = 0;
};

}  // namespace grwsim

#endif  // GRWSIM_STATS_HPP
