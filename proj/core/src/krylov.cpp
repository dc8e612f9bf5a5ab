// Copyright 2026 The sqs-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sqs/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>

namespace sqs {
namespace {

// Spectral data of the leading m x m block of the Lanczos tridiagonal.
struct Tridiagonal {
  Eigen::VectorXd w;
  Eigen::MatrixXd u;

  Tridiagonal(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta, int m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(beta.head(m - 1)) : Eigen::VectorXd(0);
    es.computeFromTridiagonal(alpha.head(m), sub, Eigen::ComputeEigenvectors);
    w = es.eigenvalues();
    u = es.eigenvectors();
  }

  // exp(-i T s) e_0.
  [[nodiscard]] Eigen::VectorXcd propagate(double s) const {
    Eigen::VectorXcd phase(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) phase(k) = std::polar(1.0, -w(k) * s) * u(0, k);
    return u.cast<cplx>() * phase;
  }

  // |last component of exp(-i T s) e_0|.
  [[nodiscard]] double tail(double s) const {
    const Eigen::Index last = w.size() - 1;
    cplx acc = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) acc += std::polar(u(last, k) * u(0, k), -w(k) * s);
    return std::abs(acc);
  }
};

}  // namespace

// Lanczos without global reorthogonalization; for the exponential the
// a-posteriori estimate beta0 * b_m * |[exp(-i T s) e_0]_m| stays reliable.
// When the subspace budget is exhausted the largest substep meeting its
// share of the tolerance is taken from the same subspace.
std::size_t krylov_expm(const HamiltonianOperator& h, double tau, Eigen::VectorXcd& psi, const KrylovOptions& opts) {
  if (static_cast<std::size_t>(psi.size()) != h.dim()) throw std::invalid_argument("krylov_expm: size mismatch");
  if (tau == 0.0) return 0;
  const auto dim = static_cast<Eigen::Index>(h.dim());
  const int mmax = static_cast<int>(std::min<Eigen::Index>(std::max(opts.max_dim, 2), dim));
  const double sign = tau > 0.0 ? 1.0 : -1.0;
  const double total = std::abs(tau);

  Eigen::MatrixXcd v(dim, mmax);
  Eigen::VectorXd alpha(mmax);
  Eigen::VectorXd beta(mmax);
  Eigen::VectorXcd w(dim);
  std::size_t matvecs = 0;
  double remaining = total;

  for (int substep = 0; remaining > 0.0; ++substep) {
    if (substep >= opts.max_substeps) {
      throw NumericError("krylov_expm: tolerance not met within the substep budget");
    }
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return matvecs;
    v.col(0) = psi / beta0;
    const auto budget = [&](double s) { return opts.tol * s / total; };

    int m = 0;
    double b = 0.0;
    for (int j = 0; j < mmax; ++j) {
      h.apply(std::span<const cplx>(v.col(j).data(), static_cast<std::size_t>(dim)),
              std::span<cplx>(w.data(), static_cast<std::size_t>(dim)));
      ++matvecs;
      const double a = v.col(j).dot(w).real();
      alpha(j) = a;
      w -= a * v.col(j);
      if (j > 0) w -= beta(j - 1) * v.col(j - 1);
      b = w.norm();
      m = j + 1;
      const bool exhausted = b < 1e-14 * std::max(1.0, std::abs(a)) || m == dim;
      if (exhausted || m >= 3) {
        const Tridiagonal t(alpha, beta, m);
        if (exhausted || beta0 * b * t.tail(remaining) < budget(remaining)) {
          psi = beta0 * (v.leftCols(m) * t.propagate(sign * remaining));
          return matvecs;
        }
      }
      if (m == mmax) break;
      beta(j) = b;
      v.col(j + 1) = w / b;
    }

    // Largest substep the full subspace supports: halve, then bisect upward.
    const Tridiagonal t(alpha, beta, m);
    const auto ok = [&](double s) { return beta0 * b * t.tail(s) < budget(s); };
    double lo = remaining;
    while (!ok(lo)) {
      lo *= 0.5;
      if (lo < total * 1e-12) throw NumericError("krylov_expm: step size underflow");
    }
    double hi = std::min(2.0 * lo, remaining);
    for (int it = 0; it < 30 && hi - lo > 1e-3 * lo; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    psi = beta0 * (v.leftCols(m) * t.propagate(sign * lo));
    remaining = lo >= remaining ? 0.0 : remaining - lo;
  }
  return matvecs;
}

}  // namespace sqs
