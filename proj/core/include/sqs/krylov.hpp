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

#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "sqs/model.hpp"

namespace sqs {

struct KrylovOptions {
  double tol = 1e-10;          // a-posteriori error bound per call
  int max_dim = 30;            // subspace dimension before the step is split
  int max_substeps = 1 << 16;  // substeps allowed per call
};

/// psi <- exp(-i H tau) psi with a Lanczos subspace; tau in units of 1/Omega.
/// Returns the number of matrix-vector products used.
/// Throws NumericError when the tolerance cannot be met within the budget.
std::size_t krylov_expm(const HamiltonianOperator& h, double tau, Eigen::VectorXcd& psi,
                        const KrylovOptions& opts = {});

}  // namespace sqs
