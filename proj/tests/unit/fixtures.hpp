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
#include <cmath>
#include <memory>
#include <vector>

#include "sqs/geometry.hpp"
#include "sqs/model.hpp"

namespace sqs::testing {

/// Equilateral 5.5 um doublet chain with NNN interactions and the blockade basis.
struct Chain {
  AtomArray array;
  Calibration cal;
  BlockadeGraph graph;
  Eigen::MatrixXd v;
  std::shared_ptr<const BasisSet> basis;
  HamiltonianOperator family;
};

inline Chain make_chain(int L, double delta = -4.0, Truncation truncation = Truncation::nnn,
                        Constraint constraint = Constraint::blockade, double s = 5.5) {
  AtomArray array = build_doublet_chain(L, s);
  const Calibration cal = Calibration::standard();
  BlockadeGraph graph = blockade_graph(array, cal);
  Eigen::MatrixXd v = interaction_matrix(array, cal, truncation);
  auto basis = std::make_shared<const BasisSet>(BasisSet::enumerate(graph, constraint));
  auto family = HamiltonianOperator::build(array, basis, v, 1.0, delta);
  return {std::move(array), cal, std::move(graph), std::move(v), std::move(basis), std::move(family)};
}

/// Independent oracle: blockade-basis size of a doublet chain from a site DP
/// (neighbouring sites exclude each other, a doublet holds at most one excitation).
inline double chain_basis_size(int L) {
  double empty = 1.0;
  double occupied = 1.0;  // site 1 is a single
  for (int site = 2; site <= L; ++site) {
    const double weight = site % 2 == 0 ? 2.0 : 1.0;
    const double e = empty + occupied;
    occupied = weight * empty;
    empty = e;
  }
  return empty + occupied;
}

/// Brute-force maximum independent set size over all subsets (n <= 20).
inline std::size_t brute_force_mis(const BlockadeGraph& g) {
  std::size_t best = 0;
  for (Config c = 0; c < (Config{1} << g.n_vertices); ++c) {
    if (g.is_independent(AtomSet::from_config(c))) best = std::max<std::size_t>(best, std::popcount(c));
  }
  return best;
}

}  // namespace sqs::testing
