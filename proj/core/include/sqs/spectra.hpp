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
#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <span>
#include <utility>
#include <vector>

#include "sqs/dyn_dense.hpp"
#include "sqs/geometry.hpp"
#include "sqs/model.hpp"

namespace sqs {

struct EigenOptions {
  double residual_tol = 1e-8;
  int max_restarts = 10;
  int max_subspace = 240;  // Lanczos vectors per cycle
  std::size_t dense_threshold = 2000;
  /// After convergence run one more cycle orthogonal to the found vectors to
  /// pick up exactly degenerate partners a single Krylov space cannot see.
  bool deflation_check = true;
  std::uint64_t seed = 0x5eed;
};

struct EigenPairs {
  std::vector<double> energies;  // ascending
  Eigen::MatrixXd vectors;       // columns, normalized, largest-magnitude entry positive
};

/// The k lowest eigenpairs. Throws NumericError on non-convergence.
EigenPairs low_eigs(const HamiltonianOperator& h, int k, const EigenOptions& opts = {});

/// Residual norm ||H x - E x|| for column `j`.
double residual(const HamiltonianOperator& h, const EigenPairs& pairs, int j);

// ------------------------------------------------------------------ scans

struct SpectrumPoint {
  double delta = 0.0;
  std::vector<double> energies;
  std::vector<double> overlap_mis;     // |<MIS|e_j>|^2 per eigenstate
  std::vector<double> overlap_zigzag;  // |<Z|e_j>|^2 + |<Zbar|e_j>|^2
  double n_total = 0.0;
  std::vector<double> n_site;  // ground state, doublets summed
  double p_mis = 0.0;
  double order = 0.0;
};

struct SpectrumScan {
  std::vector<SpectrumPoint> points;
  int k = 1;
};

/// Ground-state (and k-level) scan. `array` supplies site labels; MIS/zigzag
/// targets and the order parameter come from `targets`.
SpectrumScan ground_scan(const AtomArray& array, const HamiltonianOperator& family, std::span<const double> deltas,
                         int k, const ObservableSpec& targets, const EigenOptions& opts = {}, unsigned threads = 1);

/// delta, E0..Ek-1, ovl_mis_0..k-1, ovl_zz_0..k-1, n_total, P_mis, O.
void write_spectrum_csv(std::ostream& os, const SpectrumScan& scan);
nlohmann::json to_json(const SpectrumScan& scan);

struct MinGapOptions {
  int coarse_points = 41;
  double resolution = 1e-4;
  EigenOptions eig{};
};

struct GapMinimum {
  double delta = 0.0;
  double gap = 0.0;
  std::vector<std::pair<double, double>> coarse;  // (delta, gap)
};

/// E1 - E0 on a coarse grid over [lo, hi] then golden-section refinement.
/// Throws std::domain_error when the coarse minimum sits on the window edge.
GapMinimum min_gap(const HamiltonianOperator& family, double lo, double hi, const MinGapOptions& opts = {});

struct OverlapRow {
  double t = 0.0;
  double delta = 0.0;
  std::vector<double> energies;
  std::vector<double> overlaps;  // |<e_j(Delta)|psi(t)>|^2
  double captured = 0.0;         // sum of overlaps
};

/// Projects each checkpoint onto the k lowest eigenstates at its own controls.
/// Throws std::invalid_argument for an empty checkpoint list.
std::vector<OverlapRow> instantaneous_overlaps(std::span<const Checkpoint> checkpoints,
                                               const HamiltonianOperator& family, int k, const EigenOptions& opts = {});

/// Number of independent sets of `graph` restricted to `subset` (the empty
/// set included). Frontier dynamic programme in vertex order, so chains cost
/// O(n) states. Throws BudgetError past `max_states` frontier states or on
/// 64-bit overflow.
std::uint64_t count_independent_sets(const BlockadeGraph& graph, const AtomSet& subset,
                                     std::size_t max_states = std::size_t{1} << 22);
std::uint64_t count_independent_sets(const BlockadeGraph& graph);

}  // namespace sqs
