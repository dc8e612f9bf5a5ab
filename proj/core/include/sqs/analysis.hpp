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

#include <cstddef>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "sqs/dyn_dense.hpp"
#include "sqs/dyn_mps.hpp"
#include "sqs/geometry.hpp"
#include "sqs/measure.hpp"

namespace sqs {

/// Zigzag order parameter of an odd-L doublet chain:
///   <O> = 4 / (L - 7) * sum over diagonal bulk pairs of (<n n> - <n><n>).
/// Throws std::invalid_argument for L < 9.
double order_parameter(const DenseState& state, int L);
double order_parameter(const ShotSet& shots, int L);
double order_parameter(const MPSState& mps, int L);

/// ln min(D_left, D_right) with D the independent-set count of each side of
/// the cut after `n_left` atoms.
double entropy_upper_bound(const BlockadeGraph& graph, std::size_t n_left);
/// Same bound for the cut between chain sites `site` and `site + 1`.
double entropy_upper_bound(const AtomArray& array, const BlockadeGraph& graph, int site);

struct ScalingFit {
  std::vector<double> sizes;
  std::vector<double> probabilities;
  std::vector<double> errors;
  std::vector<double> excluded_sizes;  // zero-probability points left out
  double p = 0.0;                      // P = p * b^(N - n0)
  double b = 0.0;
  double n0 = 13.0;
  double p_at_zero = 0.0;            // P = p_at_zero * b^N
  std::vector<double> residuals;     // ln P - fitted ln P
  std::vector<double> local_slopes;  // d ln P / dN between neighbours
};

/// Weighted least squares of ln P on N with weights (P / err)^2 (uniform when
/// no errors are given or all are zero). Throws std::invalid_argument for negative
/// probabilities, non-increasing sizes or fewer than two usable points.
ScalingFit scaling_fit(std::span<const double> sizes, std::span<const double> probs,
                       std::span<const double> errors = {}, double n0 = 13.0);

struct QuenchScan {
  std::vector<double> tq;
  std::vector<double> p;
  std::vector<double> errors;
  std::optional<std::size_t> first_revival;  // index into tq
  std::size_t argmax = 0;

  double first_revival_time() const { return tq.at(first_revival.value()); }
  double best_tq() const { return tq.at(argmax); }
};

/// First index whose value exceeds p[0] and its left neighbour and is not
/// exceeded by its right neighbour (a plateau counts at its left edge).
/// No smoothing.
std::optional<std::size_t> find_first_revival(std::span<const double> p);

/// Throws std::domain_error when the trace has no interior local maximum above
/// its first value.
QuenchScan quench_scan_summary(std::span<const double> tq, std::span<const double> p,
                               std::span<const double> errors = {});

nlohmann::json to_json(const ScalingFit& fit);
nlohmann::json to_json(const QuenchScan& scan);

struct FitTable {
  std::vector<double> sizes;
  std::vector<double> probabilities;
  std::vector<double> errors;
};

/// CSV with a header naming columns N, P and optionally err.
FitTable read_fit_csv(std::istream& is);

}  // namespace sqs
