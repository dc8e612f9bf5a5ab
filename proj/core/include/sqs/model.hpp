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
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sqs/common.hpp"
#include "sqs/geometry.hpp"

namespace sqs {

enum class Constraint { full, blockade };

/// Sorted list of occupation configurations spanning the simulated space.
class BasisSet {
 public:
  static constexpr std::size_t kDefaultBudget = std::size_t{1} << 26;

  /// Every configuration (`full`) or every independent set of `graph`
  /// (`blockade`). Throws BudgetError when more than `max_size` configs result.
  static BasisSet enumerate(const BlockadeGraph& graph, Constraint constraint, std::size_t max_size = kDefaultBudget);

  std::size_t size() const { return configs_.size(); }
  std::size_t n_atoms() const { return n_atoms_; }
  Constraint constraint() const { return constraint_; }
  Config config(std::size_t i) const { return configs_[i]; }
  std::span<const Config> configs() const { return configs_; }

  std::optional<std::size_t> index_of(Config c) const;
  bool contains(Config c) const { return index_of(c).has_value(); }

  std::string hash() const;
  nlohmann::json dump() const;

 private:
  BasisSet(std::vector<Config> configs, std::size_t n_atoms, Constraint constraint);

  std::vector<Config> configs_;
  std::size_t n_atoms_ = 0;
  Constraint constraint_ = Constraint::full;
};

/// -Delta * popcount(c) + sum_{i<j} V_ij n_i n_j.
double classical_energy(Config c, const Eigen::MatrixXd& v, double delta);
double classical_energy(const AtomSet& c, const Eigen::MatrixXd& v, double delta);

/// Rydberg Hamiltonian restricted to a basis:
///   H = sum_i (Omega * scale_i / 2) sigma^x_i - Delta sum_i n_i + sum_{i<j} V_ij n_i n_j.
///
/// The Delta-independent pieces (occupation counts, interaction energies and
/// the single-flip connectivity) live in a shared immutable structure, so
/// `at(omega, delta)` is O(1). Each off-diagonal pair is stored once.
class HamiltonianOperator {
 public:
  static HamiltonianOperator build(const AtomArray& array, std::shared_ptr<const BasisSet> basis,
                                   const Eigen::MatrixXd& interactions, double omega, double delta);

  HamiltonianOperator at(double omega, double delta) const;

  std::size_t dim() const;
  double omega() const { return omega_; }
  double delta() const { return delta_; }
  const BasisSet& basis() const;
  std::shared_ptr<const BasisSet> basis_ptr() const;

  double diagonal(std::size_t a) const;
  /// Interaction part of the diagonal, independent of Omega and Delta.
  double interaction_energy(std::size_t a) const;
  std::size_t n_offdiagonal() const;

  /// out = H * in. `in` and `out` must not alias.
  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  void apply(std::span<const double> in, std::span<double> out) const;

  /// Upper bound on the spectral radius (Gershgorin).
  double norm_bound() const;

  Eigen::MatrixXd to_dense() const;
  nlohmann::json dump() const;

 private:
  struct Structure;
  HamiltonianOperator(std::shared_ptr<const Structure> s, double omega, double delta);

  template <class T>
  void apply_impl(std::span<const T> in, std::span<T> out) const;

  std::shared_ptr<const Structure> s_;
  double omega_ = 1.0;
  double delta_ = 0.0;
};

// ----------------------------------------------------------- named states

enum class StateKind { MIS, S, Z, Zbar, ZigzagMix };

std::string to_string(StateKind k);
StateKind parse_state_kind(const std::string& s);

/// Atom index of a doublet-chain site in the fixed bit order.
std::size_t doublet_chain_atom(int site, AtomKind kind);

struct NamedState {
  StateKind kind;
  std::vector<std::pair<Config, double>> terms;  // normalized real amplitudes
  Eigen::VectorXcd amplitudes;                   // over the basis

  std::vector<Config> support() const;
};

/// Product-configuration expansion of a named doublet-chain state for odd L.
/// Z-type and S states need at least one bulk doublet (L >= 7).
std::vector<std::pair<Config, double>> named_state_terms(StateKind kind, int L);

/// Throws std::invalid_argument when any term lies outside the basis.
NamedState named_state(StateKind kind, int L, const BasisSet& basis);

/// Diagonal next-nearest atom pairs between consecutive bulk doublets
/// (sites 4 .. L-3): (top_i, bottom_{i+2}) and (bottom_i, top_{i+2}).
/// There are L - 7 of them; requires odd L >= 9.
std::vector<std::pair<std::size_t, std::size_t>> zigzag_correlation_pairs(int L);

// -------------------------------------------------------------- exact MIS

struct MisResult {
  std::size_t size = 0;
  std::vector<AtomSet> maximizers;  // ascending
};

/// Branch-and-bound maximum independent set with full maximizer enumeration.
/// Throws BudgetError past `max_nodes` search nodes or `max_solutions`.
MisResult exact_mis(const BlockadeGraph& graph, std::size_t max_nodes = 200'000'000,
                    std::size_t max_solutions = 1'000'000);

}  // namespace sqs
